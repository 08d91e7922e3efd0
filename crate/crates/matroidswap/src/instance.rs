//! Problem instances: agents, goods, rank oracles and the priority order.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::valuation::ValuationOracle;

/// A fair allocation instance. Immutable after construction; oracles may be
/// queried concurrently.
#[derive(Clone, Debug)]
pub struct Instance {
    good_names: Vec<String>,
    agent_names: Vec<String>,
    oracles: Vec<ValuationOracle>,
    /// `priority[i]` is the rank `π(i+1)` of agent `i+1`; rank 1 is the
    /// highest priority.
    priority: Vec<usize>,
}

impl Instance {
    pub fn new(
        good_names: Vec<String>,
        agent_names: Vec<String>,
        oracles: Vec<ValuationOracle>,
        priority: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = agent_names.len();
        if n == 0 {
            return Err(Error::NoAgents);
        }
        if oracles.len() != n {
            return Err(Error::Precondition(format!(
                "{} agents but {} oracles",
                n,
                oracles.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &good_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateGood(name.clone()));
            }
        }
        let mut seen = HashSet::new();
        for name in &agent_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateAgent(name.clone()));
            }
        }
        let priority = match priority {
            Some(p) => {
                let mut ranks: Vec<usize> = p.clone();
                ranks.sort_unstable();
                if ranks != (1..=n).collect::<Vec<_>>() {
                    return Err(Error::InvalidPriority(n));
                }
                p
            }
            None => (1..=n).collect(),
        };
        Ok(Instance {
            good_names,
            agent_names,
            oracles,
            priority,
        })
    }

    /// Instance with auto-generated names (`g1..gm`, `a1..an`) and identity
    /// priority. Convenient for tests and examples.
    pub fn simple(good_count: usize, oracles: Vec<ValuationOracle>) -> Instance {
        let good_names = (1..=good_count).map(|i| format!("g{i}")).collect();
        let agent_names = (1..=oracles.len()).map(|i| format!("a{i}")).collect();
        Instance::new(good_names, agent_names, oracles, None)
            .expect("auto-generated names are valid")
    }

    /// Same instance with a different priority permutation.
    pub fn with_priority(&self, priority: Vec<usize>) -> Result<Instance> {
        Instance::new(
            self.good_names.clone(),
            self.agent_names.clone(),
            self.oracles.clone(),
            Some(priority),
        )
    }

    pub fn good_count(&self) -> usize {
        self.good_names.len()
    }

    pub fn agent_count(&self) -> usize {
        self.agent_names.len()
    }

    /// Real agents `Agent(1)..=Agent(n)`.
    pub fn agents(&self) -> impl Iterator<Item = Agent> {
        (1..=self.agent_count()).map(Agent)
    }

    pub fn all_goods(&self) -> GoodSet {
        GoodSet::full(self.good_count())
    }

    pub fn oracle(&self, agent: Agent) -> Result<&ValuationOracle> {
        if agent.is_unassigned() || agent.0 > self.agent_count() {
            return Err(Error::UnknownAgent(format!("a{}", agent.0)));
        }
        Ok(&self.oracles[agent.0 - 1])
    }

    /// Priority rank `π(agent)`; rank 1 is served first.
    pub fn rank(&self, agent: Agent) -> usize {
        debug_assert!(!agent.is_unassigned());
        self.priority[agent.0 - 1]
    }

    pub fn priority(&self) -> &[usize] {
        &self.priority
    }

    /// Agents ordered by ascending rank (highest priority first).
    pub fn agents_by_rank(&self) -> Vec<Agent> {
        let mut agents: Vec<Agent> = self.agents().collect();
        agents.sort_by_key(|&a| self.rank(a));
        agents
    }

    pub fn good_name(&self, g: Good) -> &str {
        &self.good_names[g.0]
    }

    pub fn agent_name(&self, a: Agent) -> &str {
        &self.agent_names[a.0 - 1]
    }

    pub fn good_names(&self) -> &[String] {
        &self.good_names
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agent_names
    }

    pub fn good_index(&self, name: &str) -> Result<Good> {
        self.good_names
            .iter()
            .position(|g| g == name)
            .map(Good)
            .ok_or_else(|| Error::UnknownGood(name.to_string()))
    }

    pub fn agent_index(&self, name: &str) -> Result<Agent> {
        self.agent_names
            .iter()
            .position(|a| a == name)
            .map(|i| Agent(i + 1))
            .ok_or_else(|| Error::UnknownAgent(name.to_string()))
    }

    /// Total rank evaluations across all oracles (the τ proxy).
    pub fn total_oracle_calls(&self) -> u64 {
        self.oracles.iter().map(|o| o.calls()).sum()
    }

    /// Replaces the oracle of one agent (used by the randomized-priority
    /// mechanism to zero out invalid reports).
    pub fn replace_oracle(&mut self, agent: Agent, oracle: ValuationOracle) -> Result<()> {
        if agent.is_unassigned() || agent.0 > self.agent_count() {
            return Err(Error::UnknownAgent(format!("a{}", agent.0)));
        }
        self.oracles[agent.0 - 1] = oracle;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_builds_identity_priority() {
        let inst = Instance::simple(3, vec![ValuationOracle::uniform(1), ValuationOracle::uniform(2)]);
        assert_eq!(inst.good_count(), 3);
        assert_eq!(inst.agent_count(), 2);
        assert_eq!(inst.rank(Agent(1)), 1);
        assert_eq!(inst.rank(Agent(2)), 2);
        assert_eq!(inst.agent_name(Agent(2)), "a2");
        assert_eq!(inst.good_index("g3").unwrap(), Good(2));
    }

    #[test]
    fn rejects_bad_priority() {
        let oracles = vec![ValuationOracle::uniform(1), ValuationOracle::uniform(1)];
        let inst = Instance::simple(2, oracles);
        assert!(inst.with_priority(vec![1, 1]).is_err());
        assert!(inst.with_priority(vec![2, 3]).is_err());
        let flipped = inst.with_priority(vec![2, 1]).unwrap();
        assert_eq!(flipped.agents_by_rank(), vec![Agent(2), Agent(1)]);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(Instance::new(
            vec!["g".into(), "g".into()],
            vec!["a".into()],
            vec![ValuationOracle::uniform(1)],
            None
        )
        .is_err());
        assert!(Instance::new(vec![], vec![], vec![], None).is_err());
    }

    #[test]
    fn oracle_lookup_rejects_agent_zero() {
        let inst = Instance::simple(1, vec![ValuationOracle::uniform(1)]);
        assert!(inst.oracle(Agent::UNASSIGNED).is_err());
        assert!(inst.oracle(Agent(2)).is_err());
        assert!(inst.oracle(Agent(1)).is_ok());
    }
}
