//! Allocations: partitions of the goods into per-agent bundles plus the
//! unallocated pile held by agent 0.

use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::instance::Instance;
use crate::order::{AugmentedUtility, NswValue, SortedUtilityVector};

/// Partition `(X_0, X_1, …, X_n)` of the goods. `bundles[0]` is the
/// unallocated pile; the owner map is kept consistent with the bundles by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<GoodSet>,
    owner: Vec<Agent>,
}

impl Allocation {
    /// The all-unallocated starting allocation: `X_0 = G`, `X_i = ∅`.
    /// Clean by construction since `v_i(∅) = 0`.
    pub fn empty(inst: &Instance) -> Allocation {
        let m = inst.good_count();
        let mut bundles = vec![GoodSet::empty(m); inst.agent_count() + 1];
        bundles[0] = GoodSet::full(m);
        Allocation {
            bundles,
            owner: vec![Agent::UNASSIGNED; m],
        }
    }

    /// Builds an allocation from explicit bundles for agents `1..=n`; all
    /// remaining goods go to the pile. Errors if a good appears twice.
    pub fn from_agent_bundles(inst: &Instance, agent_bundles: &[GoodSet]) -> Result<Allocation> {
        if agent_bundles.len() != inst.agent_count() {
            return Err(Error::NotAPartition(format!(
                "expected {} bundles, got {}",
                inst.agent_count(),
                agent_bundles.len()
            )));
        }
        let mut alloc = Allocation::empty(inst);
        for (idx, bundle) in agent_bundles.iter().enumerate() {
            let agent = Agent(idx + 1);
            for g in bundle.iter() {
                if g.0 >= inst.good_count() {
                    return Err(Error::UnknownGood(format!("g{}", g.0)));
                }
                if !alloc.owner(g).is_unassigned() {
                    return Err(Error::NotAPartition(format!(
                        "good {} assigned to two agents",
                        inst.good_name(g)
                    )));
                }
                alloc.transfer(g, agent);
            }
        }
        Ok(alloc)
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len() - 1
    }

    pub fn good_count(&self) -> usize {
        self.owner.len()
    }

    pub fn bundle(&self, a: Agent) -> &GoodSet {
        &self.bundles[a.0]
    }

    pub fn unallocated(&self) -> &GoodSet {
        &self.bundles[0]
    }

    pub fn owner(&self, g: Good) -> Agent {
        self.owner[g.0]
    }

    /// Moves one good to `to`, keeping bundles and owner map consistent.
    pub fn transfer(&mut self, g: Good, to: Agent) {
        let from = self.owner[g.0];
        if from == to {
            return;
        }
        self.bundles[from.0].remove(g);
        self.bundles[to.0].insert(g);
        self.owner[g.0] = to;
    }

    /// Bundle sizes indexed `0..=n` (index 0 = unallocated pile).
    pub fn bundle_sizes(&self) -> Vec<usize> {
        self.bundles.iter().map(|b| b.len()).collect()
    }

    /// Checks the partition invariant directly from both representations.
    pub fn is_partition(&self) -> bool {
        let mut seen = 0usize;
        for (idx, bundle) in self.bundles.iter().enumerate() {
            for g in bundle.iter() {
                if self.owner[g.0] != Agent(idx) {
                    return false;
                }
                seen += 1;
            }
        }
        seen == self.owner.len()
    }
}

/// True iff `v_i(X_i) = |X_i|` for every real agent (agent 0 is always clean
/// under its cardinality valuation).
pub fn is_clean(alloc: &Allocation, inst: &Instance) -> Result<bool> {
    for agent in inst.agents() {
        let bundle = alloc.bundle(agent);
        if inst.oracle(agent)?.value(bundle)? != bundle.len() as u64 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cleanness check that bypasses the oracle call counters; used by debug
/// assertions so they do not distort measured τ.
pub(crate) fn is_clean_quiet(alloc: &Allocation, inst: &Instance) -> Result<bool> {
    for agent in inst.agents() {
        let bundle = alloc.bundle(agent);
        if inst.oracle(agent)?.value_quiet(bundle)? != bundle.len() as u64 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-agent utilities `v_i(X_i)` in agent index order (length n).
pub fn utility_vector(alloc: &Allocation, inst: &Instance) -> Result<Vec<u64>> {
    inst.agents()
        .map(|a| inst.oracle(a)?.value(alloc.bundle(a)))
        .collect()
}

/// Plain sorted utility vector.
pub fn sorted_utility_vector(alloc: &Allocation, inst: &Instance) -> Result<SortedUtilityVector<u64>> {
    Ok(SortedUtilityVector::from_unsorted(utility_vector(alloc, inst)?))
}

/// Sorted vector of priority-augmented utilities `n²·v_i(X_i) + π(i)`.
pub fn sorted_augmented_vector(
    alloc: &Allocation,
    inst: &Instance,
) -> Result<SortedUtilityVector<AugmentedUtility>> {
    let n = inst.agent_count();
    let entries = inst
        .agents()
        .map(|a| {
            let v = inst.oracle(a)?.value(alloc.bundle(a))?;
            Ok(AugmentedUtility::new(v, inst.rank(a), n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SortedUtilityVector::from_unsorted(entries))
}

/// Utilitarian social welfare `Σ v_i(X_i)`.
pub fn usw(alloc: &Allocation, inst: &Instance) -> Result<u64> {
    Ok(utility_vector(alloc, inst)?.iter().sum())
}

/// Nash social welfare under the zero-minimizing convention.
pub fn nsw(alloc: &Allocation, inst: &Instance) -> Result<NswValue> {
    Ok(NswValue::from_utilities(&utility_vector(alloc, inst)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::ValuationOracle;

    fn two_agent_instance() -> Instance {
        // Both agents value any set at its size (uniform cap >= m).
        Instance::simple(3, vec![ValuationOracle::uniform(3), ValuationOracle::uniform(3)])
    }

    #[test]
    fn empty_allocation_puts_everything_in_the_pile() {
        let inst = two_agent_instance();
        let alloc = Allocation::empty(&inst);
        assert_eq!(alloc.unallocated().len(), 3);
        assert!(alloc.bundle(Agent(1)).is_empty());
        assert!(alloc.bundle(Agent(2)).is_empty());
        assert!(is_clean(&alloc, &inst).unwrap());
        assert!(alloc.is_partition());
    }

    #[test]
    fn empty_instance_has_all_empty_bundles() {
        let inst = Instance::simple(0, vec![ValuationOracle::uniform(1)]);
        let alloc = Allocation::empty(&inst);
        assert!(alloc.unallocated().is_empty());
        assert!(is_clean(&alloc, &inst).unwrap());
        assert_eq!(utility_vector(&alloc, &inst).unwrap(), vec![0]);
    }

    #[test]
    fn overfull_bundle_is_not_clean() {
        let inst = Instance::simple(2, vec![ValuationOracle::uniform(1)]);
        let mut alloc = Allocation::empty(&inst);
        alloc.transfer(Good(0), Agent(1));
        assert!(is_clean(&alloc, &inst).unwrap());
        alloc.transfer(Good(1), Agent(1));
        // rank min(2,1)=1 but bundle size 2
        assert!(!is_clean(&alloc, &inst).unwrap());
    }

    #[test]
    fn utility_vectors_plain_and_augmented() {
        let inst = two_agent_instance();
        let mut alloc = Allocation::empty(&inst);
        alloc.transfer(Good(0), Agent(1));
        alloc.transfer(Good(1), Agent(2));
        alloc.transfer(Good(2), Agent(2));
        assert_eq!(utility_vector(&alloc, &inst).unwrap(), vec![1, 2]);
        let plain = sorted_utility_vector(&alloc, &inst).unwrap();
        assert_eq!(plain.entries(), &[1, 2]);
        // n² = 4: scaled entries 4·1+1 = 5 and 4·2+2 = 10.
        let augmented = sorted_augmented_vector(&alloc, &inst).unwrap();
        assert_eq!(augmented.scaled_entries(), vec![5, 10]);
        assert_eq!(usw(&alloc, &inst).unwrap(), 3);
    }

    #[test]
    fn transfers_preserve_partition() {
        let inst = two_agent_instance();
        let mut alloc = Allocation::empty(&inst);
        for (g, a) in [(0, 1), (1, 2), (2, 1), (1, 1), (0, 0)] {
            alloc.transfer(Good(g), Agent(a));
            assert!(alloc.is_partition());
        }
        assert_eq!(alloc.owner(Good(0)), Agent::UNASSIGNED);
        assert_eq!(alloc.owner(Good(1)), Agent(1));
    }

    #[test]
    fn from_agent_bundles_validates() {
        let inst = two_agent_instance();
        let b1 = GoodSet::from_goods(3, [Good(0)]);
        let b2 = GoodSet::from_goods(3, [Good(0)]);
        assert!(Allocation::from_agent_bundles(&inst, &[b1.clone(), b2]).is_err());
        let alloc = Allocation::from_agent_bundles(&inst, &[b1, GoodSet::empty(3)]).unwrap();
        assert_eq!(alloc.unallocated().len(), 2);
        assert!(alloc.is_partition());
    }
}
