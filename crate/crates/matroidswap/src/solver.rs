//! The Yankee Swap loop: repeatedly let the least-utility, highest-priority
//! active agent claim a good through a transfer path into the unallocated
//! pile, or retire the agent when no path exists.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::allocation::{is_clean_quiet, Allocation};
use crate::error::{Error, Result};
use crate::exchange::{execute_path, find_transfer_path};
use crate::goods::{Agent, Good};
use crate::instance::Instance;

/// One loop iteration: who was selected, the bundle sizes entering the
/// iteration (index 0 = unallocated pile), the path taken if any, and how
/// many rank evaluations the iteration cost.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub selected: Agent,
    pub sizes_before: Vec<usize>,
    pub path: Option<Vec<Good>>,
    pub oracle_calls: u64,
}

/// Full execution trace of one solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveTrace {
    pub iterations: Vec<IterationRecord>,
    /// Agents in the order they were retired from the active set.
    pub removal_order: Vec<Agent>,
}

impl SolveTrace {
    pub fn total_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// Per-solve graph constructions; one exchange graph is built per
    /// iteration, so this equals the iteration count.
    pub fn graph_builds(&self) -> usize {
        self.iterations.len()
    }

    pub fn total_oracle_calls(&self) -> u64 {
        self.iterations.iter().map(|r| r.oracle_calls).sum()
    }
}

/// Picks from the active set the agent minimizing `(|X_i|, π(i))`
/// lexicographically — equivalently, the agent with the least
/// priority-augmented utility (the two orders agree on clean allocations).
pub fn select_agent(active: &BTreeSet<Agent>, alloc: &Allocation, inst: &Instance) -> Result<Agent> {
    active
        .iter()
        .copied()
        .min_by_key(|&a| (alloc.bundle(a).len(), inst.rank(a)))
        .ok_or_else(|| Error::Precondition("active agent set is empty".into()))
}

/// Runs Yankee Swap to completion and returns the final allocation with its
/// trace. Deterministic for a fixed instance: agent selection, adjacency
/// order and BFS tie-breaking are all fixed.
///
/// Oracles are assumed to be matroid rank functions; callers wanting a
/// guarantee should run `check_mrf` first.
pub fn yankee_swap(inst: &Instance) -> Result<(Allocation, SolveTrace)> {
    let mut alloc = Allocation::empty(inst);
    let mut active: BTreeSet<Agent> = inst.agents().collect();
    let mut trace = SolveTrace {
        iterations: Vec::new(),
        removal_order: Vec::new(),
    };
    let iteration_bound = inst.agent_count() + inst.good_count();

    while !active.is_empty() {
        let selected = select_agent(&active, &alloc, inst)?;
        let sizes_before = alloc.bundle_sizes();
        let calls_before = inst.total_oracle_calls();
        let path = find_transfer_path(&alloc, inst, selected, Agent::UNASSIGNED)?;
        match &path {
            Some(p) => {
                alloc = execute_path(&alloc, inst, p)?;
            }
            None => {
                active.remove(&selected);
                trace.removal_order.push(selected);
            }
        }
        trace.iterations.push(IterationRecord {
            selected,
            sizes_before,
            path: path.map(|p| p.goods),
            oracle_calls: inst.total_oracle_calls() - calls_before,
        });
        debug_assert!(is_clean_quiet(&alloc, inst)?, "iteration left a dirty allocation");
        // Each iteration either shrinks the pile or retires an agent, so the
        // loop runs at most n + m times.
        assert!(
            trace.total_iterations() <= iteration_bound,
            "iteration bound n + m = {iteration_bound} exceeded"
        );
    }
    Ok((alloc, trace))
}
