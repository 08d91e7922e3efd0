//! Exchange graph over goods, gain sets, shortest transfer paths and their
//! execution.
//!
//! The graph has an edge `g → g'` when the owner of `g` can swap `g` for
//! `g'` without losing utility; goods in the unallocated pile can be swapped
//! for anything outside the pile. A transfer path for agent `i` is a shortest
//! path from a virtual source (whose edges point at the goods giving `i` a
//! marginal gain of 1) to the target agent's bundle; transferring each good
//! to the previous good's owner raises `i`'s utility by one, lowers the
//! terminal owner's by one, and leaves everyone else unchanged.

use std::collections::VecDeque;

use crate::allocation::{is_clean_quiet, Allocation};
use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::instance::Instance;

/// Exchange graph of one allocation. Adjacency lists are in ascending good
/// index order, so BFS tie-breaking is deterministic.
#[derive(Clone, Debug)]
pub struct ExchangeGraph {
    adj: Vec<Vec<Good>>,
    owner: Vec<Agent>,
}

impl ExchangeGraph {
    pub fn adjacency(&self, g: Good) -> &[Good] {
        &self.adj[g.0]
    }

    pub fn owner(&self, g: Good) -> Agent {
        self.owner[g.0]
    }

    pub fn good_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Edge list as `g -> g'` lines using the instance's good names.
    pub fn dump_edge_list(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for (g, targets) in self.adj.iter().enumerate() {
            for g2 in targets {
                out.push_str(inst.good_name(Good(g)));
                out.push_str(" -> ");
                out.push_str(inst.good_name(*g2));
                out.push('\n');
            }
        }
        out
    }
}

/// Shortest transfer path: `goods[0]` has marginal gain 1 for the initiator,
/// consecutive goods satisfy the exchange-edge relation, and the last good
/// belongs to the terminal owner. Each good appears at most once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferPath {
    pub initiator: Agent,
    pub goods: Vec<Good>,
}

/// `F_i(X)`: goods giving agent `i` a marginal gain of 1 on top of `X_i`.
/// Agent 0's gain set is every good outside the pile (binary additive
/// valuation over all goods).
pub fn gain_set(alloc: &Allocation, inst: &Instance, agent: Agent) -> Result<GoodSet> {
    let m = inst.good_count();
    if agent.is_unassigned() {
        let mut gains = GoodSet::empty(m);
        for g in alloc.unallocated().complement_iter() {
            gains.insert(g);
        }
        return Ok(gains);
    }
    let oracle = inst.oracle(agent)?;
    let bundle = alloc.bundle(agent);
    let base = oracle.value(bundle)?;
    let mut gains = GoodSet::empty(m);
    for g in bundle.complement_iter() {
        if oracle.value(&bundle.with(g))? == base + 1 {
            gains.insert(g);
        }
    }
    Ok(gains)
}

/// Builds the exchange graph by testing every ordered pair of goods.
/// Errors if the allocation is not clean.
pub fn build_exchange_graph(alloc: &Allocation, inst: &Instance) -> Result<ExchangeGraph> {
    ensure_clean(alloc, inst)?;
    let m = inst.good_count();
    let mut adj = vec![Vec::new(); m];
    for g in (0..m).map(Good) {
        let holder = alloc.owner(g);
        if holder.is_unassigned() {
            // Agent 0 swaps any pile good for any good outside the pile.
            adj[g.0] = alloc.unallocated().complement_iter().collect();
            continue;
        }
        let oracle = inst.oracle(holder)?;
        let bundle = alloc.bundle(holder);
        let swapped_base = bundle.without(g);
        // Clean allocation: v(X_j) = |X_j|, so the swap is neutral iff the
        // replacement restores full rank.
        let full_rank = bundle.len() as u64;
        for g2 in bundle.complement_iter() {
            if oracle.value(&swapped_base.with(g2))? == full_rank {
                adj[g.0].push(g2);
            }
        }
    }
    Ok(ExchangeGraph {
        adj,
        owner: (0..m).map(|g| alloc.owner(Good(g))).collect(),
    })
}

fn ensure_clean(alloc: &Allocation, inst: &Instance) -> Result<()> {
    for agent in inst.agents() {
        let bundle = alloc.bundle(agent);
        let value = inst.oracle(agent)?.value(bundle)?;
        if value != bundle.len() as u64 {
            return Err(Error::NotClean {
                agent: agent.0,
                value,
                size: bundle.len(),
            });
        }
    }
    Ok(())
}

/// Finds a shortest transfer path from `initiator` to `target`'s bundle, or
/// `None` when no exchange-graph path exists (equivalently, no transfer path
/// exists at all).
///
/// The graph is always constructed, and BFS visits goods in ascending index
/// order, so equal-length paths resolve deterministically.
pub fn find_transfer_path(
    alloc: &Allocation,
    inst: &Instance,
    initiator: Agent,
    target: Agent,
) -> Result<Option<TransferPath>> {
    if initiator == target {
        return Err(Error::Precondition(format!(
            "transfer path initiator a{} equals target",
            initiator.0
        )));
    }
    let graph = build_exchange_graph(alloc, inst)?;
    let sources = gain_set(alloc, inst, initiator)?;
    Ok(bfs_shortest_path(&graph, &sources, alloc.bundle(target))
        .map(|goods| TransferPath { initiator, goods }))
}

fn bfs_shortest_path(
    graph: &ExchangeGraph,
    sources: &GoodSet,
    targets: &GoodSet,
) -> Option<Vec<Good>> {
    let m = graph.good_count();
    let mut parent: Vec<Option<Good>> = vec![None; m];
    let mut visited = vec![false; m];
    let mut queue = VecDeque::new();
    for g in sources.iter() {
        visited[g.0] = true;
        queue.push_back(g);
    }
    while let Some(g) = queue.pop_front() {
        if targets.contains(g) {
            let mut path = vec![g];
            let mut cur = g;
            while let Some(prev) = parent[cur.0] {
                path.push(prev);
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        for &g2 in graph.adjacency(g) {
            if !visited[g2.0] {
                visited[g2.0] = true;
                parent[g2.0] = Some(g);
                queue.push_back(g2);
            }
        }
    }
    None
}

/// Executes a transfer path computed on exactly this allocation: good `k`
/// moves to the owner of good `k−1`, and the first good goes to the
/// initiator. Every edge is re-validated against the current allocation;
/// any mismatch means the path is stale and nothing is modified.
pub fn execute_path(alloc: &Allocation, inst: &Instance, path: &TransferPath) -> Result<Allocation> {
    if path.goods.is_empty() {
        return Err(Error::StalePath("empty path".into()));
    }
    if path.initiator.is_unassigned() || path.initiator.0 > inst.agent_count() {
        return Err(Error::UnknownAgent(format!("a{}", path.initiator.0)));
    }
    for (i, g) in path.goods.iter().enumerate() {
        if path.goods[..i].contains(g) {
            return Err(Error::StalePath(format!(
                "good {} appears twice",
                inst.good_name(*g)
            )));
        }
    }

    let first = path.goods[0];
    let initiator_bundle = alloc.bundle(path.initiator);
    let initiator_oracle = inst.oracle(path.initiator)?;
    if initiator_bundle.contains(first) {
        return Err(Error::StalePath(format!(
            "initiator already holds {}",
            inst.good_name(first)
        )));
    }
    if initiator_oracle.marginal(initiator_bundle, first)? != 1 {
        return Err(Error::StalePath(format!(
            "initiator gains nothing from {}",
            inst.good_name(first)
        )));
    }

    // Validate each exchange edge against the current state.
    let owners: Vec<Agent> = path.goods.iter().map(|&g| alloc.owner(g)).collect();
    for t in 0..path.goods.len() - 1 {
        let g = path.goods[t];
        let g2 = path.goods[t + 1];
        let holder = owners[t];
        let holder_bundle = alloc.bundle(holder);
        if holder_bundle.contains(g2) {
            return Err(Error::StalePath(format!(
                "edge {} -> {} points inside the holder's bundle",
                inst.good_name(g),
                inst.good_name(g2)
            )));
        }
        if !holder.is_unassigned() {
            let oracle = inst.oracle(holder)?;
            let before = oracle.value(holder_bundle)?;
            let after = oracle.value(&holder_bundle.without(g).with(g2))?;
            if before != after {
                return Err(Error::StalePath(format!(
                    "swap {} -> {} is no longer neutral for a{}",
                    inst.good_name(g),
                    inst.good_name(g2),
                    holder.0
                )));
            }
        }
    }

    // All transfers are determined by the owners at path-computation time.
    let mut next = alloc.clone();
    next.transfer(first, path.initiator);
    for t in 0..path.goods.len() - 1 {
        next.transfer(path.goods[t + 1], owners[t]);
    }

    #[cfg(debug_assertions)]
    {
        let terminal = *owners.last().expect("non-empty path");
        debug_assert!(next.is_partition());
        debug_assert!(is_clean_quiet(&next, inst)?, "execution left a dirty bundle");
        for agent in inst.agents() {
            let before = inst.oracle(agent)?.value_quiet(alloc.bundle(agent))? as i64;
            let after = inst.oracle(agent)?.value_quiet(next.bundle(agent))? as i64;
            let expected = i64::from(agent == path.initiator) - i64::from(agent == terminal);
            debug_assert_eq!(after - before, expected, "utility delta for a{}", agent.0);
        }
    }

    Ok(next)
}
