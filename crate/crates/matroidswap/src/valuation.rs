//! Matroid rank function oracles.
//!
//! Each oracle family is an MRF by construction: binary additive ranks over a
//! desired set, uniform caps, partition matroids with an optional global
//! truncation, transversal matroids (maximum bipartite matching into slots),
//! graphic matroids (spanning forests), and explicit lookup tables. Explicit
//! tables are the one family that can encode a non-MRF; [`check_mrf`] decides
//! validity and the randomized-priority mechanism zeroes invalid reports.

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::instance::Instance;
use crate::order::AugmentedUtility;

/// Largest good count an explicit table may cover (bitmask width).
pub const EXPLICIT_TABLE_MAX_GOODS: usize = 16;

#[derive(Clone, Debug)]
pub enum OracleKind {
    /// `v(S) = |S ∩ desired|`.
    BinaryAdditive { desired: GoodSet },
    /// `v(S) = min(|S|, cap)`.
    Uniform { cap: u64 },
    /// `v(S) = min(Σ_j min(|S ∩ P_j|, cap_j), global_cap)`.
    Partition {
        parts: Vec<(GoodSet, u64)>,
        global_cap: Option<u64>,
    },
    /// Maximum matching between the goods of `S` and slot ids.
    Transversal {
        adjacency: Vec<Vec<u32>>,
        slot_count: u32,
    },
    /// `|S|` minus the number of cycle-closing goods, where each good is an
    /// edge between two vertices.
    Graphic {
        endpoints: Vec<(u32, u32)>,
        vertex_count: u32,
    },
    /// Direct lookup of `v(S)` by subset bitmask.
    Explicit {
        good_count: usize,
        table: Vec<Option<u64>>,
    },
}

/// Rank oracle plus a monotone evaluation counter (the measured proxy for the
/// per-call cost `τ`).
#[derive(Debug)]
pub struct ValuationOracle {
    kind: OracleKind,
    calls: AtomicU64,
}

impl Clone for ValuationOracle {
    fn clone(&self) -> Self {
        ValuationOracle {
            kind: self.kind.clone(),
            calls: AtomicU64::new(self.calls.load(AtomicOrdering::Relaxed)),
        }
    }
}

impl ValuationOracle {
    fn new(kind: OracleKind) -> Self {
        ValuationOracle {
            kind,
            calls: AtomicU64::new(0),
        }
    }

    pub fn binary_additive(desired: GoodSet) -> Self {
        Self::new(OracleKind::BinaryAdditive { desired })
    }

    pub fn uniform(cap: u64) -> Self {
        Self::new(OracleKind::Uniform { cap })
    }

    pub fn partition(parts: Vec<(GoodSet, u64)>, global_cap: Option<u64>) -> Result<Self> {
        for (i, (a, _)) in parts.iter().enumerate() {
            for (b, _) in parts.iter().skip(i + 1) {
                if !a.is_disjoint(b) {
                    return Err(Error::OverlappingParts);
                }
            }
        }
        Ok(Self::new(OracleKind::Partition { parts, global_cap }))
    }

    /// `adjacency[g]` lists the slot ids good `g` may occupy.
    pub fn transversal(mut adjacency: Vec<Vec<u32>>) -> Self {
        let mut slot_count = 0;
        for slots in &mut adjacency {
            slots.sort_unstable();
            slots.dedup();
            if let Some(&max) = slots.last() {
                slot_count = slot_count.max(max + 1);
            }
        }
        Self::new(OracleKind::Transversal {
            adjacency,
            slot_count,
        })
    }

    /// `endpoints[g]` is the vertex pair good `g` connects.
    pub fn graphic(endpoints: Vec<(u32, u32)>) -> Self {
        let vertex_count = endpoints
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0);
        Self::new(OracleKind::Graphic {
            endpoints,
            vertex_count,
        })
    }

    /// Builds an explicit table oracle over `good_count` goods from
    /// `(mask, value)` entries. The table may be partial; evaluating a
    /// missing subset is an error. MRF validity is deliberately NOT enforced
    /// here — use [`check_mrf`].
    pub fn explicit<I>(good_count: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        if good_count > EXPLICIT_TABLE_MAX_GOODS {
            return Err(Error::ExplicitTooLarge {
                max: EXPLICIT_TABLE_MAX_GOODS,
                got: good_count,
            });
        }
        let mut table = vec![None; 1usize << good_count];
        for (mask, value) in entries {
            if mask >= (1u64 << good_count) {
                return Err(Error::UnknownGood(format!("subset mask {mask:#b}")));
            }
            if table[mask as usize].replace(value).is_some() {
                return Err(Error::Precondition(format!(
                    "duplicate explicit table entry for mask {mask:#b}"
                )));
            }
        }
        Ok(Self::new(OracleKind::Explicit { good_count, table }))
    }

    /// The identically-zero valuation (used when the randomized-priority
    /// mechanism discards a non-MRF report).
    pub fn zeroed(good_count: usize) -> Self {
        Self::binary_additive(GoodSet::empty(good_count))
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    /// Number of rank evaluations performed so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(AtomicOrdering::Relaxed)
    }

    /// Universe size the oracle is pinned to, when the family implies one.
    fn expected_universe(&self) -> Option<usize> {
        match &self.kind {
            OracleKind::BinaryAdditive { desired } => Some(desired.universe()),
            OracleKind::Uniform { .. } => None,
            OracleKind::Partition { parts, .. } => parts.first().map(|(s, _)| s.universe()),
            OracleKind::Transversal { adjacency, .. } => Some(adjacency.len()),
            OracleKind::Graphic { endpoints, .. } => Some(endpoints.len()),
            OracleKind::Explicit { good_count, .. } => Some(*good_count),
        }
    }

    /// Rank of `S`. Increments the call counter.
    pub fn value(&self, s: &GoodSet) -> Result<u64> {
        self.calls.fetch_add(1, AtomicOrdering::Relaxed);
        self.eval(s)
    }

    /// Rank of `S` without touching the call counter. For internal debug
    /// assertions only, so they do not distort measured oracle-call counts.
    pub(crate) fn value_quiet(&self, s: &GoodSet) -> Result<u64> {
        self.eval(s)
    }

    fn eval(&self, s: &GoodSet) -> Result<u64> {
        if let Some(expected) = self.expected_universe() {
            if s.universe() != expected {
                return Err(Error::UniverseMismatch {
                    expected,
                    got: s.universe(),
                });
            }
        }
        match &self.kind {
            OracleKind::BinaryAdditive { desired } => Ok(desired.intersection_len(s) as u64),
            OracleKind::Uniform { cap } => Ok((s.len() as u64).min(*cap)),
            OracleKind::Partition { parts, global_cap } => {
                let sum: u64 = parts
                    .iter()
                    .map(|(part, cap)| (part.intersection_len(s) as u64).min(*cap))
                    .sum();
                Ok(global_cap.map_or(sum, |g| sum.min(g)))
            }
            OracleKind::Transversal {
                adjacency,
                slot_count,
            } => Ok(max_matching_size(adjacency, *slot_count, s)),
            OracleKind::Graphic {
                endpoints,
                vertex_count,
            } => {
                let mut forest = UnionFind::new(*vertex_count as usize);
                let mut rank = 0;
                for g in s.iter() {
                    let (u, v) = endpoints[g.0];
                    if forest.union(u as usize, v as usize) {
                        rank += 1;
                    }
                }
                Ok(rank)
            }
            OracleKind::Explicit { table, .. } => {
                let mask = s.low_mask();
                table[mask as usize].ok_or(Error::MissingSubset(mask))
            }
        }
    }

    /// Marginal gain `v(S + g) − v(S)`. In `{0, 1}` for every valid MRF;
    /// explicit tables may return other values (check_mrf flags them).
    ///
    /// Errors if `g ∈ S`.
    pub fn marginal(&self, s: &GoodSet, g: Good) -> Result<i64> {
        if s.contains(g) {
            return Err(Error::GoodAlreadyHeld(g.0));
        }
        let with = self.value(&s.with(g))?;
        let without = self.value(s)?;
        Ok(with as i64 - without as i64)
    }
}

/// Kuhn's augmenting-path maximum matching between the goods of `S`
/// (processed ascending) and slot ids.
fn max_matching_size(adjacency: &[Vec<u32>], slot_count: u32, s: &GoodSet) -> u64 {
    let mut slot_owner: Vec<Option<usize>> = vec![None; slot_count as usize];
    let mut matched = 0;
    let mut visited = vec![false; slot_count as usize];
    for g in s.iter() {
        visited.fill(false);
        if try_assign(adjacency, g.0, &mut slot_owner, &mut visited) {
            matched += 1;
        }
    }
    matched
}

fn try_assign(
    adjacency: &[Vec<u32>],
    good: usize,
    slot_owner: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &slot in &adjacency[good] {
        let slot = slot as usize;
        if visited[slot] {
            continue;
        }
        visited[slot] = true;
        let free = match slot_owner[slot] {
            None => true,
            Some(displaced) => try_assign(adjacency, displaced, slot_owner, visited),
        };
        if free {
            slot_owner[slot] = Some(good);
            return true;
        }
    }
    false
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        // path compression
        let mut cur = x;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Returns false when x and y were already connected (a cycle edge).
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.parent[ry] = rx as u32;
        true
    }
}

/// Priority-augmented value `n² · v_i(S) + π(i)` for agent `i`.
pub fn augmented_value(inst: &Instance, agent: Agent, s: &GoodSet) -> Result<AugmentedUtility> {
    let v = inst.oracle(agent)?.value(s)?;
    Ok(AugmentedUtility::new(v, inst.rank(agent), inst.agent_count()))
}

/// How thoroughly [`check_mrf`] explores the subset lattice.
#[derive(Clone, Copy, Debug)]
pub enum MrfCheckMode {
    /// Every `(S ⊆ T, g ∉ T)` triple. Requires `m <= 16`.
    Exhaustive,
    /// Random triples from a seeded generator.
    Sampled { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub enum MrfViolation {
    EmptySetNonZero {
        value: u64,
    },
    NonBinaryGain {
        set: Vec<usize>,
        good: usize,
        gain: i64,
    },
    NotSubmodular {
        small: Vec<usize>,
        large: Vec<usize>,
        good: usize,
        gain_small: i64,
        gain_large: i64,
    },
    EvalFailed {
        detail: String,
    },
}

impl std::fmt::Display for MrfViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MrfViolation::EmptySetNonZero { value } => write!(f, "v(∅) = {value}, expected 0"),
            MrfViolation::NonBinaryGain { set, good, gain } => {
                write!(f, "gain of {gain} adding g{good} to {set:?}")
            }
            MrfViolation::NotSubmodular {
                small,
                large,
                good,
                gain_small,
                gain_large,
            } => write!(
                f,
                "gain of g{good} rises from {gain_small} on {small:?} to {gain_large} on {large:?}"
            ),
            MrfViolation::EvalFailed { detail } => write!(f, "evaluation failed: {detail}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MrfReport {
    pub valid: bool,
    pub first_violation: Option<MrfViolation>,
    pub checks_performed: u64,
}

impl MrfReport {
    fn ok(checks: u64) -> Self {
        MrfReport {
            valid: true,
            first_violation: None,
            checks_performed: checks,
        }
    }

    fn bad(checks: u64, violation: MrfViolation) -> Self {
        MrfReport {
            valid: false,
            first_violation: Some(violation),
            checks_performed: checks,
        }
    }
}

fn mask_goods(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask & (1 << b) != 0).collect()
}

/// Verifies the MRF axioms: `v(∅) = 0`, marginal gains in `{0, 1}`, and
/// submodularity `Δ(S, g) >= Δ(T, g)` for `S ⊆ T`, `g ∉ T`.
///
/// Violations are report content, not errors; the only error is requesting
/// the exhaustive mode beyond 16 goods.
pub fn check_mrf(oracle: &ValuationOracle, good_count: usize, mode: MrfCheckMode) -> Result<MrfReport> {
    match mode {
        MrfCheckMode::Exhaustive => {
            if good_count > EXPLICIT_TABLE_MAX_GOODS {
                return Err(Error::GuardExceeded(format!(
                    "exhaustive MRF check supports at most {EXPLICIT_TABLE_MAX_GOODS} goods, got {good_count}"
                )));
            }
            Ok(check_mrf_exhaustive(oracle, good_count))
        }
        MrfCheckMode::Sampled { trials, seed } => Ok(check_mrf_sampled(oracle, good_count, trials, seed)),
    }
}

fn check_mrf_exhaustive(oracle: &ValuationOracle, m: usize) -> MrfReport {
    let size = 1usize << m;
    let mut values = Vec::with_capacity(size);
    let mut checks = 0u64;
    for mask in 0..size as u64 {
        match oracle.value(&GoodSet::from_mask(m, mask)) {
            Ok(v) => values.push(v as i64),
            Err(e) => {
                return MrfReport::bad(
                    checks,
                    MrfViolation::EvalFailed {
                        detail: format!("subset {:?}: {e}", mask_goods(mask)),
                    },
                )
            }
        }
        checks += 1;
    }
    if values[0] != 0 {
        return MrfReport::bad(checks, MrfViolation::EmptySetNonZero { value: values[0] as u64 });
    }
    // Binary marginal gains on every subset.
    for mask in 0..size as u64 {
        for g in 0..m {
            if mask & (1 << g) != 0 {
                continue;
            }
            let gain = values[(mask | (1 << g)) as usize] - values[mask as usize];
            checks += 1;
            if gain != 0 && gain != 1 {
                return MrfReport::bad(
                    checks,
                    MrfViolation::NonBinaryGain {
                        set: mask_goods(mask),
                        good: g,
                        gain,
                    },
                );
            }
        }
    }
    // Submodularity over every S ⊆ T and g ∉ T.
    for t in 0..size as u64 {
        for g in 0..m {
            if t & (1 << g) != 0 {
                continue;
            }
            let bit = 1u64 << g;
            let gain_t = values[(t | bit) as usize] - values[t as usize];
            // Proper submasks of t, plus the empty set; S = T is trivial.
            let mut s = (t.wrapping_sub(1)) & t;
            loop {
                let gain_s = values[(s | bit) as usize] - values[s as usize];
                checks += 1;
                if gain_s < gain_t {
                    return MrfReport::bad(
                        checks,
                        MrfViolation::NotSubmodular {
                            small: mask_goods(s),
                            large: mask_goods(t),
                            good: g,
                            gain_small: gain_s,
                            gain_large: gain_t,
                        },
                    );
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
    }
    MrfReport::ok(checks)
}

fn check_mrf_sampled(oracle: &ValuationOracle, m: usize, trials: u64, seed: u64) -> MrfReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0u64;
    let eval = |set: &GoodSet, checks: &mut u64| -> std::result::Result<i64, MrfViolation> {
        *checks += 1;
        oracle.value(set).map(|v| v as i64).map_err(|e| MrfViolation::EvalFailed {
            detail: format!("subset {:?}: {e}", set.iter().map(|g| g.0).collect::<Vec<_>>()),
        })
    };
    macro_rules! try_eval {
        ($set:expr) => {
            match eval($set, &mut checks) {
                Ok(v) => v,
                Err(violation) => return MrfReport::bad(checks, violation),
            }
        };
    }
    let empty_value = try_eval!(&GoodSet::empty(m));
    if empty_value != 0 {
        return MrfReport::bad(checks, MrfViolation::EmptySetNonZero { value: empty_value as u64 });
    }
    for _ in 0..trials {
        if m == 0 {
            break;
        }
        let mut large = GoodSet::empty(m);
        let mut small = GoodSet::empty(m);
        for g in 0..m {
            if rng.gen::<bool>() {
                large.insert(Good(g));
                if rng.gen::<bool>() {
                    small.insert(Good(g));
                }
            }
        }
        let outside: Vec<Good> = large.complement_iter().collect();
        if outside.is_empty() {
            continue;
        }
        let g = outside[rng.gen_range(0..outside.len())];
        let v_small = try_eval!(&small);
        let v_small_g = try_eval!(&small.with(g));
        let v_large = try_eval!(&large);
        let v_large_g = try_eval!(&large.with(g));
        let gain_small = v_small_g - v_small;
        let gain_large = v_large_g - v_large;
        let witness_goods = |s: &GoodSet| s.iter().map(|g| g.0).collect::<Vec<_>>();
        for (set, gain) in [(&small, gain_small), (&large, gain_large)] {
            if gain != 0 && gain != 1 {
                return MrfReport::bad(
                    checks,
                    MrfViolation::NonBinaryGain {
                        set: witness_goods(set),
                        good: g.0,
                        gain,
                    },
                );
            }
        }
        if gain_small < gain_large {
            return MrfReport::bad(
                checks,
                MrfViolation::NotSubmodular {
                    small: witness_goods(&small),
                    large: witness_goods(&large),
                    good: g.0,
                    gain_small,
                    gain_large,
                },
            );
        }
    }
    MrfReport::ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: usize, goods: &[usize]) -> GoodSet {
        GoodSet::from_goods(m, goods.iter().map(|&g| Good(g)))
    }

    #[test]
    fn uniform_caps_cardinality() {
        let oracle = ValuationOracle::uniform(2);
        assert_eq!(oracle.value(&set(5, &[0, 1, 2, 3, 4])).unwrap(), 2);
        assert_eq!(oracle.value(&set(5, &[0])).unwrap(), 1);
        assert_eq!(oracle.value(&GoodSet::empty(5)).unwrap(), 0);
    }

    #[test]
    fn partition_sums_capped_parts() {
        let oracle =
            ValuationOracle::partition(vec![(set(3, &[0, 1]), 1), (set(3, &[2]), 1)], None).unwrap();
        assert_eq!(oracle.value(&set(3, &[0, 1, 2])).unwrap(), 2);
        // Cross-check every subset against the defining formula computed
        // directly in this test.
        for mask in 0u64..8 {
            let s = GoodSet::from_mask(3, mask);
            let direct = {
                let in_part1 = [0, 1].iter().filter(|&&g| s.contains(Good(g))).count() as u64;
                let in_part2 = usize::from(s.contains(Good(2))) as u64;
                in_part1.min(1) + in_part2.min(1)
            };
            assert_eq!(oracle.value(&s).unwrap(), direct, "mask {mask:#b}");
        }
    }

    #[test]
    fn partition_global_cap_truncates() {
        let oracle = ValuationOracle::partition(
            vec![(set(4, &[0, 1]), 2), (set(4, &[2, 3]), 2)],
            Some(3),
        )
        .unwrap();
        assert_eq!(oracle.value(&set(4, &[0, 1, 2, 3])).unwrap(), 3);
    }

    #[test]
    fn overlapping_parts_rejected() {
        let err = ValuationOracle::partition(vec![(set(3, &[0, 1]), 1), (set(3, &[1]), 1)], None);
        assert!(matches!(err, Err(Error::OverlappingParts)));
    }

    #[test]
    fn transversal_single_slot() {
        // Both goods compete for the same slot: rank 1. Verified against the
        // definition by enumerating assignments: neither injective map of two
        // goods into one slot exists.
        let oracle = ValuationOracle::transversal(vec![vec![0], vec![0]]);
        assert_eq!(oracle.value(&set(2, &[0, 1])).unwrap(), 1);
        assert_eq!(oracle.value(&set(2, &[0])).unwrap(), 1);
    }

    #[test]
    fn marginal_examples() {
        let uniform = ValuationOracle::uniform(1);
        assert_eq!(uniform.marginal(&set(3, &[0]), Good(1)).unwrap(), 0);

        let additive = ValuationOracle::binary_additive(set(3, &[0]));
        assert_eq!(additive.marginal(&GoodSet::empty(3), Good(0)).unwrap(), 1);
        assert_eq!(additive.marginal(&GoodSet::empty(3), Good(1)).unwrap(), 0);

        // Triangle: third edge closes a cycle.
        let graphic = ValuationOracle::graphic(vec![(0, 1), (1, 2), (0, 2)]);
        assert_eq!(graphic.marginal(&set(3, &[0, 1]), Good(2)).unwrap(), 0);
        assert_eq!(graphic.marginal(&set(3, &[0]), Good(1)).unwrap(), 1);
    }

    #[test]
    fn marginal_on_held_good_is_error() {
        let oracle = ValuationOracle::uniform(5);
        assert!(matches!(
            oracle.marginal(&set(3, &[1]), Good(1)),
            Err(Error::GoodAlreadyHeld(1))
        ));
    }

    #[test]
    fn explicit_missing_subset_errors() {
        let oracle = ValuationOracle::explicit(2, [(0b00u64, 0u64), (0b01, 1)]).unwrap();
        assert_eq!(oracle.value(&set(2, &[0])).unwrap(), 1);
        assert!(matches!(
            oracle.value(&set(2, &[1])),
            Err(Error::MissingSubset(0b10))
        ));
    }

    #[test]
    fn explicit_size_cap() {
        assert!(matches!(
            ValuationOracle::explicit(17, []),
            Err(Error::ExplicitTooLarge { .. })
        ));
    }

    #[test]
    fn call_counter_increases() {
        let oracle = ValuationOracle::uniform(1);
        assert_eq!(oracle.calls(), 0);
        oracle.value(&GoodSet::empty(2)).unwrap();
        assert_eq!(oracle.calls(), 1);
        oracle.marginal(&GoodSet::empty(2), Good(0)).unwrap();
        assert_eq!(oracle.calls(), 3);
    }

    #[test]
    fn check_mrf_accepts_uniform() {
        let oracle = ValuationOracle::uniform(3);
        let report = check_mrf(&oracle, 5, MrfCheckMode::Exhaustive).unwrap();
        assert!(report.valid, "{:?}", report.first_violation);
    }

    #[test]
    fn check_mrf_flags_non_binary_gain() {
        // v({g0}) = 0 but v({g0,g1}) = 2: adding g1 gains 2.
        let oracle = ValuationOracle::explicit(
            2,
            [(0b00u64, 0u64), (0b01, 0), (0b10, 0), (0b11, 2)],
        )
        .unwrap();
        let report = check_mrf(&oracle, 2, MrfCheckMode::Exhaustive).unwrap();
        assert!(!report.valid);
        assert!(matches!(
            report.first_violation,
            Some(MrfViolation::NonBinaryGain { gain: 2, .. })
        ));
    }

    #[test]
    fn check_mrf_flags_supermodular_table() {
        // Gains 0 then 1 as the context grows: submodularity violated while
        // every single gain stays binary.
        let oracle = ValuationOracle::explicit(
            2,
            [(0b00u64, 0u64), (0b01, 0), (0b10, 0), (0b11, 1)],
        )
        .unwrap();
        let report = check_mrf(&oracle, 2, MrfCheckMode::Exhaustive).unwrap();
        assert!(!report.valid);
        assert!(matches!(
            report.first_violation,
            Some(MrfViolation::NotSubmodular { .. })
        ));
        let sampled = check_mrf(&oracle, 2, MrfCheckMode::Sampled { trials: 500, seed: 1 }).unwrap();
        assert!(!sampled.valid);
    }

    #[test]
    fn check_mrf_exhaustive_guard() {
        let oracle = ValuationOracle::uniform(1);
        assert!(check_mrf(&oracle, 17, MrfCheckMode::Exhaustive).is_err());
        assert!(check_mrf(&oracle, 17, MrfCheckMode::Sampled { trials: 50, seed: 0 })
            .unwrap()
            .valid);
    }

    /// Definitional transversal rank: best over all ways to assign a subset
    /// of S to distinct slots, explored by plain enumeration (independent of
    /// the Kuhn implementation).
    fn transversal_rank_by_enumeration(adjacency: &[Vec<u32>], s: &GoodSet) -> u64 {
        fn go(adjacency: &[Vec<u32>], goods: &[Good], idx: usize, used: &mut Vec<u32>) -> u64 {
            if idx == goods.len() {
                return 0;
            }
            // Skip this good entirely.
            let mut best = go(adjacency, goods, idx + 1, used);
            for &slot in &adjacency[goods[idx].0] {
                if !used.contains(&slot) {
                    used.push(slot);
                    best = best.max(1 + go(adjacency, goods, idx + 1, used));
                    used.pop();
                }
            }
            best
        }
        let goods: Vec<Good> = s.iter().collect();
        go(adjacency, &goods, 0, &mut Vec::new())
    }

    /// Definitional graphic rank: size of the largest acyclic subset of S,
    /// with acyclicity decided by counting vertices and components via DFS.
    fn graphic_rank_by_enumeration(endpoints: &[(u32, u32)], s: &GoodSet) -> u64 {
        let goods: Vec<Good> = s.iter().collect();
        let mut best = 0u64;
        for pick in 0u64..(1 << goods.len()) {
            let chosen: Vec<Good> = (0..goods.len())
                .filter(|&i| pick & (1 << i) != 0)
                .map(|i| goods[i])
                .collect();
            if chosen.len() as u64 <= best {
                continue;
            }
            let mut verts: Vec<u32> = chosen
                .iter()
                .flat_map(|g| [endpoints[g.0].0, endpoints[g.0].1])
                .collect();
            verts.sort_unstable();
            verts.dedup();
            let index_of = |v: u32| verts.binary_search(&v).unwrap();
            let mut adj = vec![Vec::new(); verts.len()];
            for g in &chosen {
                let (u, v) = endpoints[g.0];
                adj[index_of(u)].push(index_of(v));
                adj[index_of(v)].push(index_of(u));
            }
            let mut seen = vec![false; verts.len()];
            let mut components = 0usize;
            for start in 0..verts.len() {
                if seen[start] {
                    continue;
                }
                components += 1;
                let mut stack = vec![start];
                seen[start] = true;
                while let Some(v) = stack.pop() {
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
            // A multigraph is a forest iff |E| = |V| - #components.
            if chosen.len() == verts.len() - components {
                best = best.max(chosen.len() as u64);
            }
        }
        best
    }

    #[test]
    fn transversal_matches_enumeration_on_all_subsets() {
        let adjacency = vec![vec![0], vec![0, 1], vec![1, 2], vec![0, 2], vec![2], vec![1]];
        let m = adjacency.len();
        let oracle = ValuationOracle::transversal(adjacency.clone());
        for mask in 0u64..(1 << m) {
            let s = GoodSet::from_mask(m, mask);
            assert_eq!(
                oracle.value(&s).unwrap(),
                transversal_rank_by_enumeration(&adjacency, &s),
                "mask {mask:#b}"
            );
        }
    }

    #[test]
    fn graphic_matches_enumeration_on_all_subsets() {
        // Multigraph with a parallel pair, a triangle and a pendant edge.
        let endpoints = vec![(0, 1), (0, 1), (1, 2), (0, 2), (2, 3), (3, 3)];
        let m = endpoints.len();
        let oracle = ValuationOracle::graphic(endpoints.clone());
        for mask in 0u64..(1 << m) {
            let s = GoodSet::from_mask(m, mask);
            assert_eq!(
                oracle.value(&s).unwrap(),
                graphic_rank_by_enumeration(&endpoints, &s),
                "mask {mask:#b}"
            );
        }
    }

    #[test]
    fn every_family_is_mrf_exhaustively_on_small_universe() {
        let m = 6;
        let oracles = vec![
            ValuationOracle::binary_additive(set(m, &[0, 2, 4])),
            ValuationOracle::uniform(2),
            ValuationOracle::partition(vec![(set(m, &[0, 1]), 1), (set(m, &[2, 3, 4]), 2)], Some(2))
                .unwrap(),
            ValuationOracle::transversal(vec![vec![0], vec![0, 1], vec![1], vec![2], vec![0, 2], vec![1, 2]]),
            ValuationOracle::graphic(vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (0, 4)]),
        ];
        for oracle in &oracles {
            let report = check_mrf(oracle, m, MrfCheckMode::Exhaustive).unwrap();
            assert!(report.valid, "{:?}: {:?}", oracle.kind(), report.first_violation);
        }
    }

    #[test]
    fn explicit_table_built_from_family_stays_valid() {
        let m = 5;
        let source = ValuationOracle::graphic(vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 0)]);
        let entries: Vec<(u64, u64)> = (0u64..1 << m)
            .map(|mask| (mask, source.value(&GoodSet::from_mask(m, mask)).unwrap()))
            .collect();
        let table = ValuationOracle::explicit(m, entries).unwrap();
        let report = check_mrf(&table, m, MrfCheckMode::Exhaustive).unwrap();
        assert!(report.valid);
        for mask in 0u64..1 << m {
            let s = GoodSet::from_mask(m, mask);
            assert_eq!(table.value(&s).unwrap(), source.value(&s).unwrap());
        }
    }

    #[test]
    fn monotone_on_random_chains() {
        use rand::seq::SliceRandom;
        let m = 9;
        let oracle = ValuationOracle::partition(
            vec![(set(m, &[0, 1, 2]), 2), (set(m, &[3, 4]), 1), (set(m, &[5, 6, 7]), 1)],
            Some(3),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let mut s = GoodSet::empty(m);
            let mut last = 0;
            for &g in &order {
                s.insert(Good(g));
                let v = oracle.value(&s).unwrap();
                assert!(v >= last, "rank dropped on a growing chain");
                last = v;
            }
        }
    }
}
