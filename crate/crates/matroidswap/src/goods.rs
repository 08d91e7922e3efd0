//! Good/agent identifiers and a compact set of goods.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a good in the instance's good list (`0..m`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Good(pub usize);

impl fmt::Debug for Good {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Agent index. `Agent(0)` is the virtual holder of unallocated goods; real
/// agents are `Agent(1)..=Agent(n)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Agent(pub usize);

impl Agent {
    pub const UNASSIGNED: Agent = Agent(0);

    pub fn is_unassigned(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

const WORD_BITS: usize = 64;

/// Set of goods over a fixed universe `0..universe`, stored as a bitmask.
///
/// Iteration is always in ascending good index order, which the exchange
/// graph and BFS rely on for determinism.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GoodSet {
    universe: usize,
    words: Vec<u64>,
}

impl GoodSet {
    pub fn empty(universe: usize) -> Self {
        GoodSet {
            universe,
            words: vec![0; universe.div_ceil(WORD_BITS)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = GoodSet::empty(universe);
        for g in 0..universe {
            set.insert(Good(g));
        }
        set
    }

    pub fn from_goods<I: IntoIterator<Item = Good>>(universe: usize, goods: I) -> Self {
        let mut set = GoodSet::empty(universe);
        for g in goods {
            set.insert(g);
        }
        set
    }

    /// Builds the set whose k-th bit of `mask` selects good k. Requires
    /// `universe <= 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= WORD_BITS);
        let mut set = GoodSet::empty(universe);
        if !set.words.is_empty() {
            set.words[0] = mask;
        }
        set
    }

    /// The low 64 bits of the set, i.e. the mask of goods `0..64`.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, g: Good) -> bool {
        debug_assert!(g.0 < self.universe);
        self.words[g.0 / WORD_BITS] & (1 << (g.0 % WORD_BITS)) != 0
    }

    /// Returns true if the good was newly inserted.
    pub fn insert(&mut self, g: Good) -> bool {
        debug_assert!(g.0 < self.universe, "good {:?} outside universe", g);
        let word = &mut self.words[g.0 / WORD_BITS];
        let bit = 1 << (g.0 % WORD_BITS);
        let fresh = *word & bit == 0;
        *word |= bit;
        fresh
    }

    /// Returns true if the good was present.
    pub fn remove(&mut self, g: Good) -> bool {
        debug_assert!(g.0 < self.universe);
        let word = &mut self.words[g.0 / WORD_BITS];
        let bit = 1 << (g.0 % WORD_BITS);
        let present = *word & bit != 0;
        *word &= !bit;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection_len(&self, other: &GoodSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &GoodSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn is_subset(&self, other: &GoodSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Copy of the set with `g` added.
    pub fn with(&self, g: Good) -> GoodSet {
        let mut s = self.clone();
        s.insert(g);
        s
    }

    /// Copy of the set with `g` removed.
    pub fn without(&self, g: Good) -> GoodSet {
        let mut s = self.clone();
        s.remove(g);
        s
    }

    /// Goods in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = Good> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(Good(wi * WORD_BITS + bit))
                }
            })
        })
    }

    /// Goods of the universe NOT in this set, ascending.
    pub fn complement_iter(&self) -> impl Iterator<Item = Good> + '_ {
        (0..self.universe).map(Good).filter(move |&g| !self.contains(g))
    }
}

impl fmt::Debug for GoodSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_contains() {
        let mut s = GoodSet::empty(130);
        assert!(s.insert(Good(0)));
        assert!(s.insert(Good(129)));
        assert!(!s.insert(Good(0)));
        assert!(s.contains(Good(0)));
        assert!(s.contains(Good(129)));
        assert!(!s.contains(Good(64)));
        assert_eq!(s.len(), 2);
        assert!(s.remove(Good(0)));
        assert!(!s.remove(Good(0)));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn iter_is_ascending() {
        let s = GoodSet::from_goods(100, [Good(99), Good(3), Good(64), Good(0)]);
        let order: Vec<usize> = s.iter().map(|g| g.0).collect();
        assert_eq!(order, vec![0, 3, 64, 99]);
    }

    #[test]
    fn complement_covers_universe() {
        let s = GoodSet::from_goods(5, [Good(1), Good(3)]);
        let rest: Vec<usize> = s.complement_iter().map(|g| g.0).collect();
        assert_eq!(rest, vec![0, 2, 4]);
    }

    #[test]
    fn intersection_and_subset() {
        let a = GoodSet::from_goods(70, [Good(1), Good(65)]);
        let b = GoodSet::from_goods(70, [Good(1), Good(2), Good(65)]);
        assert_eq!(a.intersection_len(&b), 2);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(!a.is_disjoint(&b));
    }
}
