//! Utility vectors and the orderings defined over them: Lorenz dominance,
//! leximin, and the Nash welfare convention that first minimizes the number
//! of zero-utility agents.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};

/// Priority-augmented utility, stored exactly as the integer
/// `n^2 * v_i(X_i) + pi(i)`.
///
/// Comparing scaled values is equivalent to comparing the exact rationals
/// `v_i(X_i) + pi(i)/n^2` because `1 <= pi(i) <= n < n^2` for `n >= 2`
/// (and trivially for `n = 1`). Floating point would tie where the proofs
/// require a strict order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AugmentedUtility {
    scaled: u64,
}

impl AugmentedUtility {
    pub fn new(value: u64, rank: usize, agent_count: usize) -> Self {
        let n = agent_count as u64;
        debug_assert!(rank >= 1 && rank as u64 <= n);
        AugmentedUtility {
            scaled: n * n * value + rank as u64,
        }
    }

    pub fn scaled(self) -> u64 {
        self.scaled
    }
}

impl fmt::Debug for AugmentedUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scaled)
    }
}

/// Entry types that can appear in a sorted utility vector.
pub trait UtilityValue: Ord + Copy {
    fn as_u128(self) -> u128;
}

impl UtilityValue for u64 {
    fn as_u128(self) -> u128 {
        self as u128
    }
}

impl UtilityValue for AugmentedUtility {
    fn as_u128(self) -> u128 {
        self.scaled as u128
    }
}

/// Utility vector sorted ascending. The plain variant carries `u64` values
/// `v_i(X_i)`, the augmented variant carries [`AugmentedUtility`] entries.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(transparent)]
pub struct SortedUtilityVector<T> {
    entries: Vec<T>,
}

impl<T: UtilityValue> SortedUtilityVector<T> {
    /// Sorts ascending. The sort is stable in the original agent-index order,
    /// though only the multiset matters for Lorenz and leximin comparisons.
    pub fn from_unsorted(mut entries: Vec<T>) -> Self {
        entries.sort();
        SortedUtilityVector { entries }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries as raw comparison keys (`v` for plain vectors, `n²·v + π` for
    /// augmented ones).
    pub fn scaled_entries(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.as_u128() as u64).collect()
    }
}

/// Outcome of a Lorenz dominance comparison between two sorted vectors.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum LorenzOrder {
    LeftDominates,
    RightDominates,
    Equal,
    Incomparable,
}

/// Compares prefix sums of two ascending-sorted utility vectors.
///
/// `LeftDominates` means every prefix sum of `u` is >= the corresponding
/// prefix sum of `w`, with at least one strict inequality.
pub fn lorenz_compare<T: UtilityValue>(
    u: &SortedUtilityVector<T>,
    w: &SortedUtilityVector<T>,
) -> Result<LorenzOrder> {
    if u.len() != w.len() {
        return Err(Error::LengthMismatch(u.len(), w.len()));
    }
    let mut left_ge = true;
    let mut right_ge = true;
    let mut prefix_u: u128 = 0;
    let mut prefix_w: u128 = 0;
    for (a, b) in u.entries().iter().zip(w.entries()) {
        prefix_u += a.as_u128();
        prefix_w += b.as_u128();
        match prefix_u.cmp(&prefix_w) {
            Ordering::Less => left_ge = false,
            Ordering::Greater => right_ge = false,
            Ordering::Equal => {}
        }
    }
    Ok(match (left_ge, right_ge) {
        (true, true) => LorenzOrder::Equal,
        (true, false) => LorenzOrder::LeftDominates,
        (false, true) => LorenzOrder::RightDominates,
        (false, false) => LorenzOrder::Incomparable,
    })
}

/// True if `u` Lorenz-dominates `w` or the two vectors are equal.
pub fn lorenz_dominates_or_equal<T: UtilityValue>(
    u: &SortedUtilityVector<T>,
    w: &SortedUtilityVector<T>,
) -> Result<bool> {
    Ok(matches!(
        lorenz_compare(u, w)?,
        LorenzOrder::LeftDominates | LorenzOrder::Equal
    ))
}

/// Lexicographic comparison of ascending-sorted vectors: the leximin-greater
/// vector provides more to the worst-off agent, then to the second worst-off,
/// and so on.
pub fn leximin_compare<T: UtilityValue>(
    u: &SortedUtilityVector<T>,
    w: &SortedUtilityVector<T>,
) -> Result<Ordering> {
    if u.len() != w.len() {
        return Err(Error::LengthMismatch(u.len(), w.len()));
    }
    Ok(u.entries().cmp(w.entries()))
}

/// Nash social welfare under the convention that fewer zero-utility agents
/// always wins; ties are broken by the exact product of positive utilities
/// (empty product = 1).
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NswValue {
    pub zero_count: usize,
    #[serde(serialize_with = "serialize_biguint")]
    pub product: BigUint,
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl NswValue {
    pub fn from_utilities(utilities: &[u64]) -> Self {
        let zero_count = utilities.iter().filter(|&&u| u == 0).count();
        let mut product = BigUint::from(1u8);
        for &u in utilities.iter().filter(|&&u| u > 0) {
            product *= BigUint::from(u);
        }
        NswValue { zero_count, product }
    }
}

impl Ord for NswValue {
    /// Greater is better: fewer zeros first, larger product second.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .zero_count
            .cmp(&self.zero_count)
            .then_with(|| self.product.cmp(&other.product))
    }
}

impl PartialOrd for NswValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NswValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(zeros={}, product={})", self.zero_count, self.product)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(v: Vec<u64>) -> SortedUtilityVector<u64> {
        SortedUtilityVector::from_unsorted(v)
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(
            lorenz_compare(&sorted(vec![1, 2]), &sorted(vec![0, 3])).unwrap(),
            LorenzOrder::LeftDominates
        );
        assert_eq!(
            lorenz_compare(&sorted(vec![1, 1]), &sorted(vec![1, 1])).unwrap(),
            LorenzOrder::Equal
        );
        assert_eq!(
            lorenz_compare(&sorted(vec![1, 1, 4]), &sorted(vec![0, 3, 3])).unwrap(),
            LorenzOrder::Incomparable
        );
    }

    #[test]
    fn lorenz_length_mismatch_is_error() {
        assert!(lorenz_compare(&sorted(vec![1]), &sorted(vec![1, 2])).is_err());
    }

    #[test]
    fn leximin_examples() {
        assert_eq!(
            leximin_compare(&sorted(vec![0, 3]), &sorted(vec![1, 2])).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            leximin_compare(&sorted(vec![1, 2]), &sorted(vec![1, 2])).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            leximin_compare(&sorted(vec![1, 1, 4]), &sorted(vec![1, 2, 2])).unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn nsw_prefers_fewer_zeros() {
        let a = NswValue::from_utilities(&[0, 2, 3]);
        let b = NswValue::from_utilities(&[1, 1, 1]);
        assert!(b > a);
        assert_eq!(a.zero_count, 1);
        assert_eq!(b.product, BigUint::from(1u8));
    }

    #[test]
    fn nsw_of_empty_utilities() {
        let v = NswValue::from_utilities(&[0, 0]);
        assert_eq!(v.zero_count, 2);
        assert_eq!(v.product, BigUint::from(1u8));
        let w = NswValue::from_utilities(&[2, 3]);
        assert_eq!(w.zero_count, 0);
        assert_eq!(w.product, BigUint::from(6u8));
    }

    #[test]
    fn augmented_ordering_examples() {
        // n = 2: (v=1, rank=2) -> 6 and (v=2, rank=1) -> 9.
        assert_eq!(AugmentedUtility::new(1, 2, 2).scaled(), 6);
        assert_eq!(AugmentedUtility::new(2, 1, 2).scaled(), 9);
        assert!(AugmentedUtility::new(1, 2, 2) < AugmentedUtility::new(2, 1, 2));
        assert_eq!(AugmentedUtility::new(0, 1, 3).scaled(), 1);
    }

    proptest! {
        /// Scaled-integer comparison must match exact rational comparison of
        /// v + rank/n^2, computed independently with big rationals.
        #[test]
        fn augmented_order_matches_exact_rationals(
            n in 1usize..40,
            v1 in 0u64..10_000,
            v2 in 0u64..10_000,
            r1 in 1usize..40,
            r2 in 1usize..40,
        ) {
            let (r1, r2) = (r1.min(n), r2.min(n));
            let a = AugmentedUtility::new(v1, r1, n);
            let b = AugmentedUtility::new(v2, r2, n);
            let n2 = num_rational::BigRational::from_integer((n as u64 * n as u64).into());
            let exact1 = num_rational::BigRational::from_integer(v1.into())
                + num_rational::BigRational::from_integer((r1 as u64).into()) / n2.clone();
            let exact2 = num_rational::BigRational::from_integer(v2.into())
                + num_rational::BigRational::from_integer((r2 as u64).into()) / n2;
            prop_assert_eq!(a.cmp(&b), exact1.cmp(&exact2));
        }

        /// Lorenz dominance is a partial order: antisymmetric and transitive.
        #[test]
        fn lorenz_is_a_partial_order(
            a in proptest::collection::vec(0u64..6, 4),
            b in proptest::collection::vec(0u64..6, 4),
            c in proptest::collection::vec(0u64..6, 4),
        ) {
            let (a, b, c) = (sorted(a), sorted(b), sorted(c));
            let ab = lorenz_compare(&a, &b).unwrap();
            let ba = lorenz_compare(&b, &a).unwrap();
            // Antisymmetry.
            match ab {
                LorenzOrder::LeftDominates => prop_assert_eq!(ba, LorenzOrder::RightDominates),
                LorenzOrder::RightDominates => prop_assert_eq!(ba, LorenzOrder::LeftDominates),
                LorenzOrder::Equal => prop_assert_eq!(ba, LorenzOrder::Equal),
                LorenzOrder::Incomparable => prop_assert_eq!(ba, LorenzOrder::Incomparable),
            }
            // Transitivity of dominates-or-equal.
            let bc = lorenz_compare(&b, &c).unwrap();
            let ac = lorenz_compare(&a, &c).unwrap();
            let dom = |o: LorenzOrder| matches!(o, LorenzOrder::LeftDominates | LorenzOrder::Equal);
            if dom(ab) && dom(bc) {
                prop_assert!(dom(ac));
            }
        }
    }
}
