use std::fmt::Debug;

/// A set of non-negative integers with membership and rank queries.
///
/// Sequence positions start at 1, so `count_up_to`, `nth` and
/// `elements_up_to` only see elements `>= 1`. An element `0`, when present,
/// is visible through `contains(0)` alone; shift sets use it for the
/// unshifted term.
pub trait IndexSet: Send + Sync + Debug {
    fn contains(&self, p: u64) -> bool;

    /// `|S ∩ [1, n]|`.
    fn count_up_to(&self, n: u64) -> u64;

    /// The `k`-th smallest element `>= 1` (`k >= 1`), if it exists.
    fn nth(&self, k: u64) -> Option<u64>;

    /// Number of elements `>= 1`, or `None` for an infinite set.
    fn len(&self) -> Option<u64>;

    fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Sorted elements of `S ∩ [1, n]`.
    fn elements_up_to(&self, n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = 1;
        while let Some(e) = self.nth(k) {
            if e > n {
                break;
            }
            out.push(e);
            k += 1;
        }
        out
    }
}

/// `ℕ = {1, 2, 3, ...}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllPositions;

impl IndexSet for AllPositions {
    fn contains(&self, p: u64) -> bool {
        p >= 1
    }
    fn count_up_to(&self, n: u64) -> u64 {
        n
    }
    fn nth(&self, k: u64) -> Option<u64> {
        (k >= 1).then_some(k)
    }
    fn len(&self) -> Option<u64> {
        None
    }
    fn elements_up_to(&self, n: u64) -> Vec<u64> {
        (1..=n).collect()
    }
}

/// `{step, 2·step, 3·step, ...}`.
#[derive(Debug, Clone, Copy)]
pub struct Multiples(pub u64);

impl Multiples {
    pub const EVENS: Multiples = Multiples(2);
}

impl IndexSet for Multiples {
    fn contains(&self, p: u64) -> bool {
        p >= 1 && p.is_multiple_of(self.0)
    }
    fn count_up_to(&self, n: u64) -> u64 {
        n / self.0
    }
    fn nth(&self, k: u64) -> Option<u64> {
        if k == 0 {
            return None;
        }
        k.checked_mul(self.0)
    }
    fn len(&self) -> Option<u64> {
        None
    }
    fn elements_up_to(&self, n: u64) -> Vec<u64> {
        (1..=n / self.0).map(|k| k * self.0).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySet;

impl IndexSet for EmptySet {
    fn contains(&self, _: u64) -> bool {
        false
    }
    fn count_up_to(&self, _: u64) -> u64 {
        0
    }
    fn nth(&self, _: u64) -> Option<u64> {
        None
    }
    fn len(&self) -> Option<u64> {
        Some(0)
    }
}

/// An explicit finite set, stored sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteSet {
    elements: Vec<u64>,
    // Positive elements start here; a leading 0 is kept for `contains`.
    first_positive: usize,
}

impl FiniteSet {
    pub fn new(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let first_positive = usize::from(elements.first() == Some(&0));
        FiniteSet {
            elements,
            first_positive,
        }
    }

    /// `{lo, lo+1, ..., hi}`.
    pub fn range(lo: u64, hi: u64) -> Self {
        Self::new((lo..=hi).collect())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.elements
    }

    fn positive(&self) -> &[u64] {
        &self.elements[self.first_positive..]
    }
}

impl FromIterator<u64> for FiniteSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl IndexSet for FiniteSet {
    fn contains(&self, p: u64) -> bool {
        self.elements.binary_search(&p).is_ok()
    }
    fn count_up_to(&self, n: u64) -> u64 {
        self.positive().partition_point(|&e| e <= n) as u64
    }
    fn nth(&self, k: u64) -> Option<u64> {
        let k = usize::try_from(k).ok()?;
        if k == 0 {
            return None;
        }
        self.positive().get(k - 1).copied()
    }
    fn len(&self) -> Option<u64> {
        Some(self.positive().len() as u64)
    }
    fn elements_up_to(&self, n: u64) -> Vec<u64> {
        let pos = self.positive();
        pos[..pos.partition_point(|&e| e <= n)].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_consistent(s: &dyn IndexSet, bound: u64) {
        let elems = s.elements_up_to(bound);
        for p in 1..=bound {
            assert_eq!(s.contains(p), elems.binary_search(&p).is_ok(), "p={p}");
            assert_eq!(
                s.count_up_to(p),
                elems.iter().filter(|&&e| e <= p).count() as u64
            );
        }
        for (i, &e) in elems.iter().enumerate() {
            assert_eq!(s.nth(i as u64 + 1), Some(e));
        }
    }

    #[test]
    fn membership_matches_enumeration() {
        check_consistent(&AllPositions, 50);
        check_consistent(&Multiples(3), 50);
        check_consistent(&EmptySet, 50);
        check_consistent(&FiniteSet::new(vec![0, 9, 3, 3, 27]), 50);
    }

    #[test]
    fn zero_is_member_but_not_a_position() {
        let s = FiniteSet::new(vec![0, 2]);
        assert!(s.contains(0));
        assert_eq!(s.nth(1), Some(2));
        assert_eq!(s.len(), Some(1));
    }
}
