use serde::Serialize;

use crate::seqcore::IndexSet;

/// One level `n_k` of the schedule `n_1 = 2`, `n_{k+1} = n_k · 2^{n_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Level {
    /// The value fits a machine word.
    Exact(u64),
    /// Too large to materialize; only `log2(n_k)` is kept.
    Symbolic { k: usize, log2: f64 },
}

impl Level {
    pub fn log2(self) -> f64 {
        match self {
            Level::Exact(v) => (v as f64).log2(),
            Level::Symbolic { log2, .. } => log2,
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            Level::Exact(v) => Some(v),
            Level::Symbolic { .. } => None,
        }
    }
}

/// The level schedule and its finite-sums set `S = {0} ∪ FS((n_k))`.
///
/// Levels are superincreasing (`n_{k+1} > n_1 + ... + n_k`), so every element
/// of `S` has a unique representation and the sorted elements are
/// `s_i = Σ_{bit j of i} n_{j+1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LevelSchedule;

/// The levels that fit in a `u64`: `2, 8, 2048`.
pub const LEVELS: [u64; 3] = [2, 8, 2048];

impl LevelSchedule {
    /// `n_k` for `k >= 1`.
    pub fn level(k: usize) -> Level {
        assert!(k >= 1, "levels are numbered from 1");
        if let Some(&v) = LEVELS.get(k - 1) {
            return Level::Exact(v);
        }
        // log2 n_{k+1} = log2 n_k + n_k, with n_k = 2^{log2 n_k}.
        let mut log2 = (LEVELS[2] as f64).log2();
        for _ in LEVELS.len()..k {
            log2 += log2.exp2();
        }
        Level::Symbolic { k, log2 }
    }

    pub fn materialized() -> &'static [u64] {
        &LEVELS
    }

    /// Whether `p` is a finite sum of distinct levels (or 0), by greedy subtraction.
    pub fn contains(p: u64) -> bool {
        let mut rem = p;
        for &n in LEVELS.iter().rev() {
            if n <= rem {
                rem -= n;
            }
        }
        rem == 0
    }

    /// `s_i`, the `i`-th smallest element of `S` (`s_0 = 0`), while it fits a `u64`.
    pub fn element(i: u64) -> Option<u64> {
        if i >> LEVELS.len() != 0 {
            return None;
        }
        Some(
            LEVELS
                .iter()
                .enumerate()
                .filter(|(j, _)| (i >> j) & 1 == 1)
                .map(|(_, &n)| n)
                .sum(),
        )
    }

    /// Elements of `S` in `[0, n]`, ascending.
    pub fn elements_through(n: u64) -> Vec<u64> {
        (0..1u64 << LEVELS.len())
            .filter_map(Self::element)
            .take_while(|&s| s <= n)
            .collect()
    }
}

/// `S = {0} ∪ FS((n_k))` as an index set.
#[derive(Debug, Clone, Copy, Default)]
pub struct FiniteSums;

impl IndexSet for FiniteSums {
    fn contains(&self, p: u64) -> bool {
        LevelSchedule::contains(p)
    }

    fn count_up_to(&self, n: u64) -> u64 {
        // Elements >= 1 are s_1, s_2, ...; all of them below 2^64 are materialized.
        LevelSchedule::elements_through(n).len() as u64 - 1
    }

    fn nth(&self, k: u64) -> Option<u64> {
        if k == 0 {
            return None;
        }
        LevelSchedule::element(k)
    }

    fn len(&self) -> Option<u64> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{index_density_profile, Frequency};

    #[test]
    fn recurrence_and_superincrease() {
        for w in LEVELS.windows(2) {
            assert_eq!(w[1], w[0] << w[0]);
        }
        let mut sum = 0;
        for &n in &LEVELS {
            assert!(n > sum);
            sum += n;
        }
        match LevelSchedule::level(4) {
            Level::Symbolic { k: 4, log2 } => assert_eq!(log2, 11.0 + 2048.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(LevelSchedule::level(5).log2() > 1e300);
    }

    #[test]
    fn explicit_elements() {
        let elems: Vec<u64> = (0..8).filter_map(LevelSchedule::element).collect();
        assert_eq!(elems, [0, 2, 8, 10, 2048, 2050, 2056, 2058]);
        assert_eq!(LevelSchedule::element(8), None);
        for p in 0..5000 {
            assert_eq!(LevelSchedule::contains(p), elems.contains(&p), "p={p}");
        }
    }

    #[test]
    fn density_at_2048() {
        let profile = index_density_profile(&FiniteSums, 2048);
        assert_eq!(profile.last().unwrap(), &(2048, Frequency::new(4, 2048)));
        assert_eq!(FiniteSums.elements_up_to(2048), [2, 8, 10, 2048]);
    }
}
