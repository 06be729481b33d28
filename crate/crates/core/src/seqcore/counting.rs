use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Alphabet, Block, IndexSet, SymbolicSequence};
use crate::error::{Error, Result};

/// An exact occurrence fraction `count / total`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Frequency {
    pub count: u64,
    pub total: u64,
}

impl Frequency {
    pub fn new(count: u64, total: u64) -> Self {
        debug_assert!(total > 0 && count <= total);
        Frequency { count, total }
    }

    pub fn zero() -> Self {
        Frequency { count: 0, total: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frequency {}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.count) * u128::from(other.total))
            .cmp(&(u128::from(other.count) * u128::from(self.total)))
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.total)
    }
}

/// Anchor positions at which blocks are counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Window {
    /// Blocks of length `m` anchored at `1..=N-m+1`.
    Prefix(u64),
    /// Blocks anchored exactly at these positions (a Følner-style window).
    Anchors(Vec<u64>),
}

impl Window {
    /// The members of `set` in `[1, bound]` as explicit anchors.
    pub fn from_set(set: &dyn IndexSet, bound: u64) -> Self {
        Window::Anchors(set.elements_up_to(bound))
    }

    fn describe(&self) -> String {
        match self {
            Window::Prefix(n) => format!("prefix {n}"),
            Window::Anchors(a) => format!("{} anchors", a.len()),
        }
    }
}

// Above this many possible blocks the counter switches to a hash map.
const DENSE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone)]
enum Counts {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

/// Occurrence counts of length-`m` blocks, keyed by their base-`r` codes.
#[derive(Debug, Clone)]
pub struct BlockCounter {
    m: usize,
    alphabet: Alphabet,
    modulus: u64,
    total: u64,
    counts: Counts,
}

impl BlockCounter {
    pub fn new(m: usize, alphabet: Alphabet) -> Result<Self> {
        if m == 0 {
            return Err(Error::Length("block length must be at least 1".into()));
        }
        let modulus = alphabet
            .block_count(m)
            .filter(|&n| n < u64::MAX / u64::from(alphabet.size()))
            .ok_or_else(|| {
                Error::Budget(format!("{alphabet}^{m} blocks do not fit 64-bit codes"))
            })?;
        let counts = if modulus <= DENSE_LIMIT {
            Counts::Dense(vec![0; modulus as usize])
        } else {
            Counts::Sparse(HashMap::new())
        };
        Ok(BlockCounter {
            m,
            alphabet,
            modulus,
            total: 0,
            counts,
        })
    }

    /// Counts every length-`m` window of `digits`, in parallel for long inputs.
    pub fn count_contiguous(digits: &[u8], m: usize, alphabet: Alphabet) -> Result<Self> {
        let empty = Self::new(m, alphabet)?;
        if digits.len() < m {
            return Ok(empty);
        }
        let anchors = digits.len() - m + 1;
        const CHUNK: usize = 1 << 16;
        if anchors <= 2 * CHUNK || empty.modulus > 1 << 16 {
            let mut c = empty;
            c.add_contiguous(digits);
            return Ok(c);
        }
        let starts: Vec<usize> = (0..anchors).step_by(CHUNK).collect();
        Ok(starts
            .into_par_iter()
            .map(|s| {
                let end = (s + CHUNK).min(anchors) + m - 1;
                let mut c = empty.clone();
                c.add_contiguous(&digits[s..end]);
                c
            })
            .reduce(|| empty.clone(), BlockCounter::merge))
    }

    /// Adds all windows of `digits` with a rolling code.
    pub fn add_contiguous(&mut self, digits: &[u8]) {
        if digits.len() < self.m {
            return;
        }
        let r = u64::from(self.alphabet.size());
        let top = self.modulus / r;
        let mut code = digits[..self.m - 1]
            .iter()
            .fold(0u64, |acc, &d| acc * r + u64::from(d));
        for &d in &digits[self.m - 1..] {
            code = code * r + u64::from(d);
            self.add_code(code);
            code %= top;
        }
    }

    #[inline]
    pub fn add_code(&mut self, code: u64) {
        self.total += 1;
        match &mut self.counts {
            Counts::Dense(v) => v[code as usize] += 1,
            Counts::Sparse(map) => *map.entry(code).or_insert(0) += 1,
        }
    }

    pub fn add_block(&mut self, digits: &[u8]) {
        let r = u64::from(self.alphabet.size());
        let code = digits.iter().fold(0u64, |acc, &d| acc * r + u64::from(d));
        self.add_code(code);
    }

    /// Associative merge of two counters over disjoint anchor sets.
    pub fn merge(mut self, other: BlockCounter) -> BlockCounter {
        self.total += other.total;
        match (&mut self.counts, other.counts) {
            (Counts::Dense(a), Counts::Dense(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
            (Counts::Sparse(a), Counts::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            _ => unreachable!("counters with equal parameters share a representation"),
        }
        self
    }

    pub fn block_length(&self) -> usize {
        self.m
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Number of anchors counted.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, code: u64) -> u64 {
        match &self.counts {
            Counts::Dense(v) => v.get(code as usize).copied().unwrap_or(0),
            Counts::Sparse(map) => map.get(&code).copied().unwrap_or(0),
        }
    }

    /// `(code, count)` for every block that occurs, in code order.
    pub fn nonzero(&self) -> Vec<(u64, u64)> {
        match &self.counts {
            Counts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (k as u64, c))
                .collect(),
            Counts::Sparse(map) => {
                let mut out: Vec<_> = map.iter().map(|(&k, &c)| (k, c)).collect();
                out.sort_unstable();
                out
            }
        }
    }

    pub fn distinct(&self) -> usize {
        match &self.counts {
            Counts::Dense(v) => v.iter().filter(|&&c| c > 0).count(),
            Counts::Sparse(map) => map.len(),
        }
    }

    /// Number of possible blocks, `r^m`.
    pub fn universe(&self) -> u64 {
        self.modulus
    }

    pub fn into_measure(self, window: &Window) -> EmpiricalMeasure {
        let counts = self
            .nonzero()
            .into_iter()
            .map(|(code, c)| (Block::from_code(code, self.m, self.alphabet), c))
            .collect();
        EmpiricalMeasure {
            block_length: self.m,
            alphabet: self.alphabet,
            window: window.describe(),
            counts,
            total: self.total,
        }
    }
}

/// Occurrence fractions of the length-`m` blocks over a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub block_length: usize,
    pub alphabet: Alphabet,
    pub window: String,
    pub counts: BTreeMap<Block, u64>,
    pub total: u64,
}

impl EmpiricalMeasure {
    pub fn fraction(&self, block: &Block) -> Frequency {
        Frequency::new(self.counts.get(block).copied().unwrap_or(0), self.total)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Block, Frequency)> + '_ {
        self.counts
            .iter()
            .map(|(b, &c)| (b, Frequency::new(c, self.total)))
    }

    /// Combined mass of every block that starts with `head`.
    pub fn mass_extending(&self, head: &Block) -> Frequency {
        let count = self
            .counts
            .iter()
            .filter(|(b, _)| b.digits().starts_with(head.digits()))
            .map(|(_, &c)| c)
            .sum();
        Frequency::new(count, self.total)
    }
}

fn occurrences(haystack: &[u8], needle: &[u8]) -> u64 {
    haystack
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count() as u64
}

/// Density of `c` in `b`: the fraction of the `|b|-|c|+1` windows of `b` equal to `c`.
pub fn block_density(b: &Block, c: &Block) -> Result<Frequency> {
    if c.len() > b.len() {
        return Err(Error::Length(format!(
            "block of length {} cannot occur in a block of length {}",
            c.len(),
            b.len()
        )));
    }
    Ok(Frequency::new(
        occurrences(b.digits(), c.digits()),
        (b.len() - c.len() + 1) as u64,
    ))
}

/// Frequency of `block` among the anchors `1..=n-|block|+1` of `seq`.
pub fn prefix_frequency(seq: &dyn SymbolicSequence, block: &Block, n: u64) -> Result<Frequency> {
    let m = block.len() as u64;
    if n < m {
        return Err(Error::Length(format!("prefix {n} shorter than block {m}")));
    }
    let digits = seq.prefix(n)?;
    Ok(Frequency::new(
        occurrences(&digits, block.digits()),
        n - m + 1,
    ))
}

/// Fraction of anchors where `b1` occurs in `s1` and `b2` occurs in `s2`.
///
/// Anchors run over `1..=n-max(|b1|,|b2|)+1`, the prefix-window convention,
/// so the diagonal case reduces to [`prefix_frequency`].
pub fn joint_frequency(
    s1: &dyn SymbolicSequence,
    s2: &dyn SymbolicSequence,
    b1: &Block,
    b2: &Block,
    n: u64,
) -> Result<Frequency> {
    let m = b1.len().max(b2.len()) as u64;
    if n < m {
        return Err(Error::Length(format!("prefix {n} shorter than block {m}")));
    }
    let d1 = s1.prefix(n)?;
    let d2 = s2.prefix(n)?;
    let anchors = (n - m + 1) as usize;
    let hits = (0..anchors)
        .filter(|&i| d1[i..i + b1.len()] == *b1.digits() && d2[i..i + b2.len()] == *b2.digits())
        .count();
    Ok(Frequency::new(hits as u64, anchors as u64))
}

/// Empirical distribution of `m`-blocks of `seq` over `window`.
pub fn empirical_measure(
    seq: &dyn SymbolicSequence,
    m: usize,
    window: &Window,
) -> Result<EmpiricalMeasure> {
    let alphabet = seq.alphabet();
    let counter = match window {
        Window::Prefix(n) => {
            if *n < m as u64 {
                return Err(Error::Domain(format!(
                    "window prefix {n} has no {m}-block anchors"
                )));
            }
            BlockCounter::count_contiguous(&seq.prefix(*n)?, m, alphabet)?
        }
        Window::Anchors(anchors) => {
            let Some(&last) = anchors.iter().max() else {
                return Err(Error::Domain("empty window".into()));
            };
            if anchors.contains(&0) {
                return Err(Error::Domain("anchor positions start at 1".into()));
            }
            let span = seq.prefix(last + m as u64 - 1)?;
            let mut c = BlockCounter::new(m, alphabet)?;
            for &a in anchors {
                let s = (a - 1) as usize;
                c.add_block(&span[s..s + m]);
            }
            c
        }
    };
    Ok(counter.into_measure(window))
}

/// Running densities `|S ∩ [1,n]| / n` at `n = 1, 2, 4, ...` up to `limit`.
pub fn index_density_profile(set: &dyn IndexSet, limit: u64) -> Vec<(u64, Frequency)> {
    std::iter::successors(Some(1u64), |&n| n.checked_mul(2))
        .take_while(|&n| n <= limit)
        .map(|n| (n, Frequency::new(set.count_up_to(n), n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{Constant, DigitString, EmptySet, FiniteSet, Multiples, Periodic, SeqRef};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn b(s: &str) -> Block {
        Block::binary(s).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(
            block_density(&b("0110"), &b("1")).unwrap(),
            Frequency::new(1, 2)
        );
        assert_eq!(
            block_density(&b("0110"), &b("11")).unwrap(),
            Frequency::new(1, 3)
        );
        assert_eq!(
            block_density(&b("01111000"), &b("1")).unwrap().as_f64(),
            0.5
        );
        assert!(matches!(
            block_density(&b("01"), &b("011")),
            Err(Error::Length(_))
        ));
    }

    #[test]
    fn prefix_frequency_examples() {
        let alt = Periodic::binary("01").unwrap();
        assert_eq!(
            prefix_frequency(&alt, &b("01"), 100).unwrap(),
            Frequency::new(50, 99)
        );
        let zeros = Constant::zeros();
        assert_eq!(prefix_frequency(&zeros, &b("1"), 10).unwrap().count, 0);
        assert!(matches!(
            prefix_frequency(&zeros, &b("11"), 1),
            Err(Error::Length(_))
        ));
        let fin = DigitString::binary(vec![0, 1]).unwrap();
        assert!(matches!(
            prefix_frequency(&fin, &b("1"), 3),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn empirical_measure_examples() {
        let alt = Periodic::binary("01").unwrap();
        let mu = empirical_measure(&alt, 2, &Window::Prefix(1000)).unwrap();
        assert_eq!(mu.total, 999);
        assert_eq!(mu.fraction(&b("01")), Frequency::new(500, 999));
        assert_eq!(mu.fraction(&b("10")), Frequency::new(499, 999));

        let mu = empirical_measure(&Constant::zeros(), 3, &Window::Prefix(50)).unwrap();
        assert_eq!(mu.counts.len(), 1);
        assert_eq!(mu.fraction(&b("000")).as_f64(), 1.0);

        assert!(matches!(
            empirical_measure(&alt, 1, &Window::Anchors(vec![])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn anchored_window_counts_only_members() {
        let alt = Periodic::binary("01").unwrap();
        let w = Window::from_set(&Multiples::EVENS, 20);
        let mu = empirical_measure(&alt, 2, &w).unwrap();
        assert_eq!(mu.total, 10);
        assert_eq!(mu.fraction(&b("10")).as_f64(), 1.0);
    }

    #[test]
    fn joint_frequency_reductions() {
        let s: SeqRef = Arc::new(Periodic::binary("0110100").unwrap());
        let blk = b("10");
        assert_eq!(
            joint_frequency(&*s, &*s, &blk, &blk, 500).unwrap(),
            prefix_frequency(&*s, &blk, 500).unwrap()
        );
        let zeros = Constant::zeros();
        assert_eq!(
            joint_frequency(&zeros, &*s, &b("00"), &b("01"), 500).unwrap(),
            prefix_frequency(&*s, &b("01"), 500).unwrap()
        );
    }

    #[test]
    fn density_profiles() {
        for (_, f) in index_density_profile(&Multiples::EVENS, 64)
            .into_iter()
            .skip(1)
        {
            assert_eq!(f, Frequency::new(1, 2));
        }
        assert!(index_density_profile(&EmptySet, 64)
            .iter()
            .all(|(_, f)| f.count == 0));
        assert_eq!(index_density_profile(&FiniteSet::new(vec![]), 8).len(), 4);
    }

    #[test]
    fn parallel_counting_matches_serial() {
        let digits: Vec<u8> = (0..300_000u64)
            .map(|i| ((i.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 61) & 1) as u8)
            .collect();
        let par = BlockCounter::count_contiguous(&digits, 5, Alphabet::BINARY).unwrap();
        let mut ser = BlockCounter::new(5, Alphabet::BINARY).unwrap();
        ser.add_contiguous(&digits);
        assert_eq!(par.nonzero(), ser.nonzero());
        assert_eq!(par.total(), (digits.len() - 4) as u64);
    }

    fn arb_block(max: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..2, 1..max)
    }

    proptest! {
        #[test]
        fn densities_sum_to_one(bd in arb_block(40), m in 1usize..5) {
            prop_assume!(m <= bd.len());
            let big = Block::new(bd, Alphabet::BINARY).unwrap();
            let total: u64 = (0..1u64 << m)
                .map(|c| block_density(&big, &Block::from_code(c, m, Alphabet::BINARY)).unwrap().count)
                .sum();
            prop_assert_eq!(total, (big.len() - m + 1) as u64);
        }

        #[test]
        fn density_is_mirror_invariant(bd in arb_block(40), cd in arb_block(5)) {
            let big = Block::new(bd, Alphabet::BINARY).unwrap();
            let small = Block::new(cd, Alphabet::BINARY).unwrap();
            prop_assume!(small.len() <= big.len());
            prop_assert_eq!(
                block_density(&big, &small).unwrap(),
                block_density(&big.mirror().unwrap(), &small.mirror().unwrap()).unwrap()
            );
        }

        #[test]
        fn prefix_frequency_matches_measure_on_aligned_windows(
            digits in prop::collection::vec(0u8..2, 20..120),
            head in arb_block(3),
            extra in 0usize..3,
        ) {
            let seq = DigitString::binary(digits.clone()).unwrap();
            let head = Block::new(head, Alphabet::BINARY).unwrap();
            let m = head.len() + extra;
            let n = digits.len() as u64;
            let anchors: Vec<u64> = (1..=n - m as u64 + 1).collect();
            let mu = empirical_measure(&seq, m, &Window::Anchors(anchors)).unwrap();
            let f = prefix_frequency(&seq, &head, n - extra as u64).unwrap();
            prop_assert_eq!(mu.mass_extending(&head), f);
        }
    }
}
