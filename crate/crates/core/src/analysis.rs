//! Entropy, epsilon-complexity, (ε,m)-goodness and switch statistics on
//! finite prefixes.
//!
//! All statistics here are prefix-scale estimates. Logarithms are base 2.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcore::{Alphabet, Block, BlockCounter, Frequency, SymbolicSequence};

/// Largest block length enumerated by [`count_low_entropy_blocks`].
pub const ENUMERATION_MAX_LEN: usize = 24;

fn entropy_of_counts(counter: &BlockCounter) -> f64 {
    let total = counter.total() as f64;
    counter
        .nonzero()
        .into_iter()
        .map(|(_, c)| {
            let mu = c as f64 / total;
            -mu * mu.log2()
        })
        .sum::<f64>()
}

fn entropy_of_digits(digits: &[u8], n: usize, alphabet: Alphabet) -> Result<f64> {
    let counter = BlockCounter::count_contiguous(digits, n, alphabet)?;
    Ok(entropy_of_counts(&counter) / n as f64)
}

/// `H_n(B) = -(1/n) Σ_C μ_B(C) log μ_B(C)` over the `n`-blocks `C` occurring in `B`.
pub fn combinatorial_entropy(block: &Block, n: usize) -> Result<f64> {
    if n == 0 || n > block.len() {
        return Err(Error::Length(format!(
            "entropy order {n} must lie in 1..={}",
            block.len()
        )));
    }
    entropy_of_digits(block.digits(), n, block.alphabet())
}

fn check_prefix(seq: &dyn SymbolicSequence, len: u64, m: usize) -> Result<Vec<u8>> {
    if m == 0 {
        return Err(Error::Length("block length must be at least 1".into()));
    }
    if len < m as u64 {
        return Err(Error::Length(format!(
            "prefix {len} shorter than block length {m}"
        )));
    }
    seq.prefix(len)
}

/// Minimal number of `m`-blocks needed so that the remaining anchors are at
/// most `eps · (L - m + 1)`, from a descending sort of the block counts.
fn complexity_from_digits(digits: &[u8], eps: f64, m: usize, alphabet: Alphabet) -> Result<u64> {
    let counter = BlockCounter::count_contiguous(digits, m, alphabet)?;
    let mut counts: Vec<u64> = counter.nonzero().into_iter().map(|(_, c)| c).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let total = counter.total();
    let allowed = eps * total as f64;
    let mut covered = 0u64;
    for (i, c) in counts.iter().enumerate() {
        if ((total - covered) as f64) <= allowed {
            return Ok(i as u64);
        }
        covered += c;
    }
    Ok(counts.len() as u64)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0,1)")));
    }
    Ok(())
}

/// Epsilon-complexity `C(ε, m)` of the prefix of length `len`.
pub fn epsilon_complexity(seq: &dyn SymbolicSequence, len: u64, eps: f64, m: usize) -> Result<u64> {
    check_eps(eps)?;
    let digits = check_prefix(seq, len, m)?;
    complexity_from_digits(&digits, eps, m, seq.alphabet())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ComplexityRow {
    pub m: usize,
    pub complexity: u64,
    /// `2^{εm}`.
    pub threshold: f64,
}

/// `C(ε, m)` against `2^{εm}` over a range of block lengths, at prefix scale.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ComplexityReport {
    pub eps: f64,
    pub prefix_len: u64,
    pub rows: Vec<ComplexityRow>,
    /// Some tested `m` has `C(ε, m) < 2^{εm}`.
    pub subexponential: bool,
}

pub fn complexity_curve(
    seq: &dyn SymbolicSequence,
    len: u64,
    eps: f64,
    m_range: RangeInclusive<usize>,
) -> Result<ComplexityReport> {
    check_eps(eps)?;
    let digits = check_prefix(seq, len, *m_range.end())?;
    let rows = m_range
        .map(|m| {
            Ok(ComplexityRow {
                m,
                complexity: complexity_from_digits(&digits, eps, m, seq.alphabet())?,
                threshold: (eps * m as f64).exp2(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let subexponential = rows.iter().any(|r| (r.complexity as f64) < r.threshold);
    Ok(ComplexityReport {
        eps,
        prefix_len: len,
        rows,
        subexponential,
    })
}

fn goodness_of_digits(digits: &[u8], m: usize) -> Result<f64> {
    let counter = BlockCounter::count_contiguous(digits, m, Alphabet::BINARY)?;
    let total = counter.total() as f64;
    let ideal = (-(m as f64)).exp2();
    Ok((0..counter.universe())
        .map(|code| (counter.count(code) as f64 / total - ideal).abs())
        .fold(0.0, f64::max))
}

/// `max_B |freq(B) - 2^{-m}|` over all binary `m`-blocks in the prefix of length `len`.
pub fn eps_m_goodness(seq: &dyn SymbolicSequence, len: u64, m: usize) -> Result<f64> {
    if seq.alphabet() != Alphabet::BINARY {
        return Err(Error::Alphabet(
            "(ε,m)-goodness is defined for binary sequences".into(),
        ));
    }
    let digits = check_prefix(seq, len, m)?;
    goodness_of_digits(&digits, m)
}

/// Fraction of `n <= len - 1` with `digit(n) != digit(n+1)`.
pub fn switch_density(seq: &dyn SymbolicSequence, len: u64) -> Result<Frequency> {
    if len < 2 {
        return Err(Error::Length(
            "switch density needs a prefix of length >= 2".into(),
        ));
    }
    let digits = seq.prefix(len)?;
    Ok(switches_in(&digits))
}

pub(crate) fn switches_in(digits: &[u8]) -> Frequency {
    let count = digits.windows(2).filter(|w| w[0] != w[1]).count() as u64;
    Frequency::new(count, digits.len() as u64 - 1)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EntropyRow {
    pub window: u64,
    pub n: usize,
    pub entropy: f64,
}

/// `H_n` of prefix empirical measures, with min/max across windows per `n`
/// as finite stand-ins for lower and upper entropy.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EntropyProfile {
    pub rows: Vec<EntropyRow>,
    /// `(n, min over windows, max over windows)`.
    pub extremes: Vec<(usize, f64, f64)>,
}

pub fn entropy_profile(
    seq: &dyn SymbolicSequence,
    windows: &[u64],
    n_range: RangeInclusive<usize>,
) -> Result<EntropyProfile> {
    let Some(&longest) = windows.iter().max() else {
        return Err(Error::Domain("no windows given".into()));
    };
    let max_n = *n_range.end();
    if *n_range.start() == 0 || windows.iter().any(|&w| w < max_n as u64) {
        return Err(Error::Length(
            "every window must hold a block of each order".into(),
        ));
    }
    let digits = seq.prefix(longest)?;
    let mut rows = Vec::new();
    let mut extremes = Vec::new();
    for n in n_range {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &w in windows {
            let entropy = entropy_of_digits(&digits[..w as usize], n, seq.alphabet())?;
            lo = lo.min(entropy);
            hi = hi.max(entropy);
            rows.push(EntropyRow {
                window: w,
                n,
                entropy,
            });
        }
        extremes.push((n, lo, hi));
    }
    Ok(EntropyProfile { rows, extremes })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LowEntropyCount {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub count: u64,
    /// `log2(count) / m`, to compare against `c`.
    pub rate: f64,
}

/// Exhaustive count of binary `m`-blocks `B` with `H_n(B) <= c`.
pub fn count_low_entropy_blocks(m: usize, n: usize, c: f64) -> Result<LowEntropyCount> {
    if m > ENUMERATION_MAX_LEN {
        return Err(Error::Budget(format!(
            "2^{m} blocks exceeds the enumeration budget 2^{ENUMERATION_MAX_LEN}"
        )));
    }
    if n == 0 || n > m {
        return Err(Error::Length(format!(
            "entropy order {n} must lie in 1..={m}"
        )));
    }
    let windows = m - n + 1;
    let count = (0..1u64 << m)
        .into_par_iter()
        .map_init(
            || (vec![0u32; 1 << n], vec![0u8; m]),
            |(hist, digits), code| {
                for (i, d) in digits.iter_mut().enumerate() {
                    *d = ((code >> (m - 1 - i)) & 1) as u8;
                }
                hist.iter_mut().for_each(|h| *h = 0);
                let mask = (1usize << n) - 1;
                let mut w = 0usize;
                for (i, &d) in digits.iter().enumerate() {
                    w = ((w << 1) | usize::from(d)) & mask;
                    if i + 1 >= n {
                        hist[w] += 1;
                    }
                }
                let total = windows as f64;
                let h: f64 = hist
                    .iter()
                    .filter(|&&k| k > 0)
                    .map(|&k| {
                        let mu = f64::from(k) / total;
                        -mu * mu.log2()
                    })
                    .sum::<f64>()
                    / n as f64;
                u64::from(h <= c)
            },
        )
        .sum::<u64>();
    Ok(LowEntropyCount {
        m,
        n,
        c,
        count,
        rate: if count == 0 {
            f64::NEG_INFINITY
        } else {
            (count as f64).log2() / m as f64
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{prefix_frequency, Constant, DigitString, Periodic};
    use proptest::prelude::*;

    fn b(s: &str) -> Block {
        Block::binary(s).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(combinatorial_entropy(&b("00000000"), 2).unwrap(), 0.0);
        assert_eq!(combinatorial_entropy(&b("0011"), 1).unwrap(), 1.0);
        // μ(01) = 4/7, μ(10) = 3/7.
        let oracle =
            -(4.0f64 / 7.0 * (4.0f64 / 7.0).log2() + 3.0 / 7.0 * (3.0f64 / 7.0).log2()) / 2.0;
        let h = combinatorial_entropy(&b("01010101"), 2).unwrap();
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.4926).abs() < 1e-4);
        assert!(matches!(
            combinatorial_entropy(&b("01"), 3),
            Err(Error::Length(_))
        ));
    }

    #[test]
    fn complexity_examples() {
        let alt = Periodic::binary("01").unwrap();
        assert_eq!(epsilon_complexity(&alt, 1000, 0.3, 3).unwrap(), 2);
        assert_eq!(
            epsilon_complexity(&Constant::zeros(), 1000, 0.3, 5).unwrap(),
            1
        );
        assert!(matches!(
            epsilon_complexity(&alt, 2, 0.3, 3),
            Err(Error::Length(_))
        ));
        assert!(epsilon_complexity(&alt, 100, 1.0, 3).is_err());
        let r = complexity_curve(&alt, 1000, 0.4, 4..=4).unwrap();
        assert_eq!(r.rows[0].complexity, 2);
        assert!(r.subexponential);
    }

    #[test]
    fn goodness_and_switches() {
        assert_eq!(eps_m_goodness(&Constant::zeros(), 100, 1).unwrap(), 0.5);
        let alt = Periodic::binary("01").unwrap();
        assert_eq!(switch_density(&alt, 100).unwrap().as_f64(), 1.0);
        assert_eq!(switch_density(&Constant::zeros(), 100).unwrap().count, 0);
        assert!(switch_density(&alt, 1).is_err());
    }

    #[test]
    fn gray_concatenation_is_balanced() {
        use crate::grayorder::{GrayOrdering, Variant};
        let o = GrayOrdering::new(
            Block::new(vec![0; 8], Alphabet::BINARY).unwrap(),
            Variant::Plain,
        )
        .unwrap();
        let digits: Vec<u8> = o.iter().flat_map(Block::into_digits).collect();
        let s = DigitString::binary(digits).unwrap();
        assert_eq!(s.len(), 2048);
        assert_eq!(eps_m_goodness(&s, 2048, 1).unwrap(), 0.0);
    }

    #[test]
    fn entropy_profile_of_periodic() {
        let alt = Periodic::binary("01").unwrap();
        let p = entropy_profile(&alt, &[1000, 2000], 8..=8).unwrap();
        assert!((p.extremes[0].1 - 0.125).abs() < 0.01);
        assert!(entropy_profile(&alt, &[], 1..=2).is_err());
    }

    #[test]
    fn low_entropy_counts() {
        assert_eq!(count_low_entropy_blocks(8, 1, 0.0).unwrap().count, 2);
        assert_eq!(count_low_entropy_blocks(4, 1, 0.82).unwrap().count, 10);
        assert!(matches!(
            count_low_entropy_blocks(25, 1, 0.5),
            Err(Error::Budget(_))
        ));
    }

    /// Brute-force oracle: the smallest family of m-blocks whose complement
    /// covers at most ε of the anchors, by trying every subset.
    fn brute_complexity(digits: &[u8], eps: f64, m: usize) -> u64 {
        let counter = BlockCounter::count_contiguous(digits, m, Alphabet::BINARY).unwrap();
        let total = counter.total();
        let universe = 1u64 << m;
        (0u64..1 << universe)
            .filter(|family| {
                let covered: u64 = (0..universe)
                    .filter(|b| family >> b & 1 == 1)
                    .map(|b| counter.count(b))
                    .sum();
                ((total - covered) as f64) <= eps * total as f64
            })
            .map(|family| u64::from(family.count_ones()))
            .min()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_head_is_minimal(
            digits in prop::collection::vec(0u8..2, 8..200),
            m in 1usize..=4,
            eps in 0.01f64..0.99,
        ) {
            let s = DigitString::binary(digits.clone()).unwrap();
            let greedy = epsilon_complexity(&s, digits.len() as u64, eps, m).unwrap();
            prop_assert_eq!(greedy, brute_complexity(&digits, eps, m));
        }

        #[test]
        fn complexity_monotone_and_bounded(
            digits in prop::collection::vec(0u8..2, 16..300),
            m in 1usize..=6,
            e1 in 0.01f64..0.98,
            de in 0.0f64..0.5,
        ) {
            let s = DigitString::binary(digits.clone()).unwrap();
            let len = digits.len() as u64;
            let e2 = (e1 + de).min(0.99);
            let c1 = epsilon_complexity(&s, len, e1, m).unwrap();
            let c2 = epsilon_complexity(&s, len, e2, m).unwrap();
            prop_assert!(c2 <= c1);
            let distinct = BlockCounter::count_contiguous(&digits, m, Alphabet::BINARY).unwrap().distinct();
            prop_assert!(c1 <= distinct as u64);
        }

        #[test]
        fn entropy_bounds(digits in prop::collection::vec(0u8..3, 4..120), n in 1usize..4) {
            let blk = Block::new(digits.clone(), Alphabet::new(3).unwrap()).unwrap();
            prop_assume!(n <= blk.len());
            let h = combinatorial_entropy(&blk, n).unwrap();
            prop_assert!((-1e-12..=3f64.log2() + 1e-12).contains(&h));
            let distinct = BlockCounter::count_contiguous(&digits, n, Alphabet::new(3).unwrap()).unwrap().distinct();
            prop_assert_eq!(h == 0.0, distinct == 1);
        }

        #[test]
        fn goodness_is_mirror_invariant(digits in prop::collection::vec(0u8..2, 8..200), m in 1usize..5) {
            let s = DigitString::binary(digits.clone()).unwrap();
            let t = DigitString::binary(digits.iter().map(|d| 1 - d).collect()).unwrap();
            let len = digits.len() as u64;
            prop_assert_eq!(eps_m_goodness(&s, len, m).unwrap(), eps_m_goodness(&t, len, m).unwrap());
        }

        #[test]
        fn switches_are_two_block_frequencies(digits in prop::collection::vec(0u8..2, 2..200)) {
            let s = DigitString::binary(digits.clone()).unwrap();
            let len = digits.len() as u64;
            let sw = switch_density(&s, len).unwrap();
            let f01 = prefix_frequency(&s, &b("01"), len).unwrap();
            let f10 = prefix_frequency(&s, &b("10"), len).unwrap();
            prop_assert_eq!(sw.total, f01.total);
            prop_assert_eq!(sw.count, f01.count + f10.count);
        }
    }
}
