//! Carry-sum probabilities for pairs of independent `(p, 1-p)`-Bernoulli
//! digit streams, in closed form and by simulation.
//!
//! With `q = 1 - p`, a carry into a column is produced by the first column to
//! its right whose digit sum is not 1, so
//! `P = p²/(p²+q²)` is the carry probability and `Q = 1 - P`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::bitarith::stream_carry_add;
use crate::error::{Error, Result};
use crate::generators::{Bernoulli, CounterRng};

/// Lookahead used by [`monte_carlo_carry_sum`].
pub const MC_LOOKAHEAD: u64 = 64;
/// Largest tolerated share of carry-ambiguous digits in a simulation.
pub const MAX_AMBIGUITY: f64 = 0.01;

/// An exact rational that serializes as both its reduced fraction and an `f64`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn approx(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Exact", 2)?;
        st.serialize_field("exact", &self.0.to_string())?;
        st.serialize_field("approx", &self.approx())?;
        st.end()
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"0.2"`, `"1/5"` or `"3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Domain(format!("cannot read {text:?} as a rational number"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer =
        BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

fn check_open_unit(p: &BigRational) -> Result<()> {
    if p.is_positive() && *p < BigRational::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} outside (0,1)")))
    }
}

/// `(P, p')` with `p' = 2Qpq + P(p²+q²) = p² + 2pq³/(p²+q²)`, the probability
/// that a digit of the carry sum equals 1.
pub fn carry_digit_prob(p: &BigRational) -> Result<(BigRational, BigRational)> {
    check_open_unit(p)?;
    let q = BigRational::one() - p;
    let p2 = p * p;
    let q2 = &q * &q;
    let s = &p2 + &q2;
    let big_p = &p2 / &s;
    let big_q = BigRational::one() - &big_p;
    let two = BigRational::from_integer(2.into());
    let pprime = &two * &big_q * p * &q + &big_p * &s;
    Ok((big_p, pprime))
}

/// `(Q₀, P₀, p'₀)`: the same quantities conditioned on the next sum digit being 0.
pub fn conditional_digit_prob(p: &BigRational) -> Result<(BigRational, BigRational, BigRational)> {
    check_open_unit(p)?;
    let q = BigRational::one() - p;
    let p2 = p * p;
    let q2 = &q * &q;
    let two = BigRational::from_integer(2.into());
    let q0 = &q2 / (&p2 + &q2 + &two * &p2 * p / &q);
    let p0 = BigRational::one() - &q0;
    let pprime0 = &two * &q0 * p * &q + &p0 * (&p2 + &q2);
    Ok((q0, p0, pprime0))
}

/// Smallest `l >= 1` with `((1-p)/p)^l < p`, for `1/2 < p < 1`.
pub fn rauzy_obstruction_l(p: &BigRational) -> Result<u64> {
    check_open_unit(p)?;
    let half = BigRational::new(1.into(), 2.into());
    if *p <= half {
        return Err(Error::Domain(format!("p = {p} must exceed 1/2")));
    }
    // With p = a/b the inequality reads (b-a)^l · b < a^(l+1).
    let a = p.numer().clone();
    let b = p.denom().clone();
    let c = &b - &a;
    let holds = |l: u64| -> bool {
        let l = l as usize;
        num_traits::pow(c.clone(), l) * &b < num_traits::pow(a.clone(), l + 1)
    };
    let pf = to_f64(p);
    let estimate = (pf.ln() / ((1.0 - pf) / pf).ln()).ceil();
    let mut l = if estimate.is_finite() && estimate >= 1.0 {
        estimate as u64
    } else {
        1
    };
    while l > 1 && holds(l - 1) {
        l -= 1;
    }
    while !holds(l) {
        l += 1;
    }
    Ok(l)
}

/// Closed-form carry-sum quantities for one `p`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CarrySumStats {
    pub p: Exact,
    #[serde(rename = "P")]
    pub big_p: Exact,
    #[serde(rename = "Q")]
    pub big_q: Exact,
    pub pprime: Exact,
    #[serde(rename = "Q0")]
    pub q0: Exact,
    #[serde(rename = "P0")]
    pub p0: Exact,
    pub pprime0: Exact,
    /// Defined only for `p > 1/2`.
    pub l: Option<u64>,
}

impl CarrySumStats {
    pub fn new(p: &BigRational) -> Result<Self> {
        let (big_p, pprime) = carry_digit_prob(p)?;
        let (q0, p0, pprime0) = conditional_digit_prob(p)?;
        let l = rauzy_obstruction_l(p).ok();
        Ok(CarrySumStats {
            p: Exact(p.clone()),
            big_q: Exact(BigRational::one() - &big_p),
            big_p: Exact(big_p),
            pprime: Exact(pprime),
            q0: Exact(q0),
            p0: Exact(p0),
            pprime0: Exact(pprime0),
            l,
        })
    }
}

/// Float evaluation of `(P, p', Q₀, p'₀)` for plotting sweeps.
pub fn carry_probs_f64(p: f64) -> Result<[f64; 4]> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0,1)")));
    }
    let q = 1.0 - p;
    let s = p * p + q * q;
    let big_p = p * p / s;
    let pprime = 2.0 * (1.0 - big_p) * p * q + big_p * s;
    let q0 = q * q / (s + 2.0 * p * p * p / q);
    let pprime0 = 2.0 * q0 * p * q + (1.0 - q0) * s;
    Ok([big_p, pprime, q0, pprime0])
}

/// Simulated carry-sum statistics over `n` digits.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MonteCarloCarry {
    pub p: f64,
    pub seed: u64,
    pub n: u64,
    /// Digits excluded because their carry was undecided within the lookahead.
    pub ambiguous: u64,
    /// Decided digits tallied.
    pub samples: u64,
    pub freq_one: f64,
    /// Tallied pairs `(c_k, c_{k+1})` with `c_{k+1} = 0`.
    pub conditional_samples: u64,
    /// Frequency of `c_k = 1` among those pairs.
    pub freq_one_given_next_zero: f64,
    /// Pearson correlation of neighbouring sum digits.
    pub neighbour_correlation: f64,
}

impl MonteCarloCarry {
    /// Binomial standard deviation of `freq_one` around `target`.
    pub fn sigma(&self, target: f64) -> f64 {
        (target * (1.0 - target) / self.samples as f64).sqrt()
    }

    pub fn conditional_sigma(&self, target: f64) -> f64 {
        (target * (1.0 - target) / self.conditional_samples as f64).sqrt()
    }
}

/// Carry-adds two independent Bernoulli streams derived from `seed` and
/// tallies the digits of the sum.
pub fn monte_carlo_carry_sum(p: f64, seed: u64, n: u64) -> Result<MonteCarloCarry> {
    if n < 1000 {
        return Err(Error::Length(format!("need at least 1000 digits, got {n}")));
    }
    let root = CounterRng::new(seed);
    let a = Bernoulli::new(p, root.substream(0).word(0))?;
    let b = Bernoulli::new(p, root.substream(1).word(0))?;
    // One extra digit so every tallied position has a successor.
    let sum = stream_carry_add(&a, &b, n + 1, MC_LOOKAHEAD)?;
    let ambiguous = sum.digits[..n as usize]
        .iter()
        .filter(|d| d.is_none())
        .count() as u64;
    if ambiguous as f64 > MAX_AMBIGUITY * n as f64 {
        return Err(Error::DataQuality(format!(
            "{ambiguous} of {n} digits carry-ambiguous"
        )));
    }
    let (mut ones, mut samples) = (0u64, 0u64);
    let (mut cond_ones, mut cond_samples) = (0u64, 0u64);
    let (mut pairs, mut both, mut first, mut second) = (0u64, 0u64, 0u64, 0u64);
    for w in sum.digits.windows(2) {
        if let Some(c) = w[0] {
            samples += 1;
            ones += u64::from(c);
            if let Some(next) = w[1] {
                pairs += 1;
                first += u64::from(c);
                second += u64::from(next);
                both += u64::from(c & next);
                if next == 0 {
                    cond_samples += 1;
                    cond_ones += u64::from(c);
                }
            }
        }
    }
    let pf = |k: u64, t: u64| k as f64 / t as f64;
    let (m1, m2) = (pf(first, pairs), pf(second, pairs));
    let cov = pf(both, pairs) - m1 * m2;
    let denom = (m1 * (1.0 - m1) * m2 * (1.0 - m2)).sqrt();
    Ok(MonteCarloCarry {
        p,
        seed,
        n,
        ambiguous,
        samples,
        freq_one: pf(ones, samples),
        conditional_samples: cond_samples,
        freq_one_given_next_zero: pf(cond_ones, cond_samples),
        neighbour_correlation: if denom > 0.0 { cov / denom } else { 0.0 },
    })
}
