use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::seqcore::{IndexSet, SymbolicSequence};

pub const DEFAULT_GUARD: usize = 64;

/// A binary fixed-point number with a certified error bound.
///
/// The represented interval is `(value ± err) · 2^{-(frac + guard)}`: `frac`
/// digits are the requested precision, `guard` extra digits absorb rounding,
/// and `err` counts units in the last place (ulps) of the full
/// `frac + guard` digit string. Values are sign-magnitude; fractional digits
/// refer to the magnitude.
#[derive(Clone, PartialEq, Eq)]
pub struct FixedPointNumber {
    value: BigInt,
    frac: usize,
    guard: usize,
    err: u128,
}

fn saturate(v: &BigUint) -> u128 {
    v.to_u128().unwrap_or(u128::MAX)
}

/// Packs fractional digits `d_1..d_F` into the integer `Σ d_p 2^{F-p}`.
fn pack_fraction(digits: &[u8], scale: usize) -> BigUint {
    let mut words = vec![0u64; scale.div_ceil(64).max(1)];
    for (i, &d) in digits.iter().take(scale).enumerate() {
        if d != 0 {
            let bit = scale - 1 - i;
            words[bit / 64] |= 1 << (bit % 64);
        }
    }
    let limbs: Vec<u32> = words
        .iter()
        .flat_map(|w| [*w as u32, (*w >> 32) as u32])
        .collect();
    BigUint::new(limbs)
}

impl FixedPointNumber {
    fn with(value: BigInt, frac: usize, guard: usize, err: u128) -> Self {
        FixedPointNumber {
            value,
            frac,
            guard,
            err,
        }
    }

    pub fn zero(frac: usize, guard: usize) -> Self {
        Self::with(BigInt::zero(), frac, guard, 0)
    }

    pub fn from_integer(n: i64, frac: usize, guard: usize) -> Self {
        Self::with(BigInt::from(n) << (frac + guard), frac, guard, 0)
    }

    /// The exact dyadic `sign · (integer + 0.d_1 d_2 ...)`. Digits past
    /// `frac + guard` are truncated, with one ulp of error if any were nonzero.
    pub fn from_digits(
        negative: bool,
        integer: u64,
        fraction: &[u8],
        frac: usize,
        guard: usize,
    ) -> Result<Self> {
        if let Some(d) = fraction.iter().find(|&&d| d > 1) {
            return Err(Error::Alphabet(format!("binary digit expected, got {d}")));
        }
        let scale = frac + guard;
        let mag = (BigUint::from(integer) << scale) + pack_fraction(fraction, scale);
        let err = u128::from(fraction.iter().skip(scale).any(|&d| d == 1));
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Ok(Self::with(
            BigInt::from_biguint(sign, mag),
            frac,
            guard,
            err,
        ))
    }

    /// `integer + 0.s_1 s_2 ...` for an infinite binary sequence, truncated
    /// after `frac + guard` digits. The omitted tail is below one ulp.
    pub fn from_sequence(
        seq: &dyn SymbolicSequence,
        integer: u64,
        frac: usize,
        guard: usize,
    ) -> Result<Self> {
        let scale = frac + guard;
        let digits = seq.prefix(scale as u64)?;
        let mut x = Self::from_digits(false, integer, &digits, frac, guard)?;
        if seq.horizon().covers(scale as u64 + 1) {
            x.err = 1;
        }
        Ok(x)
    }

    /// Parses `"-1.0110"`-style binary literals as exact dyadics.
    pub fn parse_binary(text: &str, frac: usize, guard: usize) -> Result<Self> {
        let t = text.trim();
        let (negative, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int_text, frac_text) = t.split_once('.').unwrap_or((t, ""));
        let integer = if int_text.is_empty() {
            0
        } else {
            u64::from_str_radix(int_text, 2)
                .map_err(|e| Error::Domain(format!("bad integer part {int_text:?}: {e}")))?
        };
        let digits = frac_text
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Alphabet(format!("binary digit expected, got {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_digits(negative, integer, &digits, frac, guard)
    }

    #[inline]
    pub fn scale(&self) -> usize {
        self.frac + self.guard
    }

    pub fn frac_digits(&self) -> usize {
        self.frac
    }

    pub fn guard_digits(&self) -> usize {
        self.guard
    }

    /// Error bound in ulps of `2^{-(frac+guard)}`.
    pub fn error_ulps(&self) -> u128 {
        self.err
    }

    /// `log2` of the absolute error bound; `-inf` for exact values.
    pub fn error_bound_log2(&self) -> f64 {
        if self.err == 0 {
            f64::NEG_INFINITY
        } else {
            (self.err as f64).log2() - self.scale() as f64
        }
    }

    /// The scaled integer `value`, so that the number is `value · 2^{-scale}`.
    pub fn raw(&self) -> &BigInt {
        &self.value
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    /// Integer part of the magnitude.
    pub fn integer_part(&self) -> BigUint {
        self.value.magnitude() >> self.scale()
    }

    /// The first `count` fractional digits of the magnitude (zeros past the scale).
    pub fn fraction_digits(&self, count: usize) -> Vec<u8> {
        let mag = self.value.magnitude();
        let scale = self.scale();
        (1..=count)
            .map(|p| {
                if p > scale {
                    0
                } else {
                    u8::from(mag.bit((scale - p) as u64))
                }
            })
            .collect()
    }

    /// Number of leading fractional digits, at most `frac`, shared by every
    /// real number in the error interval (together with the integer part and
    /// sign). A carry-ambiguous interval certifies nothing.
    pub fn certified_digits(&self) -> usize {
        let scale = self.scale();
        let mag = self.value.magnitude();
        let e = BigUint::from(self.err);
        if self.err == 0 {
            return self.frac;
        }
        if &e > mag && !self.value.is_zero() {
            return 0;
        }
        let lo = if &e > mag { BigUint::zero() } else { mag - &e };
        if self.value.is_zero() {
            // Interval straddles zero: sign unknown, magnitudes agree below err.
            let hb = e.bits() as usize;
            return self.frac.min(scale.saturating_sub(hb));
        }
        let hi = mag + &e;
        let diff = &lo ^ &hi;
        let hb = diff.bits() as usize; // index of highest differing bit, plus one
        if hb > scale {
            return 0;
        }
        self.frac.min(scale - hb)
    }

    /// Converts to `(frac, guard)` digits. Dropped bits are truncated toward
    /// zero and cost one ulp when nonzero.
    pub fn rescale(&self, frac: usize, guard: usize) -> Self {
        let from = self.scale();
        let to = frac + guard;
        match to.cmp(&from) {
            Ordering::Equal => Self::with(self.value.clone(), frac, guard, self.err),
            Ordering::Greater => {
                let d = to - from;
                let err = BigUint::from(self.err) << d;
                Self::with(&self.value << d, frac, guard, saturate(&err))
            }
            Ordering::Less => {
                let d = from - to;
                let mag = self.value.magnitude();
                let kept = mag >> d;
                let lost = !(&kept << d).eq(mag);
                let e = BigUint::from(self.err);
                let scaled = (&e >> d) + u32::from(!(&(&e >> d) << d).eq(&e));
                let err = saturate(&scaled).saturating_add(u128::from(lost));
                Self::with(
                    BigInt::from_biguint(self.value.sign(), kept),
                    frac,
                    guard,
                    err,
                )
            }
        }
    }

    /// Absolute value bound `|value| + err` in ulps.
    fn magnitude_bound(&self) -> BigUint {
        self.value.magnitude() + BigUint::from(self.err)
    }

    /// Upper bound, in ulps of this number's scale, on the distance between
    /// any real in the error interval and the integer `k`.
    pub fn distance_to_integer_ulps(&self, k: i64) -> BigUint {
        let target = BigInt::from(k) << self.scale();
        (&self.value - target).magnitude() + BigUint::from(self.err)
    }

    /// `log2` of [`Self::distance_to_integer_ulps`] as an absolute distance.
    pub fn distance_to_integer_log2(&self, k: i64) -> f64 {
        let d = self.distance_to_integer_ulps(k);
        if d.is_zero() {
            return f64::NEG_INFINITY;
        }
        biguint_log2(&d) - self.scale() as f64
    }

    /// Fractional part in `[0, 1)` (two's-complement reduction for negatives).
    pub fn fract(&self) -> Self {
        let modulus = BigInt::one() << self.scale();
        Self::with(
            self.value.mod_floor(&modulus),
            self.frac,
            self.guard,
            self.err,
        )
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.scale().saturating_sub(60);
        let top = (&self.value >> shift).to_f64().unwrap_or(f64::NAN);
        top * (-((self.scale() - shift) as f64)).exp2()
    }
}

pub(crate) fn biguint_log2(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().unwrap_or(0.0).log2() + shift as f64
}

impl fmt::Debug for FixedPointNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.frac.min(32);
        let digits: String = self
            .fraction_digits(shown)
            .iter()
            .map(|d| char::from(b'0' + d))
            .collect();
        write!(
            f,
            "{}{}.{}{} (frac={}, guard={}, err={} ulp)",
            if self.is_negative() { "-" } else { "" },
            self.integer_part().to_str_radix(2),
            digits,
            if shown < self.frac { "…" } else { "" },
            self.frac,
            self.guard,
            self.err
        )
    }
}

fn align(a: &FixedPointNumber, b: &FixedPointNumber) -> (FixedPointNumber, FixedPointNumber) {
    let frac = a.frac.min(b.frac);
    let guard = a.guard.min(b.guard);
    (a.rescale(frac, guard), b.rescale(frac, guard))
}

/// `a ↰ b`: exact big-integer addition after aligning to the coarser precision.
pub fn carry_add(a: &FixedPointNumber, b: &FixedPointNumber) -> FixedPointNumber {
    let (a, b) = align(a, b);
    FixedPointNumber::with(
        &a.value + &b.value,
        a.frac,
        a.guard,
        a.err.saturating_add(b.err),
    )
}

/// [`carry_add`] without implicit alignment.
pub fn carry_add_strict(a: &FixedPointNumber, b: &FixedPointNumber) -> Result<FixedPointNumber> {
    if (a.frac, a.guard) != (b.frac, b.guard) {
        return Err(Error::Precision(format!(
            "operands have (frac, guard) = ({}, {}) and ({}, {})",
            a.frac, a.guard, b.frac, b.guard
        )));
    }
    Ok(carry_add(a, b))
}

/// `x · p / q` rounded toward zero to `frac` digits (guard digits kept from `x`).
pub fn mul_rational(x: &FixedPointNumber, p: i64, q: u64, frac: usize) -> Result<FixedPointNumber> {
    if q == 0 {
        return Err(Error::Domain("denominator q must be positive".into()));
    }
    if p == 0 {
        return Err(Error::Domain("numerator p must be nonzero".into()));
    }
    let mag = x.value.magnitude() * BigUint::from(p.unsigned_abs());
    let (quot, rem) = mag.div_rem(&BigUint::from(q));
    let err_num = BigUint::from(x.err) * BigUint::from(p.unsigned_abs());
    let (err_q, err_r) = err_num.div_rem(&BigUint::from(q));
    let err = saturate(&err_q)
        .saturating_add(u128::from(!err_r.is_zero()))
        .saturating_add(u128::from(!rem.is_zero()));
    let negative = x.is_negative() != (p < 0);
    let sign = if quot.is_zero() {
        Sign::NoSign
    } else if negative {
        Sign::Minus
    } else {
        Sign::Plus
    };
    let out = FixedPointNumber::with(BigInt::from_biguint(sign, quot), x.frac, x.guard, err);
    Ok(out.rescale(frac, x.guard))
}

/// Full product at `frac` digits plus the common guard width.
///
/// Both operands must carry at least `frac + guard` digits.
pub fn mul(x: &FixedPointNumber, y: &FixedPointNumber, frac: usize) -> Result<FixedPointNumber> {
    let guard = x.guard.min(y.guard);
    let scale = frac + guard;
    if x.scale() < scale || y.scale() < scale {
        return Err(Error::Precision(format!(
            "product at {scale} digits needs operands with at least that many; got {} and {}",
            x.scale(),
            y.scale()
        )));
    }
    let x = x.rescale(frac, guard);
    let y = y.rescale(frac, guard);
    let prod = &x.value * &y.value;
    let sign = prod.sign();
    let mag = prod.magnitude();
    let kept = mag >> scale;
    let lost = !(&kept << scale).eq(mag);
    let ex = BigUint::from(x.err);
    let ey = BigUint::from(y.err);
    let spread = x.magnitude_bound() * &ey + y.value.magnitude() * &ex;
    let spread_ulps = (&spread >> scale) + u32::from(!(&(&spread >> scale) << scale).eq(&spread));
    let err = saturate(&spread_ulps).saturating_add(u128::from(lost));
    let sign = if kept.is_zero() { Sign::NoSign } else { sign };
    Ok(FixedPointNumber::with(
        BigInt::from_biguint(sign, kept),
        frac,
        guard,
        err,
    ))
}

/// Mod-1 negation of `x ∈ [0, 1)`: mirror every digit, then add one ulp.
pub fn neg(x: &FixedPointNumber) -> Result<FixedPointNumber> {
    if x.is_negative() || !x.integer_part().is_zero() {
        return Err(Error::Domain("neg expects a value in [0, 1)".into()));
    }
    let modulus = BigInt::one() << x.scale();
    let value = (&modulus - &x.value).mod_floor(&modulus);
    Ok(FixedPointNumber::with(value, x.frac, x.guard, x.err))
}

/// `Σ_{s ∈ shifts, s <= frac+guard} 2^{-s} · (0.seq)`.
///
/// Each shifted copy of the truncated sequence misses less than one ulp and
/// the omitted shifts contribute less than two more.
pub fn shifted_sum(
    seq: &dyn SymbolicSequence,
    shifts: &dyn IndexSet,
    frac: usize,
    guard: usize,
) -> Result<FixedPointNumber> {
    let scale = frac + guard;
    let digits = seq.prefix(scale as u64)?;
    let base = pack_fraction(&digits, scale);
    let mut active: Vec<u64> = shifts.elements_up_to(scale as u64);
    if shifts.contains(0) {
        active.insert(0, 0);
    }
    let total = active
        .iter()
        .fold(BigUint::zero(), |acc, &s| acc + (&base >> s as usize));
    let err = active.len() as u128 + 2;
    Ok(FixedPointNumber::with(
        BigInt::from(total),
        frac,
        guard,
        err,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{y_digit, FiniteSums, YFraction};
    use crate::seqcore::{DigitString, FiniteSet};
    use proptest::prelude::*;

    fn lit(s: &str) -> FixedPointNumber {
        FixedPointNumber::parse_binary(s, 8, 8).unwrap()
    }

    #[test]
    fn carry_chain() {
        let s = carry_add(&lit("0.0111"), &lit("0.0001"));
        assert_eq!(s.fraction_digits(4), [1, 0, 0, 0]);
        assert_eq!(s.error_ulps(), 0);
        let x = lit("0.1011");
        assert_eq!(carry_add(&x, &FixedPointNumber::zero(8, 8)), x);
    }

    #[test]
    fn strict_add_rejects_mismatch() {
        let a = FixedPointNumber::parse_binary("0.1", 4, 4).unwrap();
        let b = FixedPointNumber::parse_binary("0.1", 5, 4).unwrap();
        assert!(matches!(carry_add_strict(&a, &b), Err(Error::Precision(_))));
        let s = carry_add(&a, &b);
        assert_eq!((s.frac_digits(), s.integer_part()), (4, BigUint::one()));
    }

    #[test]
    fn rational_multiplication_examples() {
        let x = lit("0.1011");
        assert_eq!(mul_rational(&x, 1, 1, 8).unwrap(), x);
        let doubled = mul_rational(&x, 2, 1, 8).unwrap();
        assert_eq!(doubled.integer_part(), BigUint::one());
        assert_eq!(doubled.fraction_digits(4), [0, 1, 1, 0]);
        assert!(matches!(mul_rational(&x, 1, 0, 8), Err(Error::Domain(_))));
        let third = mul_rational(&FixedPointNumber::from_integer(1, 8, 8), 1, 3, 8).unwrap();
        assert_eq!(third.fraction_digits(8), [0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(third.error_ulps(), 1);
        let neg_third = mul_rational(&FixedPointNumber::from_integer(1, 8, 8), -1, 3, 8).unwrap();
        assert!(neg_third.is_negative());
    }

    #[test]
    fn z_leading_digits() {
        let y = FixedPointNumber::from_sequence(&YFraction, 1, 4096, DEFAULT_GUARD).unwrap();
        let z = mul_rational(&y, 4, 3, 4096).unwrap();
        assert_eq!(z.integer_part(), BigUint::one());
        assert_eq!(z.fraction_digits(10), [1, 0, 1, 0, 1, 1, 0, 0, 0, 1]);
        assert!(z.certified_digits() >= 4000);
    }

    #[test]
    fn products() {
        let p = mul(&lit("0.01"), &lit("0.1"), 8).unwrap();
        assert_eq!(p.fraction_digits(4), [0, 0, 1, 0]);
        assert_eq!(p.error_ulps(), 0);
        let x = lit("0.1101");
        assert_eq!(
            mul(&x, &FixedPointNumber::from_integer(1, 8, 8), 8).unwrap(),
            x
        );
        let coarse = FixedPointNumber::parse_binary("0.1", 4, 4).unwrap();
        assert!(matches!(mul(&coarse, &x, 8), Err(Error::Precision(_))));
    }

    #[test]
    fn negation() {
        assert_eq!(neg(&lit("0.101")).unwrap().fraction_digits(3), [0, 1, 1]);
        assert_eq!(neg(&lit("0.0")).unwrap(), lit("0.0"));
        assert!(neg(&lit("1.0")).is_err());
        assert!(neg(&lit("-0.1")).is_err());
        // Before the final ulp, neg(x) is the mirror of x.
        let x = lit("0.10110010");
        let n = neg(&x).unwrap();
        let mirrored: Vec<u8> = x.fraction_digits(16).iter().map(|d| 1 - d).collect();
        let mut back = n.raw().clone();
        back -= 1;
        let m = FixedPointNumber::with(back, 8, 8, 0);
        assert_eq!(m.fraction_digits(16), mirrored);
    }

    #[test]
    fn shifted_sum_examples() {
        let seq = DigitString::binary(vec![1, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let s = shifted_sum(&seq, &FiniteSet::new(vec![0, 2]), 4, 4).unwrap();
        assert_eq!(s.fraction_digits(4), [1, 0, 1, 0]);

        // Σ_{s∈S} 2^{-s} · 1/2 = y/2: digit p of the sum is y's coordinate p-1.
        let one = DigitString::binary(
            std::iter::once(1)
                .chain(std::iter::repeat(0))
                .take(3000)
                .collect(),
        )
        .unwrap();
        let half_y = shifted_sum(&one, &FiniteSums, 2900, 64).unwrap();
        let got = half_y.fraction_digits(2900);
        for p in 1..=2900u64 {
            assert_eq!(got[p as usize - 1], y_digit(p - 1), "p={p}");
        }
    }

    #[test]
    fn certified_digit_accounting() {
        let exact = lit("0.1011");
        assert_eq!(exact.certified_digits(), 8);
        // 0.0111...1 ± 1 ulp straddles 0.1: nothing certified past the carry.
        let mut v = FixedPointNumber::parse_binary("0.0111111111111111", 8, 8).unwrap();
        v.err = 1;
        assert_eq!(v.certified_digits(), 0);
        let mut w = lit("0.1011");
        // [0.1010111..., 0.1011000...011]: the fourth digit is no longer pinned.
        w.err = 3;
        assert_eq!(w.certified_digits(), 3);
    }

    #[test]
    fn rescale_tracks_truncation() {
        let x = FixedPointNumber::parse_binary("0.10110111", 4, 4).unwrap();
        let y = x.rescale(4, 0);
        assert_eq!(y.fraction_digits(4), [1, 0, 1, 1]);
        assert_eq!(y.error_ulps(), 1);
        let z = x.rescale(6, 6);
        assert_eq!(z.error_ulps(), 0);
        assert_eq!(z.fraction_digits(8), x.fraction_digits(8));
    }

    fn arb_fixed() -> impl Strategy<Value = FixedPointNumber> {
        (any::<bool>(), 0u64..4, prop::collection::vec(0u8..2, 0..24))
            .prop_map(|(neg, i, d)| FixedPointNumber::from_digits(neg, i, &d, 12, 12).unwrap())
    }

    proptest! {
        #[test]
        fn add_commutes_and_associates(a in arb_fixed(), b in arb_fixed(), c in arb_fixed()) {
            prop_assert_eq!(carry_add(&a, &b), carry_add(&b, &a));
            prop_assert_eq!(
                carry_add(&carry_add(&a, &b), &c),
                carry_add(&a, &carry_add(&b, &c))
            );
        }

        #[test]
        fn negation_is_mod_one_inverse(d in prop::collection::vec(0u8..2, 1..40)) {
            let x = FixedPointNumber::from_digits(false, 0, &d, 20, 20).unwrap();
            let s = carry_add(&x, &neg(&x).unwrap()).fract();
            prop_assert!(s.fraction_digits(20).iter().all(|&d| d == 0));
        }

        #[test]
        fn rational_round_trip(d in prop::collection::vec(0u8..2, 1..64), p in 1i64..=1000, q in 1u64..=1000) {
            let x = FixedPointNumber::from_digits(false, 0, &d, 48, 16).unwrap();
            let back = mul_rational(&mul_rational(&x, p, q, 48).unwrap(), q as i64, p as u64, 48).unwrap();
            let diff = (back.raw() - x.raw()).magnitude().clone();
            // Two ulps at the requested precision; guard digits absorb the rest.
            prop_assert!(diff <= BigUint::from(2u8) << 16usize, "diff {diff} guard ulps");
            prop_assert!(BigUint::from(back.error_ulps()) >= diff);
        }
    }
}
