//! Algebraic dynamics at desk scale: coordinatewise addition mod `p`,
//! linear cellular automata and toral endomorphism orbits.

mod toral;

pub use toral::{toral_orbit, OrbitStart, ToralMap, ToralOrbit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqcore::{Alphabet, DigitString, Horizon, SeqRef, SymbolicSequence};

pub fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// Digit-wise `(a + b) mod p` of two sequences over the same alphabet. No carries.
pub struct ModSum {
    a: SeqRef,
    b: SeqRef,
    modulus: u16,
}

impl SymbolicSequence for ModSum {
    fn alphabet(&self) -> Alphabet {
        self.a.alphabet()
    }
    fn horizon(&self) -> Horizon {
        self.a.horizon().min(self.b.horizon())
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        ((u16::from(self.a.digit_at(position)) + u16::from(self.b.digit_at(position)))
            % self.modulus) as u8
    }
}

pub fn modp_add(a: SeqRef, b: SeqRef) -> Result<ModSum> {
    let (ra, rb) = (a.alphabet().size(), b.alphabet().size());
    if ra != rb {
        return Err(Error::ModulusMismatch(ra.into(), rb.into()));
    }
    Ok(ModSum { a, b, modulus: ra })
}

/// Digit-wise additive inverse `(p - d) mod p`.
pub fn modp_neg(digits: &DigitString) -> DigitString {
    let p = digits.alphabet().size();
    let out = digits
        .as_slice()
        .iter()
        .map(|&d| ((p - u16::from(d)) % p) as u8)
        .collect();
    DigitString::new(out, digits.alphabet()).expect("residues stay in the alphabet")
}

/// `(Ps)_n = Σ_j a_j s_{n+j} mod p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCA {
    modulus: u16,
    coeffs: Vec<u16>,
}

impl LinearCA {
    pub fn new(modulus: u16, coeffs: Vec<i64>) -> Result<Self> {
        if !is_prime(modulus.into()) || Alphabet::new(modulus).is_err() {
            return Err(Error::Domain(format!(
                "modulus {modulus} is not a prime up to 256"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::Domain(
                "a cellular automaton needs coefficients".into(),
            ));
        }
        let m = i64::from(modulus);
        let coeffs = coeffs.into_iter().map(|a| a.rem_euclid(m) as u16).collect();
        Ok(LinearCA { modulus, coeffs })
    }

    pub fn modulus(&self) -> u16 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    /// Radius to the right: the largest coefficient index.
    pub fn reach(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    /// Some coefficient beyond index 0 is nonzero.
    pub fn is_shift_dependent(&self) -> bool {
        self.coeffs[1..].iter().any(|&a| a != 0)
    }

    fn combine(&self, window: impl Iterator<Item = u8>) -> u8 {
        let sum: u32 = self
            .coeffs
            .iter()
            .zip(window)
            .map(|(&a, d)| u32::from(a) * u32::from(d))
            .sum();
        (sum % u32::from(self.modulus)) as u8
    }
}

/// Lazy image of a sequence under a [`LinearCA`].
pub struct CaImage {
    ca: LinearCA,
    inner: SeqRef,
}

impl CaImage {
    pub fn new(ca: LinearCA, inner: SeqRef) -> Result<Self> {
        if inner.alphabet().size() != ca.modulus {
            return Err(Error::ModulusMismatch(
                ca.modulus.into(),
                inner.alphabet().size().into(),
            ));
        }
        Ok(CaImage { ca, inner })
    }
}

impl SymbolicSequence for CaImage {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }
    fn horizon(&self) -> Horizon {
        match self.inner.horizon() {
            Horizon::Finite(h) => Horizon::Finite(h.saturating_sub(self.ca.reach())),
            Horizon::Unbounded => Horizon::Unbounded,
        }
    }
    fn digit_at(&self, position: u64) -> u8 {
        self.ca
            .combine((0..=self.ca.reach()).map(|j| self.inner.digit_at(position + j)))
    }
}

/// First `n` digits of the automaton image of `seq`.
pub fn apply_ca(ca: &LinearCA, seq: &dyn SymbolicSequence, n: u64) -> Result<DigitString> {
    if seq.alphabet().size() != ca.modulus {
        return Err(Error::ModulusMismatch(
            ca.modulus.into(),
            seq.alphabet().size().into(),
        ));
    }
    let k = ca.reach() as usize;
    let input = seq.prefix(n + k as u64)?;
    let out = input
        .windows(k + 1)
        .map(|w| ca.combine(w.iter().copied()))
        .collect();
    DigitString::new(out, seq.alphabet())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::switch_density;
    use crate::generators::{Bernoulli, Kappa, Uniform};
    use crate::seqcore::{prefix_frequency, Block, Constant, Periodic, Shifted};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ternary(d: Vec<u8>) -> SeqRef {
        Arc::new(DigitString::new(d, Alphabet::new(3).unwrap()).unwrap())
    }

    #[test]
    fn modp_examples() {
        let s = modp_add(ternary(vec![0, 1, 2, 2]), ternary(vec![1, 2, 2, 1])).unwrap();
        assert_eq!(s.prefix(4).unwrap(), [1, 0, 1, 0]);
        let zero: SeqRef = Arc::new(Constant {
            digit: 0,
            alphabet: Alphabet::new(3).unwrap(),
        });
        let s = modp_add(ternary(vec![2, 0, 1]), zero).unwrap();
        assert_eq!(s.prefix(3).unwrap(), [2, 0, 1]);
        assert_eq!(s.horizon(), Horizon::Finite(3));
        let err = modp_add(ternary(vec![0]), Arc::new(Kappa)).err().unwrap();
        assert!(matches!(err, Error::ModulusMismatch(3, 2)));
    }

    #[test]
    fn ca_examples() {
        let xor = LinearCA::new(2, vec![1, 1]).unwrap();
        let s = DigitString::binary(vec![0, 1, 1, 0]).unwrap();
        assert_eq!(apply_ca(&xor, &s, 3).unwrap().as_slice(), [1, 0, 1]);
        assert!(matches!(apply_ca(&xor, &s, 4), Err(Error::Horizon { .. })));
        let id = LinearCA::new(2, vec![1]).unwrap();
        assert!(!id.is_shift_dependent());
        assert_eq!(
            apply_ca(&id, &Kappa, 64).unwrap().as_slice(),
            Kappa.prefix(64).unwrap()
        );
        assert!(LinearCA::new(4, vec![1]).is_err());
        assert!(LinearCA::new(3, vec![]).is_err());
        assert_eq!(LinearCA::new(3, vec![-1, 4]).unwrap().coeffs(), [2, 1]);
    }

    #[test]
    fn switch_map_counts_switches() {
        let xor = LinearCA::new(2, vec![1, 1]).unwrap();
        let n = 1 << 14;
        let image = apply_ca(&xor, &Kappa, n - 1).unwrap();
        let ones = prefix_frequency(&image, &Block::binary("1").unwrap(), n - 1).unwrap();
        assert_eq!(ones, switch_density(&Kappa, n).unwrap());
    }

    #[test]
    fn lazy_image_matches_materialized() {
        let ca = LinearCA::new(3, vec![1, 2, 1]).unwrap();
        let u: SeqRef = Arc::new(Uniform::new(Alphabet::new(3).unwrap(), 9));
        let lazy = CaImage::new(ca.clone(), u.clone()).unwrap();
        assert_eq!(
            lazy.prefix(500).unwrap(),
            apply_ca(&ca, u.as_ref(), 500).unwrap().as_slice()
        );
    }

    #[test]
    fn translation_keeps_uniform_two_blocks() {
        let r3 = Alphabet::new(3).unwrap();
        let u: SeqRef = Arc::new(Uniform::new(r3, 17));
        let per: SeqRef = Arc::new(Periodic::new(Block::new(vec![0, 1, 2], r3).unwrap()));
        let sum = modp_add(u, per).unwrap();
        let n = 100_000u64;
        let measure =
            crate::seqcore::empirical_measure(&sum, 2, &crate::seqcore::Window::Prefix(n)).unwrap();
        let total = measure.total as f64;
        let sigma = (1.0 / 9.0 * 8.0 / 9.0 / total).sqrt();
        for code in 0..9 {
            let b = Block::from_code(code, 2, r3);
            let f = measure.fraction(&b).as_f64();
            assert!((f - 1.0 / 9.0).abs() <= 3.0 * sigma, "{b}: {f}");
        }
    }

    proptest! {
        #[test]
        fn modp_is_a_group(
            triples in prop::collection::vec((0u8..5, 0u8..5, 0u8..5), 1..64),
        ) {
            let r5 = Alphabet::new(5).unwrap();
            let col = |f: fn(&(u8, u8, u8)) -> u8| -> SeqRef {
                Arc::new(DigitString::new(triples.iter().map(f).collect(), r5).unwrap())
            };
            let (a, b, c) = (col(|t| t.0), col(|t| t.1), col(|t| t.2));
            let n = triples.len() as u64;
            let ab: SeqRef = Arc::new(modp_add(a.clone(), b.clone()).unwrap());
            let bc: SeqRef = Arc::new(modp_add(b.clone(), c.clone()).unwrap());
            let left = modp_add(ab, c.clone()).unwrap().prefix(n).unwrap();
            let right = modp_add(a.clone(), bc).unwrap().prefix(n).unwrap();
            prop_assert_eq!(left, right);
            let ba = modp_add(b.clone(), a.clone()).unwrap().prefix(n).unwrap();
            prop_assert_eq!(ba, modp_add(a.clone(), b).unwrap().prefix(n).unwrap());
            let a_digits = DigitString::from_sequence(a.as_ref(), n).unwrap();
            let inverse: SeqRef = Arc::new(modp_neg(&a_digits));
            let zero = modp_add(a, inverse).unwrap().prefix(n).unwrap();
            prop_assert!(zero.iter().all(|&d| d == 0));
        }

        #[test]
        fn ca_commutes_with_shift(
            coeffs in prop::collection::vec(-3i64..4, 1..5),
            seed in any::<u64>(),
            shift in 0u64..20,
        ) {
            let ca = LinearCA::new(2, coeffs).unwrap();
            let s: SeqRef = Arc::new(Bernoulli::new(0.5, seed).unwrap());
            let shifted = Shifted::new(s.clone(), shift);
            let n = 200;
            let shifted_image = apply_ca(&ca, &shifted, n).unwrap();
            let image = apply_ca(&ca, s.as_ref(), n + shift).unwrap();
            prop_assert_eq!(shifted_image.as_slice(), &image.as_slice()[shift as usize..]);
        }
    }
}
