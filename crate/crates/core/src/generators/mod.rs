//! Random-access digit generators.
//!
//! Every generator is a pure function of its parameters: querying the same
//! position twice yields the same digit, in any order and from any thread.

mod prng;
mod schedule;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grayorder::gray_bit;
use crate::seqcore::{Alphabet, Block, Horizon, IndexSet, SeqRef, SymbolicSequence};

pub use prng::{mix, CounterRng};
pub use schedule::{FiniteSums, Level, LevelSchedule, LEVELS};

/// `B^3_1`, the first `n_3 = 2048` digits of κ.
fn kappa_base() -> &'static [u8] {
    static BASE: OnceLock<Vec<u8>> = OnceLock::new();
    BASE.get_or_init(|| {
        // B^1_1 = 01; B^{k+1}_1 lists alt_block(n_k, l, B^k_1) for l = 1..2^{n_k}.
        let mut block = vec![0u8, 1];
        while block.len() < LEVELS[2] as usize {
            let n = block.len();
            let mut next = Vec::with_capacity(n << n);
            for j in 0..1u128 << n {
                let flip = u8::from(j % 2 == 1);
                next.extend((0..n).map(|c| block[c] ^ gray_bit(n, j, c) ^ flip));
            }
            block = next;
        }
        block
    })
}

/// Digit `p >= 1` of κ.
///
/// With `k` minimal such that `p <= n_{k+1}`, position `p` lies in chunk
/// `l = ceil(p / n_k)` of `B^{k+1}_1`, which is the `l`-th block of the
/// alternated Gray ordering of `{0,1}^{n_k}` starting at `B^k_1`.
#[inline]
pub fn kappa_digit(p: u64) -> u8 {
    debug_assert!(p >= 1);
    let base = kappa_base();
    if p <= LEVELS[2] {
        return base[(p - 1) as usize];
    }
    // Every u64 position lies below n_4, so the chunk size is n_3.
    let n = LEVELS[2] as usize;
    let j = u128::from((p - 1) / LEVELS[2]);
    let c = ((p - 1) % LEVELS[2]) as usize;
    base[c] ^ gray_bit(n, j, c) ^ u8::from(j % 2 == 1)
}

/// The κ sequence.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kappa;

impl SymbolicSequence for Kappa {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        kappa_digit(position)
    }
}

/// Coordinate `p` of `y = Σ_{s ∈ S} 2^{-s}`: coordinate 0 is the integer
/// part, coordinates `>= 1` the fractional digits.
#[inline]
pub fn y_digit(p: u64) -> u8 {
    u8::from(LevelSchedule::contains(p))
}

/// Fractional digits of `y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct YFraction;

impl SymbolicSequence for YFraction {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    fn digit_at(&self, position: u64) -> u8 {
        y_digit(position)
    }
}

/// Digit `p >= 1` of `v`, built from `B_1 = 11`, `B_{k+1} = (B_k 0^{n_k})^{n_{k+1}/(2 n_k)}`.
pub fn v_digit(p: u64) -> u8 {
    debug_assert!(p >= 1);
    let mut p = p;
    loop {
        if p <= LEVELS[0] {
            return 1;
        }
        // Largest materialized n_k below p; positions never exceed n_4.
        let nk = *LEVELS.iter().rev().find(|&&n| n < p).expect("p > n_1");
        let r = (p - 1) % (2 * nk) + 1;
        if r > nk {
            return 0;
        }
        p = r;
    }
}

/// Fractional digits of `v`, the reciprocal of `y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VFraction;

impl SymbolicSequence for VFraction {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    fn digit_at(&self, position: u64) -> u8 {
        v_digit(position)
    }
}

/// I.i.d. binary digits with `P(1) = p` from the counter-based generator.
///
/// Digit `i` is 1 iff `word(i) < floor(p · 2^64)`.
#[derive(Debug, Clone, Copy)]
pub struct Bernoulli {
    threshold: u64,
    p: f64,
    rng: CounterRng,
    horizon: Horizon,
}

impl Bernoulli {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "Bernoulli parameter {p} outside (0,1)"
            )));
        }
        Ok(Bernoulli {
            // Scaling by a power of two is exact, so the cast is the floor.
            threshold: (p * 18_446_744_073_709_551_616.0) as u64,
            p,
            rng: CounterRng::new(seed),
            horizon: Horizon::Unbounded,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn truncated(mut self, n: u64) -> Self {
        self.horizon = Horizon::Finite(n);
        self
    }
}

impl SymbolicSequence for Bernoulli {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }
    fn horizon(&self) -> Horizon {
        self.horizon
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        u8::from(self.rng.word(position) < self.threshold)
    }
}

/// `N` Bernoulli(`p`) digits, reproducible per `(p, seed)`.
pub fn bernoulli_stream(p: f64, seed: u64, n: u64) -> Result<Bernoulli> {
    if n == 0 {
        return Err(Error::Length("stream length must be at least 1".into()));
    }
    Ok(Bernoulli::new(p, seed)?.truncated(n))
}

/// Uniform i.i.d. digits over an alphabet of size `r`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    alphabet: Alphabet,
    rng: CounterRng,
}

impl Uniform {
    pub fn new(alphabet: Alphabet, seed: u64) -> Self {
        Uniform {
            alphabet,
            rng: CounterRng::new(seed),
        }
    }
}

impl SymbolicSequence for Uniform {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        self.rng.digit(position, self.alphabet.size())
    }
}

/// Base-`r` representations of `1, 2, 3, ...` concatenated.
#[derive(Debug, Clone, Copy)]
pub struct Champernowne {
    alphabet: Alphabet,
    horizon: Horizon,
}

impl Champernowne {
    pub fn new(alphabet: Alphabet) -> Self {
        Champernowne {
            alphabet,
            horizon: Horizon::Unbounded,
        }
    }
}

impl SymbolicSequence for Champernowne {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        self.horizon
    }
    fn digit_at(&self, position: u64) -> u8 {
        let r = u128::from(self.alphabet.size());
        let mut offset = u128::from(position - 1);
        let mut width = 1u32;
        let mut first = 1u128;
        loop {
            let span = (r - 1) * first * u128::from(width);
            if offset < span {
                break;
            }
            offset -= span;
            width += 1;
            first *= r;
        }
        let number = first + offset / u128::from(width);
        let idx = (offset % u128::from(width)) as u32;
        ((number / r.pow(width - 1 - idx)) % r) as u8
    }
}

/// The first `n` Champernowne digits in base `r`.
pub fn champernowne_digits(r: u16, n: u64) -> Result<Champernowne> {
    Ok(Champernowne {
        alphabet: Alphabet::new(r)?,
        horizon: Horizon::Finite(n),
    })
}

/// Digits off the support of a [`PeriodicSparse`] sequence.
#[derive(Clone)]
pub enum Filler {
    Constant(u8),
    Sequence(SeqRef),
}

/// Cycles `pattern` along the members of `set`; elsewhere digits come from the filler.
#[derive(Clone)]
pub struct PeriodicSparse {
    pattern: Block,
    set: Arc<dyn IndexSet>,
    filler: Filler,
}

impl SymbolicSequence for PeriodicSparse {
    fn alphabet(&self) -> Alphabet {
        self.pattern.alphabet()
    }
    fn horizon(&self) -> Horizon {
        match &self.filler {
            Filler::Constant(_) => Horizon::Unbounded,
            Filler::Sequence(s) => s.horizon(),
        }
    }
    fn digit_at(&self, position: u64) -> u8 {
        if self.set.contains(position) {
            let rank = self.set.count_up_to(position);
            let d = self.pattern.digits();
            d[((rank - 1) % d.len() as u64) as usize]
        } else {
            match &self.filler {
                Filler::Constant(c) => *c,
                Filler::Sequence(s) => s.digit_at(position),
            }
        }
    }
}

pub fn periodic_sparse(
    pattern: Block,
    set: Arc<dyn IndexSet>,
    filler: Filler,
) -> Result<PeriodicSparse> {
    match &filler {
        Filler::Constant(c) if !pattern.alphabet().contains(*c) => {
            return Err(Error::Alphabet(format!(
                "filler digit {c} outside the pattern alphabet"
            )));
        }
        Filler::Sequence(s) if s.alphabet() != pattern.alphabet() => {
            return Err(Error::Alphabet(
                "filler sequence alphabet differs from the pattern".into(),
            ));
        }
        _ => {}
    }
    Ok(PeriodicSparse {
        pattern,
        set,
        filler,
    })
}

/// Serializable description of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorKind {
    Kappa,
    Y,
    V,
    Bernoulli { p: f64, seed: u64 },
    Uniform { r: u16, seed: u64 },
    Champernowne { r: u16 },
}

impl GeneratorKind {
    pub fn build(&self) -> Result<SeqRef> {
        Ok(match *self {
            GeneratorKind::Kappa => Arc::new(Kappa),
            GeneratorKind::Y => Arc::new(YFraction),
            GeneratorKind::V => Arc::new(VFraction),
            GeneratorKind::Bernoulli { p, seed } => Arc::new(Bernoulli::new(p, seed)?),
            GeneratorKind::Uniform { r, seed } => Arc::new(Uniform::new(Alphabet::new(r)?, seed)),
            GeneratorKind::Champernowne { r } => Arc::new(Champernowne::new(Alphabet::new(r)?)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grayorder::alt_block;
    use crate::seqcore::{prefix_frequency, AllPositions, Frequency, Multiples};

    const KAPPA_PREFIX: &str = "01111000100001100111101110000101011111101000000001111101";

    #[test]
    fn kappa_prefix_matches() {
        let want = Block::binary(KAPPA_PREFIX).unwrap();
        assert_eq!(Kappa.prefix_block(56).unwrap(), want);
        assert_eq!(Kappa.digits(9, 8).unwrap(), [1, 0, 0, 0, 0, 1, 1, 0]);
        assert_eq!(Kappa.digits(49, 8).unwrap(), [0, 1, 1, 1, 1, 1, 0, 1]);
    }

    /// Recursive definition of the prefix `B^{k+1}_1`, chunk by chunk.
    fn level_oracle(prev: &Block) -> Vec<u8> {
        let n = prev.len();
        (1..=1u128 << n)
            .flat_map(|l| alt_block(n, l, prev).unwrap().into_digits())
            .collect()
    }

    #[test]
    fn kappa_levels_match_recursion() {
        let b1 = Block::binary("01").unwrap();
        let b2 = level_oracle(&b1);
        assert_eq!(Kappa.prefix(8).unwrap(), b2);
        let b2 = Block::new(b2, Alphabet::BINARY).unwrap();
        let b3 = level_oracle(&b2);
        assert_eq!(Kappa.prefix(2048).unwrap(), b3);
        // Level 4 spot checks against alt_block on B^3_1.
        let b3 = Block::new(b3, Alphabet::BINARY).unwrap();
        for l in [1u128, 2, 3, 4, 97, 512, 1 << 20, (1 << 40) + 7] {
            let chunk = alt_block(2048, l, &b3).unwrap();
            let start = (l as u64 - 1) * 2048 + 1;
            assert_eq!(
                Kappa.digits(start, 2048).unwrap(),
                chunk.digits(),
                "chunk {l}"
            );
        }
        assert!(Kappa.digit(u64::MAX).is_ok());
    }

    #[test]
    fn y_digits() {
        assert_eq!((y_digit(0), y_digit(1), y_digit(2)), (1, 0, 1));
        assert_eq!(y_digit(10), 1);
        assert_eq!(y_digit(4), 0);
        let ones: Vec<u64> = (1..=2059).filter(|&p| y_digit(p) == 1).collect();
        assert_eq!(ones, [2, 8, 10, 2048, 2050, 2056, 2058]);
        let one = Block::binary("1").unwrap();
        assert_eq!(
            prefix_frequency(&YFraction, &one, 2048).unwrap(),
            Frequency::new(4, 2048)
        );
    }

    #[test]
    fn v_digits() {
        assert_eq!(VFraction.prefix(8).unwrap(), [1, 1, 0, 0, 1, 1, 0, 0]);
        assert!(VFraction.digits(9, 8).unwrap().iter().all(|&d| d == 0));
        let prefix = VFraction.prefix(2048).unwrap();
        let unit = [1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        for chunk in prefix.chunks(16) {
            assert_eq!(chunk, unit);
        }
        // B_4 starts with B_3 followed by 2048 zeros.
        assert!(VFraction
            .digits(2049, 2048)
            .unwrap()
            .iter()
            .all(|&d| d == 0));
        assert_eq!(VFraction.digits(4097, 2048).unwrap(), prefix);
    }

    #[test]
    fn bernoulli_contract() {
        assert!(matches!(Bernoulli::new(1.0, 0), Err(Error::Domain(_))));
        assert!(Bernoulli::new(0.0, 0).is_err());
        assert!(Bernoulli::new(f64::NAN, 0).is_err());
        let a = bernoulli_stream(0.3, 99, 1000)
            .unwrap()
            .prefix(1000)
            .unwrap();
        let b = bernoulli_stream(0.3, 99, 1000)
            .unwrap()
            .prefix(1000)
            .unwrap();
        assert_eq!(a, b);
        assert!(bernoulli_stream(0.3, 99, 1000)
            .unwrap()
            .digit(1001)
            .is_err());
    }

    #[test]
    fn champernowne_prefixes() {
        let c2 = champernowne_digits(2, 64).unwrap();
        assert_eq!(c2.prefix(12).unwrap(), [1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1]);
        let c10 = champernowne_digits(10, 1000).unwrap();
        assert_eq!(c10.prefix(9).unwrap(), [1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(c10.digits(10, 6).unwrap(), [1, 0, 1, 1, 1, 2]);
        // Position 190 starts "100" after 9 + 90*2 = 189 digits.
        assert_eq!(c10.digits(190, 3).unwrap(), [1, 0, 0]);
    }

    #[test]
    fn champernowne_matches_string_concatenation() {
        let text: String = (1..5000u32).map(|i| format!("{i:o}")).collect();
        let want: Vec<u8> = text.bytes().map(|b| b - b'0').collect();
        let c8 = Champernowne::new(Alphabet::new(8).unwrap());
        assert_eq!(c8.prefix(want.len() as u64).unwrap(), want);
    }

    #[test]
    fn periodic_sparse_examples() {
        let zero = Block::binary("0").unwrap();
        let s = periodic_sparse(zero, Arc::new(AllPositions), Filler::Constant(1)).unwrap();
        assert!(s.prefix(40).unwrap().iter().all(|&d| d == 0));

        let s = periodic_sparse(
            Block::binary("01").unwrap(),
            Arc::new(Multiples::EVENS),
            Filler::Constant(0),
        )
        .unwrap();
        assert_eq!(s.prefix(8).unwrap(), [0, 0, 0, 1, 0, 0, 0, 1]);

        let s = periodic_sparse(
            Block::binary("1").unwrap(),
            Arc::new(FiniteSums),
            Filler::Constant(0),
        )
        .unwrap();
        let f = prefix_frequency(&s, &Block::binary("1").unwrap(), 1 << 16).unwrap();
        assert_eq!(f, Frequency::new(7, 1 << 16));
        assert!(periodic_sparse(
            Block::binary("1").unwrap(),
            Arc::new(FiniteSums),
            Filler::Constant(2)
        )
        .is_err());
    }

    #[test]
    fn generator_kinds_build() {
        let k = GeneratorKind::Bernoulli { p: 0.5, seed: 1 }
            .build()
            .unwrap();
        assert_eq!(
            k.prefix(64).unwrap(),
            Bernoulli::new(0.5, 1).unwrap().prefix(64).unwrap()
        );
        assert!(GeneratorKind::Bernoulli { p: 2.0, seed: 1 }
            .build()
            .is_err());
        assert_eq!(
            GeneratorKind::Kappa.build().unwrap().prefix(8).unwrap(),
            [0, 1, 1, 1, 1, 0, 0, 0]
        );
    }
}
