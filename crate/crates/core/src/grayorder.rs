//! Gray-code orderings of `{0,1}^n` with random access by index.
//!
//! The plain ordering starting at `start` lists `start XOR g(l-1)` for
//! `l = 1, ..., 2^n`, where `g(j) = j ^ (j >> 1)` is the reflected binary
//! Gray code written in `n` bits with the first block coordinate as the most
//! significant bit. This is the ordering obtained recursively by
//! `0B_1, ..., 0B_{2^n}, 1B_{2^n}, ..., 1B_1` and then translated by `start`.
//!
//! The alternated ordering (even `n` only) mirrors every even-indexed block:
//! `B_1, ~B_2, B_3, ~B_4, ...`. Complementing flips all `n` coordinates, an
//! even number, so each block and its mirror sit an even distance apart and
//! the result is again a permutation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcore::{Alphabet, Block};

/// Exhaustive checks are limited to `2^20` blocks.
pub const VERIFY_MAX_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Plain,
    Alternated,
}

/// Bit of the reflected Gray code of `j` at block coordinate `coord`
/// (0-based, coordinate 0 most significant) for blocks of length `n`.
#[inline]
pub fn gray_bit(n: usize, j: u128, coord: usize) -> u8 {
    let shift = n - 1 - coord;
    if shift >= 128 {
        return 0;
    }
    (((j ^ (j >> 1)) >> shift) & 1) as u8
}

fn check_index(n: usize, l: u128) -> Result<()> {
    let max = if n < 128 { 1u128 << n } else { u128::MAX };
    if l == 0 || l > max {
        return Err(Error::IndexRange { index: l, max });
    }
    Ok(())
}

fn check_start(n: usize, start: &Block) -> Result<()> {
    if n == 0 {
        return Err(Error::Length("Gray orderings need n >= 1".into()));
    }
    if start.len() != n {
        return Err(Error::Length(format!(
            "start block has length {}, expected {n}",
            start.len()
        )));
    }
    if start.alphabet() != Alphabet::BINARY {
        return Err(Error::Alphabet("Gray orderings are binary".into()));
    }
    Ok(())
}

/// The `l`-th block (`1 <= l <= 2^n`) of the Gray ordering beginning at `start`.
pub fn gray_block(n: usize, l: u128, start: &Block) -> Result<Block> {
    check_start(n, start)?;
    check_index(n, l)?;
    let digits = start
        .digits()
        .iter()
        .enumerate()
        .map(|(c, &d)| d ^ gray_bit(n, l - 1, c))
        .collect();
    Block::new(digits, Alphabet::BINARY)
}

/// The `l`-th block of the alternated ordering `B_1, ~B_2, B_3, ~B_4, ...`.
pub fn alt_block(n: usize, l: u128, start: &Block) -> Result<Block> {
    if n % 2 == 1 {
        return Err(Error::Parity(n));
    }
    let b = gray_block(n, l, start)?;
    if l.is_multiple_of(2) {
        b.mirror()
    } else {
        Ok(b)
    }
}

/// A Gray ordering of `{0,1}^n` with a fixed first block.
#[derive(Debug, Clone)]
pub struct GrayOrdering {
    start: Block,
    variant: Variant,
}

impl GrayOrdering {
    pub fn new(start: Block, variant: Variant) -> Result<Self> {
        check_start(start.len(), &start)?;
        if variant == Variant::Alternated && start.len() % 2 == 1 {
            return Err(Error::Parity(start.len()));
        }
        Ok(GrayOrdering { start, variant })
    }

    pub fn len_blocks(&self) -> usize {
        self.start.len()
    }

    pub fn start(&self) -> &Block {
        &self.start
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn block(&self, l: u128) -> Result<Block> {
        match self.variant {
            Variant::Plain => gray_block(self.start.len(), l, &self.start),
            Variant::Alternated => alt_block(self.start.len(), l, &self.start),
        }
    }

    /// Digit `coord` (0-based) of block `l`, without allocating.
    #[inline]
    pub fn bit(&self, l: u128, coord: usize) -> u8 {
        let n = self.start.len();
        let flip = u8::from(self.variant == Variant::Alternated && l.is_multiple_of(2));
        self.start.digits()[coord] ^ gray_bit(n, l - 1, coord) ^ flip
    }

    /// All `2^n` blocks in order; only sensible for small `n`.
    pub fn iter(&self) -> impl Iterator<Item = Block> + '_ {
        let count = 1u128 << self.start.len().min(127);
        (1..=count).map(move |l| self.block(l).expect("index in range"))
    }
}

/// Outcome of an exhaustive ordering check.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OrderingReport {
    pub n: usize,
    pub variant: Variant,
    /// Every block of `{0,1}^n` appears exactly once.
    pub bijective: bool,
    /// Consecutive blocks of the underlying Gray ordering differ in one place.
    pub single_flips: bool,
    /// Aligned groups of `2^i` blocks share a prefix and enumerate all suffixes of length `i`.
    pub nested_suffixes: bool,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.single_flips && self.nested_suffixes
    }
}

/// Exhaustively checks the ordering properties for `n <= 20`.
pub fn verify_ordering(n: usize, start: &Block, variant: Variant) -> Result<OrderingReport> {
    check_start(n, start)?;
    if variant == Variant::Alternated && n % 2 == 1 {
        return Err(Error::Parity(n));
    }
    if n > VERIFY_MAX_LEN {
        return Err(Error::Budget(format!(
            "exhaustive check of 2^{n} blocks exceeds 2^{VERIFY_MAX_LEN}"
        )));
    }
    let ordering = GrayOrdering::new(start.clone(), Variant::Plain)?;
    let total = 1usize << n;
    let as_code = |b: &Block| b.code().expect("n <= 20 fits") as usize;
    let plain: Vec<usize> = (1..=total as u128)
        .map(|l| as_code(&ordering.block(l).expect("in range")))
        .collect();
    let listed: Vec<usize> = match variant {
        Variant::Plain => plain.clone(),
        Variant::Alternated => (1..=total as u128)
            .map(|l| as_code(&alt_block(n, l, start).expect("in range")))
            .collect(),
    };

    let mut seen = vec![false; total];
    let mut bijective = true;
    for &c in &listed {
        bijective &= !std::mem::replace(&mut seen[c], true);
    }

    let single_flips = plain.windows(2).all(|w| (w[0] ^ w[1]).count_ones() == 1);

    let mut nested_suffixes = true;
    'outer: for i in 1..n {
        let group = 1usize << i;
        let mask = group - 1;
        for chunk in plain.chunks(group) {
            let prefix = chunk[0] >> i;
            let mut hit = vec![false; group];
            for &c in chunk {
                if c >> i != prefix || std::mem::replace(&mut hit[c & mask], true) {
                    nested_suffixes = false;
                    break 'outer;
                }
            }
        }
    }

    Ok(OrderingReport {
        n,
        variant,
        bijective,
        single_flips,
        nested_suffixes,
    })
}
