//! Symbolic sequences over finite alphabets, with block occurrence counting.
//!
//! Positions are 1-indexed throughout: the first digit of a sequence lives at
//! position 1, and a prefix of length `N` covers positions `1..=N`.

mod counting;
mod index;
mod sequence;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use counting::{
    block_density, empirical_measure, index_density_profile, joint_frequency, prefix_frequency,
    BlockCounter, EmpiricalMeasure, Frequency, Window,
};
pub use index::{AllPositions, EmptySet, FiniteSet, IndexSet, Multiples};
pub use sequence::{
    base4_split, mirror_sequence, restrict, zip_product, Constant, DigitString, Horizon, Mapped,
    Periodic, Restricted, Row, SeqRef, Shifted, SymbolicSequence, Zipped,
};

/// Digits are stored as bytes, so alphabets hold at most 256 symbols.
pub const MAX_ALPHABET: u16 = 256;

/// The digit set `{0, 1, ..., r-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alphabet(u16);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(size: u16) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&size) {
            return Err(Error::Alphabet(format!(
                "alphabet size {size} outside 2..={MAX_ALPHABET}"
            )));
        }
        Ok(Alphabet(size))
    }

    #[inline]
    pub fn size(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn contains(self, digit: u8) -> bool {
        u16::from(digit) < self.0
    }

    /// `r^m` when it fits in a `u64`.
    pub fn block_count(self, m: usize) -> Option<u64> {
        u64::from(self.0).checked_pow(u32::try_from(m).ok()?)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ_{}", self.0)
    }
}

/// A nonempty finite word over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Block {
    digits: Vec<u8>,
    alphabet: Alphabet,
}

impl Block {
    pub fn new(digits: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Length("blocks must have length at least 1".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| !alphabet.contains(d)) {
            return Err(Error::Alphabet(format!("digit {d} not in {alphabet}")));
        }
        Ok(Block { digits, alphabet })
    }

    /// Parses a binary block such as `"0110"`. Whitespace is ignored.
    pub fn binary(text: &str) -> Result<Self> {
        Self::parse(text, Alphabet::BINARY)
    }

    /// Parses a block written with one character per digit (`0-9`, then `a-z`).
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self> {
        let digits = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Alphabet(format!("invalid digit character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(digits, alphabet)
    }

    /// Decodes the base-`r` integer `code` into a block of length `m`
    /// (first digit most significant).
    pub fn from_code(mut code: u64, m: usize, alphabet: Alphabet) -> Self {
        let r = u64::from(alphabet.size());
        let mut digits = vec![0u8; m];
        for d in digits.iter_mut().rev() {
            *d = (code % r) as u8;
            code /= r;
        }
        Block { digits, alphabet }
    }

    /// Base-`r` code of the block, first digit most significant.
    pub fn code(&self) -> Option<u64> {
        let r = u64::from(self.alphabet.size());
        self.digits.iter().try_fold(0u64, |acc, &d| {
            acc.checked_mul(r).and_then(|v| v.checked_add(u64::from(d)))
        })
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    /// The bitwise complement of a binary block.
    pub fn mirror(&self) -> Result<Block> {
        if self.alphabet != Alphabet::BINARY {
            return Err(Error::Alphabet(format!(
                "mirror is defined for binary blocks, got {}",
                self.alphabet
            )));
        }
        Ok(Block {
            digits: self.digits.iter().map(|d| 1 - d).collect(),
            alphabet: self.alphabet,
        })
    }

    /// Number of coordinates where `self` and `other` differ.
    pub fn hamming(&self, other: &Block) -> usize {
        self.digits
            .iter()
            .zip(&other.digits)
            .filter(|(a, b)| a != b)
            .count()
            + self.len().abs_diff(other.len())
    }

    /// Concatenation of `self` and `other`.
    pub fn concat(&self, other: &Block) -> Result<Block> {
        if self.alphabet != other.alphabet {
            return Err(Error::Alphabet(
                "cannot concatenate across alphabets".into(),
            ));
        }
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        Ok(Block {
            digits,
            alphabet: self.alphabet,
        })
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.digits {
            let c = char::from_digit(u32::from(d), 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Mirror of a binary block.
pub fn mirror(block: &Block) -> Result<Block> {
    block.mirror()
}
