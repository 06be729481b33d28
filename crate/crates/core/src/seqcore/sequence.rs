use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{Alphabet, Block, IndexSet};
use crate::error::{Error, Result};

/// Largest queryable position of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Horizon {
    Finite(u64),
    Unbounded,
}

impl Horizon {
    #[inline]
    pub fn covers(self, position: u64) -> bool {
        match self {
            Horizon::Finite(h) => position <= h,
            Horizon::Unbounded => true,
        }
    }

    pub fn min(self, other: Horizon) -> Horizon {
        match (self, other) {
            (Horizon::Finite(a), Horizon::Finite(b)) => Horizon::Finite(a.min(b)),
            (Horizon::Finite(a), Horizon::Unbounded) | (Horizon::Unbounded, Horizon::Finite(a)) => {
                Horizon::Finite(a)
            }
            (Horizon::Unbounded, Horizon::Unbounded) => Horizon::Unbounded,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Horizon::Finite(h) => Some(h),
            Horizon::Unbounded => None,
        }
    }

    /// Errors unless every position in `1..=position` is queryable.
    pub fn check(self, position: u64) -> Result<()> {
        match self {
            Horizon::Finite(h) if position > h => Err(Error::Horizon {
                position,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }
}

/// A deterministic random-access digit source, positions starting at 1.
pub trait SymbolicSequence: Send + Sync {
    fn alphabet(&self) -> Alphabet;

    fn horizon(&self) -> Horizon;

    /// Digit at `position`. Callers guarantee `1 <= position` and that the
    /// horizon covers it.
    fn digit_at(&self, position: u64) -> u8;

    fn digit(&self, position: u64) -> Result<u8> {
        if position == 0 {
            return Err(Error::Domain("positions start at 1".into()));
        }
        self.horizon().check(position)?;
        Ok(self.digit_at(position))
    }

    /// Digits at positions `start..start+len`.
    fn digits(&self, start: u64, len: u64) -> Result<Vec<u8>> {
        if start == 0 {
            return Err(Error::Domain("positions start at 1".into()));
        }
        if len == 0 {
            return Ok(Vec::new());
        }
        let end = start
            .checked_add(len - 1)
            .ok_or_else(|| Error::Domain("position overflow".into()))?;
        self.horizon().check(end)?;
        let len = usize::try_from(len).map_err(|_| Error::Budget("range too long".into()))?;
        let mut out = vec![0u8; len];
        const CHUNK: usize = 1 << 14;
        if len > 4 * CHUNK {
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let base = start + (c * CHUNK) as u64;
                    for (i, d) in chunk.iter_mut().enumerate() {
                        *d = self.digit_at(base + i as u64);
                    }
                });
        } else {
            for (i, d) in out.iter_mut().enumerate() {
                *d = self.digit_at(start + i as u64);
            }
        }
        Ok(out)
    }

    /// Digits at positions `1..=len`.
    fn prefix(&self, len: u64) -> Result<Vec<u8>> {
        self.digits(1, len)
    }

    /// The first `len` digits as a block.
    fn prefix_block(&self, len: u64) -> Result<Block> {
        Block::new(self.prefix(len)?, self.alphabet())
    }
}

pub type SeqRef = Arc<dyn SymbolicSequence>;

impl fmt::Debug for dyn SymbolicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolicSequence")
            .field("alphabet", &self.alphabet())
            .field("horizon", &self.horizon())
            .finish()
    }
}

/// A finite, materialized sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitString {
    alphabet: Alphabet,
    digits: Vec<u8>,
}

impl DigitString {
    pub fn new(digits: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| !alphabet.contains(d)) {
            return Err(Error::Alphabet(format!("digit {d} not in {alphabet}")));
        }
        Ok(DigitString { alphabet, digits })
    }

    pub fn binary(digits: Vec<u8>) -> Result<Self> {
        Self::new(digits, Alphabet::BINARY)
    }

    /// Materializes the first `len` digits of `seq`.
    pub fn from_sequence(seq: &dyn SymbolicSequence, len: u64) -> Result<Self> {
        Ok(DigitString {
            alphabet: seq.alphabet(),
            digits: seq.prefix(len)?,
        })
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

impl From<Block> for DigitString {
    fn from(b: Block) -> Self {
        let alphabet = b.alphabet();
        DigitString {
            alphabet,
            digits: b.into_digits(),
        }
    }
}

impl SymbolicSequence for DigitString {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        Horizon::Finite(self.digits.len() as u64)
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        self.digits[(position - 1) as usize]
    }
    fn digits(&self, start: u64, len: u64) -> Result<Vec<u8>> {
        if start == 0 {
            return Err(Error::Domain("positions start at 1".into()));
        }
        if len == 0 {
            return Ok(Vec::new());
        }
        self.horizon().check(start + len - 1)?;
        let s = (start - 1) as usize;
        Ok(self.digits[s..s + len as usize].to_vec())
    }
}

/// The constant sequence `d d d ...`.
#[derive(Debug, Clone, Copy)]
pub struct Constant {
    pub digit: u8,
    pub alphabet: Alphabet,
}

impl Constant {
    pub fn zeros() -> Self {
        Constant {
            digit: 0,
            alphabet: Alphabet::BINARY,
        }
    }
}

impl SymbolicSequence for Constant {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    fn digit_at(&self, _: u64) -> u8 {
        self.digit
    }
}

/// `B B B ...` for a block `B`.
#[derive(Debug, Clone)]
pub struct Periodic {
    period: Block,
}

impl Periodic {
    pub fn new(period: Block) -> Self {
        Periodic { period }
    }

    pub fn binary(text: &str) -> Result<Self> {
        Ok(Periodic::new(Block::binary(text)?))
    }
}

impl SymbolicSequence for Periodic {
    fn alphabet(&self) -> Alphabet {
        self.period.alphabet()
    }
    fn horizon(&self) -> Horizon {
        Horizon::Unbounded
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        let d = self.period.digits();
        d[((position - 1) % d.len() as u64) as usize]
    }
}

/// Digit-wise image of a sequence under a fixed map.
pub struct Mapped {
    inner: SeqRef,
    alphabet: Alphabet,
    map: Arc<dyn Fn(u8) -> u8 + Send + Sync>,
}

impl Mapped {
    pub fn new(
        inner: SeqRef,
        alphabet: Alphabet,
        map: impl Fn(u8) -> u8 + Send + Sync + 'static,
    ) -> Self {
        Mapped {
            inner,
            alphabet,
            map: Arc::new(map),
        }
    }
}

impl SymbolicSequence for Mapped {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        self.inner.horizon()
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        (self.map)(self.inner.digit_at(position))
    }
}

/// The shift `σ^k`: digit `p` of the output is digit `p + k` of the input.
pub struct Shifted {
    inner: SeqRef,
    by: u64,
}

impl Shifted {
    pub fn new(inner: SeqRef, by: u64) -> Self {
        Shifted { inner, by }
    }
}

impl SymbolicSequence for Shifted {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }
    fn horizon(&self) -> Horizon {
        match self.inner.horizon() {
            Horizon::Finite(h) => Horizon::Finite(h.saturating_sub(self.by)),
            Horizon::Unbounded => Horizon::Unbounded,
        }
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        self.inner.digit_at(position + self.by)
    }
}

/// Restriction `ω|_S`: digit `k` is the input digit at the `k`-th element of `S`.
pub struct Restricted {
    inner: SeqRef,
    set: Arc<dyn IndexSet>,
}

impl SymbolicSequence for Restricted {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }
    fn horizon(&self) -> Horizon {
        let from_set = match self.set.len() {
            Some(n) => Horizon::Finite(n),
            None => Horizon::Unbounded,
        };
        let from_inner = match self.inner.horizon() {
            Horizon::Finite(h) => Horizon::Finite(self.set.count_up_to(h)),
            Horizon::Unbounded => Horizon::Unbounded,
        };
        from_set.min(from_inner)
    }
    fn digit_at(&self, position: u64) -> u8 {
        let p = self
            .set
            .nth(position)
            .expect("horizon guarantees the index set reaches this rank");
        self.inner.digit_at(p)
    }
}

pub fn restrict(seq: SeqRef, set: Arc<dyn IndexSet>) -> Restricted {
    Restricted { inner: seq, set }
}

/// A multirow sequence read column by column. Column digits are encoded
/// row-major: the first row is the most significant digit.
pub struct Zipped {
    rows: Vec<SeqRef>,
    alphabet: Alphabet,
    horizon: Horizon,
}

impl Zipped {
    pub fn rows(&self) -> &[SeqRef] {
        &self.rows
    }

    /// Decodes a column code into its row digits.
    pub fn decode(&self, mut code: u8) -> Vec<u8> {
        let mut out = vec![0u8; self.rows.len()];
        for (slot, row) in out.iter_mut().zip(&self.rows).rev() {
            let r = row.alphabet().size();
            *slot = (u16::from(code) % r) as u8;
            code = (u16::from(code) / r) as u8;
        }
        out
    }
}

impl SymbolicSequence for Zipped {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        self.horizon
    }
    #[inline]
    fn digit_at(&self, position: u64) -> u8 {
        self.rows.iter().fold(0u16, |acc, row| {
            acc * row.alphabet().size() + u16::from(row.digit_at(position))
        }) as u8
    }
}

/// Combines rows into a sequence over the product alphabet.
///
/// Finite horizons must agree; an unbounded row adopts the common finite horizon.
pub fn zip_product(rows: Vec<SeqRef>) -> Result<Zipped> {
    if rows.is_empty() {
        return Err(Error::Length("zip_product needs at least one row".into()));
    }
    let mut size: u32 = 1;
    let mut horizon = Horizon::Unbounded;
    for row in &rows {
        size *= u32::from(row.alphabet().size());
        if size > u32::from(super::MAX_ALPHABET) {
            return Err(Error::Alphabet(format!(
                "product alphabet exceeds {} symbols",
                super::MAX_ALPHABET
            )));
        }
        match (horizon, row.horizon()) {
            (Horizon::Finite(a), Horizon::Finite(b)) if a != b => {
                return Err(Error::Length(format!("horizon mismatch: {a} vs {b}")));
            }
            (_, h @ Horizon::Finite(_)) => horizon = h,
            _ => {}
        }
    }
    Ok(Zipped {
        rows,
        alphabet: Alphabet::new(size as u16)?,
        horizon,
    })
}

/// Projection of a zipped sequence back onto one of its rows.
pub struct Row {
    zipped: Arc<Zipped>,
    divisor: u16,
    alphabet: Alphabet,
}

impl Row {
    pub fn new(zipped: Arc<Zipped>, index: usize) -> Result<Self> {
        let rows = zipped.rows();
        if index >= rows.len() {
            return Err(Error::Domain(format!("row {index} of {}", rows.len())));
        }
        let divisor = rows[index + 1..]
            .iter()
            .map(|r| r.alphabet().size())
            .product();
        Ok(Row {
            alphabet: rows[index].alphabet(),
            divisor,
            zipped,
        })
    }
}

impl SymbolicSequence for Row {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn horizon(&self) -> Horizon {
        self.zipped.horizon()
    }
    fn digit_at(&self, position: u64) -> u8 {
        ((u16::from(self.zipped.digit_at(position)) / self.divisor) % self.alphabet.size()) as u8
    }
}

/// Splits a base-4 sequence into `(⌊d/2⌋, d mod 2)` rows.
pub fn base4_split(seq: SeqRef) -> Result<(Mapped, Mapped)> {
    if seq.alphabet().size() != 4 {
        return Err(Error::Alphabet(format!(
            "base4_split needs alphabet size 4, got {}",
            seq.alphabet().size()
        )));
    }
    Ok((
        Mapped::new(seq.clone(), Alphabet::BINARY, |d| d / 2),
        Mapped::new(seq, Alphabet::BINARY, |d| d % 2),
    ))
}

/// Digit-wise complement of a binary sequence.
pub fn mirror_sequence(seq: SeqRef) -> Result<Mapped> {
    if seq.alphabet() != Alphabet::BINARY {
        return Err(Error::Alphabet("mirror needs a binary sequence".into()));
    }
    Ok(Mapped::new(seq, Alphabet::BINARY, |d| 1 - d))
}
