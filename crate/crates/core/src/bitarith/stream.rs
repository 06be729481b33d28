use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcore::{Alphabet, Horizon, SymbolicSequence};

/// Digits of `s1 ↰ s2` with per-digit carry resolution.
///
/// `digits[n-1]` is `None` when the carry into position `n` could not be
/// decided within the lookahead budget.
#[derive(Debug, Clone, Serialize)]
pub struct StreamSum {
    pub digits: Vec<Option<u8>>,
    /// Carry out of position 1 into the integer part, when decided.
    pub integer_carry: Option<u8>,
    pub lookahead_cap: u64,
}

impl StreamSum {
    pub fn ambiguous_count(&self) -> usize {
        self.digits.iter().filter(|d| d.is_none()).count()
    }

    pub fn is_ambiguous(&self, position: u64) -> bool {
        self.digits[(position - 1) as usize].is_none()
    }
}

/// Adds two binary digit streams position by position.
///
/// The carry into position `n` is the carry generated at the first column
/// `j > n` whose digit sum is not 1: sum 2 carries, sum 0 does not. Columns
/// summing to 1 propagate whatever arrives from their right, so a run of them
/// longer than `lookahead_cap` (or running past the available digits) leaves
/// the digit flagged rather than guessed.
pub fn stream_carry_add(
    s1: &dyn SymbolicSequence,
    s2: &dyn SymbolicSequence,
    n: u64,
    lookahead_cap: u64,
) -> Result<StreamSum> {
    if s1.alphabet() != Alphabet::BINARY || s2.alphabet() != Alphabet::BINARY {
        return Err(Error::Alphabet(
            "carry addition needs binary sequences".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Length("need at least one digit".into()));
    }
    let want = n.saturating_add(lookahead_cap);
    let avail = match s1.horizon().min(s2.horizon()) {
        Horizon::Finite(h) => h.min(want),
        Horizon::Unbounded => want,
    };
    if avail < n {
        return Err(Error::Horizon {
            position: n,
            horizon: avail,
        });
    }
    let a = s1.prefix(avail)?;
    let b = s2.prefix(avail)?;
    let sums: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x + y).collect();

    // carry_from[i]: carry arriving into index i-1 from columns >= i (0-based), if decided.
    // Stored with the index of the deciding column to enforce the cap.
    let len = sums.len();
    let mut decider: Vec<Option<usize>> = vec![None; len + 1];
    for i in (0..len).rev() {
        decider[i] = if sums[i] != 1 {
            Some(i)
        } else {
            decider[i + 1]
        };
    }
    let carry_into = |i: usize| -> Option<u8> {
        // Carry into 0-based column i comes from columns i+1.. .
        let j = decider.get(i + 1).copied().flatten()?;
        ((j - i) as u64 <= lookahead_cap).then(|| u8::from(sums[j] == 2))
    };
    let digits = (0..n as usize)
        .map(|i| carry_into(i).map(|c| (sums[i] + c) % 2))
        .collect();
    let integer_carry =
        decider[0].and_then(|j| ((j + 1) as u64 <= lookahead_cap).then(|| u8::from(sums[j] == 2)));
    Ok(StreamSum {
        digits,
        integer_carry,
        lookahead_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitarith::{carry_add, FixedPointNumber};
    use crate::generators::{Bernoulli, Kappa};
    use crate::seqcore::{Constant, DigitString, Periodic, Shifted};
    use std::sync::Arc;

    #[test]
    fn borderline_tail_is_ambiguous() {
        let a = Periodic::binary("01").unwrap();
        let b = Periodic::binary("10").unwrap();
        let s = stream_carry_add(&a, &b, 100, 64).unwrap();
        assert_eq!(s.ambiguous_count(), 100);
        assert_eq!(s.integer_carry, None);
    }

    #[test]
    fn adding_zero_is_identity() {
        let s = stream_carry_add(&Kappa, &Constant::zeros(), 500, 64).unwrap();
        assert_eq!(s.ambiguous_count(), 0);
        let digits: Vec<u8> = s.digits.iter().map(|d| d.unwrap()).collect();
        assert_eq!(digits, Kappa.prefix(500).unwrap());
    }

    #[test]
    fn simple_carry() {
        let a = DigitString::binary(vec![0, 1, 1, 1, 0]).unwrap();
        let b = DigitString::binary(vec![0, 0, 0, 1, 0]).unwrap();
        let s = stream_carry_add(&a, &b, 4, 64).unwrap();
        let d: Vec<u8> = s.digits.iter().map(|d| d.unwrap()).collect();
        assert_eq!(d, [1, 0, 0, 0]);
        // Past the last column the tail is unknown, so the final digit stays open.
        assert!(stream_carry_add(&a, &b, 5, 64).unwrap().is_ambiguous(5));
        assert_eq!(s.integer_carry, Some(0));
    }

    #[test]
    fn running_off_the_end_is_flagged() {
        let a = DigitString::binary(vec![1, 0, 1]).unwrap();
        let b = DigitString::binary(vec![0, 1, 0]).unwrap();
        let s = stream_carry_add(&a, &b, 3, 64).unwrap();
        assert_eq!(s.ambiguous_count(), 3);
    }

    fn batch_digits(s1: &dyn SymbolicSequence, s2: &dyn SymbolicSequence, n: usize) -> Vec<u8> {
        let a =
            FixedPointNumber::from_digits(false, 0, &s1.prefix(n as u64).unwrap(), n, 0).unwrap();
        let b =
            FixedPointNumber::from_digits(false, 0, &s2.prefix(n as u64).unwrap(), n, 0).unwrap();
        carry_add(&a, &b).fraction_digits(n)
    }

    #[test]
    fn stream_agrees_with_batch_on_kappa() {
        let n = 10_000u64;
        let shifted = Shifted::new(Arc::new(Kappa), 2);
        let s = stream_carry_add(&Kappa, &shifted, n, 64).unwrap();
        let batch = batch_digits(&Kappa, &shifted, n as usize + 64);
        for (i, d) in s.digits.iter().enumerate() {
            if let Some(d) = d {
                assert_eq!(*d, batch[i], "position {}", i + 1);
            }
        }
    }

    #[test]
    fn stream_agrees_with_batch_on_random_pairs() {
        let n = 2_000u64;
        for seed in 0..20 {
            let a = Bernoulli::new(0.5, 2 * seed).unwrap();
            let b = Bernoulli::new(0.5, 2 * seed + 1).unwrap();
            let s = stream_carry_add(&a, &b, n, 64).unwrap();
            let batch = batch_digits(&a, &b, n as usize + 64);
            for (i, d) in s.digits.iter().enumerate() {
                if let Some(d) = d {
                    assert_eq!(*d, batch[i]);
                }
            }
        }
    }
}
