//! Generators checked against independent, deliberately naive constructions.

use normlab_core::generators::{Champernowne, Kappa, VFraction, YFraction};
use normlab_core::{Alphabet, SymbolicSequence};
use num_bigint::BigUint;

/// Bit `c` (most significant first) of the `n`-bit reflected Gray code of `j`.
fn textbook_gray(n: usize, j: u64, c: usize) -> u8 {
    let g = j ^ (j >> 1);
    let shift = n - 1 - c;
    if shift >= 64 {
        0
    } else {
        ((g >> shift) & 1) as u8
    }
}

/// κ built level by level: every chunk is the previous block xor a Gray word,
/// complemented on odd chunk indices.
fn kappa_oracle(len: usize) -> Vec<u8> {
    let mut block = vec![0u8, 1];
    loop {
        let n = block.len();
        let chunks = if n >= 64 { u64::MAX } else { 1u64 << n };
        let mut next = Vec::new();
        let mut j = 0u64;
        while j < chunks && next.len() < len.max(n * 4) {
            let flip = (j & 1) as u8;
            next.extend((0..n).map(|c| block[c] ^ textbook_gray(n, j, c) ^ flip));
            j += 1;
        }
        if next.len() >= len && n >= 2048 {
            next.truncate(len);
            return next;
        }
        block = next;
    }
}

#[test]
fn kappa_matches_level_construction() {
    let len = 1 << 20;
    let oracle = kappa_oracle(len);
    let ours = Kappa.prefix(len as u64).unwrap();
    let first = oracle.iter().zip(&ours).position(|(a, b)| a != b);
    assert_eq!(first, None, "first disagreement at index {first:?}");
}

#[test]
fn y_is_the_indicator_of_finite_sums() {
    // Subset sums of the levels 2, 8, 2048.
    let mut sums: Vec<u64> = (0..8u64)
        .map(|m| {
            [2, 8, 2048]
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, v)| v)
                .sum()
        })
        .collect();
    sums.sort_unstable();
    let ones: Vec<u64> = (1..=100_000u64)
        .filter(|&p| YFraction.digit_at(p) == 1)
        .collect();
    assert_eq!(ones, sums[1..]);
}

#[test]
fn v_is_the_reciprocal_of_y_by_long_division() {
    // y agrees with its truncation after 2058 digits up to 2^-(n_4), far below
    // the precision used here.
    let top = 2058u32;
    let digits = 8192u32;
    let y: BigUint = [0u32, 2, 8, 10, 2048, 2050, 2056, 2058]
        .iter()
        .map(|&s| BigUint::from(1u8) << (top - s))
        .sum();
    let q = (BigUint::from(1u8) << (top + digits)) / y;
    // q = floor(2^digits / y) and 1/2 < 1/y < 1, so q has exactly `digits` bits.
    assert_eq!(q.bits(), u64::from(digits));
    let checked = digits - 16;
    for p in 1..=checked {
        let bit = q.bit(u64::from(digits - p));
        assert_eq!(VFraction.digit_at(u64::from(p)) == 1, bit, "digit {p}");
    }
}

#[test]
fn champernowne_matches_string_concatenation() {
    let text: String = (1..5000u32).map(|k| k.to_string()).collect();
    let expected: Vec<u8> = text.bytes().map(|b| b - b'0').collect();
    let ours = Champernowne::new(Alphabet::new(10).unwrap())
        .prefix(expected.len() as u64)
        .unwrap();
    assert_eq!(ours, expected);

    let text: String = (1..3000u32).map(|k| format!("{k:b}")).collect();
    let expected: Vec<u8> = text.bytes().map(|b| b - b'0').collect();
    let ours = Champernowne::new(Alphabet::BINARY)
        .prefix(expected.len() as u64)
        .unwrap();
    assert_eq!(ours, expected);
}
