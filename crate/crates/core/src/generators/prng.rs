//! Counter-based 64-bit generator.
//!
//! The word at position `p` of the stream with seed `s` is
//!
//! ```text
//! key     = mix(s XOR 0x243F_6A88_85A3_08D3)
//! word(p) = mix(key + p · 0x9E37_79B9_7F4A_7C15)      (wrapping)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. Each word depends only on
//! `(s, p)`, so streams are random access and identical on every platform.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_SALT: u64 = 0x243F_6A88_85A3_08D3;

#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix(seed ^ SEED_SALT),
        }
    }

    #[inline]
    pub fn word(&self, position: u64) -> u64 {
        mix(self.key.wrapping_add(position.wrapping_mul(GOLDEN)))
    }

    /// Uniform digit in `0..r` by multiply-shift.
    #[inline]
    pub fn digit(&self, position: u64, r: u16) -> u8 {
        ((u128::from(self.word(position)) * u128::from(r)) >> 64) as u8
    }

    /// An independent stream for sub-task `index`.
    pub fn substream(&self, index: u64) -> CounterRng {
        CounterRng::new(mix(self.key ^ mix(index.wrapping_add(1))))
    }
}
