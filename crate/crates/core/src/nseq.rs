//! The `.nseq` sequence file format.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic `NSEQ`                       |
//! | 4      | 1    | version, `0x01`                    |
//! | 5      | 2    | alphabet size `r`                  |
//! | 7      | 8    | digit count `N`                    |
//! | 15     | ...  | payload                            |
//!
//! For `r = 2` the payload packs eight digits per byte, least significant bit
//! first: digit at position `p` (1-indexed) is bit `(p-1) % 8` of byte
//! `(p-1) / 8`. Unused high bits of the last byte are zero. For
//! `2 < r <= 256` each digit occupies one byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::seqcore::{Alphabet, DigitString, SymbolicSequence};

pub const MAGIC: &[u8; 4] = b"NSEQ";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 15;

pub fn encode(seq: &DigitString) -> Vec<u8> {
    let digits = seq.as_slice();
    let r = seq.alphabet().size();
    let mut out = Vec::with_capacity(HEADER_LEN + digits.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&r.to_le_bytes());
    out.extend_from_slice(&(digits.len() as u64).to_le_bytes());
    if r == 2 {
        out.extend(digits.chunks(8).map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |byte, (i, &d)| byte | (d << i))
        }));
    } else {
        out.extend_from_slice(digits);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DigitString> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!(
            "unsupported version {:#04x}",
            bytes[4]
        )));
    }
    let r = u16::from_le_bytes([bytes[5], bytes[6]]);
    let alphabet = Alphabet::new(r)?;
    let mut count_bytes = [0u8; 8];
    count_bytes.copy_from_slice(&bytes[7..15]);
    let count = usize::try_from(u64::from_le_bytes(count_bytes))
        .map_err(|_| Error::Format("digit count exceeds address space".into()))?;
    let payload = &bytes[HEADER_LEN..];
    let digits = if r == 2 {
        let need = count.div_ceil(8);
        if payload.len() != need {
            return Err(Error::Format(format!(
                "expected {need} payload bytes for {count} binary digits, found {}",
                payload.len()
            )));
        }
        (0..count)
            .map(|i| (payload[i / 8] >> (i % 8)) & 1)
            .collect()
    } else {
        if payload.len() != count {
            return Err(Error::Format(format!(
                "expected {count} payload bytes, found {}",
                payload.len()
            )));
        }
        payload.to_vec()
    };
    DigitString::new(digits, alphabet)
}

pub fn write_to(mut writer: impl Write, seq: &DigitString) -> Result<()> {
    writer.write_all(&encode(seq))?;
    Ok(())
}

pub fn read_from(mut reader: impl Read) -> Result<DigitString> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(path: impl AsRef<Path>, seq: &DigitString) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(&mut w, seq)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<DigitString> {
    read_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_layout_is_lsb_first() {
        let s = DigitString::binary(vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
        let bytes = encode(&s);
        assert_eq!(&bytes[..5], b"NSEQ\x01");
        assert_eq!(&bytes[5..7], &[2, 0]);
        assert_eq!(&bytes[7..15], &10u64.to_le_bytes());
        assert_eq!(&bytes[15..], &[0b0000_0001, 0b0000_0010]);
    }

    #[test]
    fn byte_layout_for_larger_alphabets() {
        let s = DigitString::new(vec![3, 0, 2], Alphabet::new(4).unwrap()).unwrap();
        assert_eq!(&encode(&s)[15..], &[3, 0, 2]);
    }

    #[test]
    fn rejects_corrupt_headers() {
        let s = DigitString::binary(vec![1, 1, 0]).unwrap();
        let mut bytes = encode(&s);
        bytes[4] = 2;
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
        let mut bytes = encode(&s);
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
        let bytes = encode(&s);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..3]).is_err());
    }

    #[test]
    fn rejects_out_of_alphabet_payload() {
        let s = DigitString::new(vec![0, 1, 2], Alphabet::new(3).unwrap()).unwrap();
        let mut bytes = encode(&s);
        bytes[16] = 7;
        assert!(matches!(decode(&bytes), Err(Error::Alphabet(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.nseq");
        let s = DigitString::binary((0..1000).map(|i| (i % 3 == 0) as u8).collect()).unwrap();
        save(&path, &s).unwrap();
        assert_eq!(load(&path).unwrap(), s);
    }

    proptest! {
        #[test]
        fn round_trip(r in 2u16..=256, raw in prop::collection::vec(any::<u8>(), 0..200)) {
            let alphabet = Alphabet::new(r).unwrap();
            let digits: Vec<u8> = raw.iter().map(|&d| (u16::from(d) % r) as u8).collect();
            let s = DigitString::new(digits, alphabet).unwrap();
            prop_assert_eq!(decode(&encode(&s)).unwrap(), s);
        }
    }
}
