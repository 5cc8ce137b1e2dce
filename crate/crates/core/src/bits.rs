//! Bit-string helpers shared by strategies, tables and the text formats.
//!
//! Bit strings are `[bool]` with index 0 holding the first variable. When a
//! bit string is read as an integer the first bit is the most significant.

use crate::error::{Error, Result};

pub fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .enumerate()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Syntax {
                offset: i,
                message: format!("expected '0' or '1', found {c:?}"),
            }),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `len` bits of `index`, most significant first.
pub fn index_to_bits(index: u64, len: usize) -> Vec<bool> {
    (0..len)
        .map(|i| (index >> (len - 1 - i)) & 1 == 1)
        .collect()
}

pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

pub fn weight(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

/// Inner product mod 2.
pub fn inner_product(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).filter(|(&p, &q)| p && q).count() % 2 == 1
}

/// ⌈log₂ v⌉ with `ceil_log2(1) == 0`.
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}
