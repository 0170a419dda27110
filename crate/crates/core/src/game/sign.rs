use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `{-1, 1}^p`, `2 <= p <= 64` in practice (`p >= 1` is accepted).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignVector {
    bits: u64,
    p: u8,
}

impl SignVector {
    fn mask(p: usize) -> u64 {
        if p >= 64 {
            u64::MAX
        } else {
            (1u64 << p) - 1
        }
    }

    pub fn ones(p: usize) -> Self {
        assert!((1..=64).contains(&p), "dimension {p} out of range");
        Self { bits: 0, p: p as u8 }
    }

    /// Bit `j` of `bits` set means component `j` is `-1`; higher bits are ignored.
    pub fn from_bits(bits: u64, p: usize) -> Self {
        assert!((1..=64).contains(&p), "dimension {p} out of range");
        Self { bits: bits & Self::mask(p), p: p as u8 }
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() || signs.len() > 64 {
            return Err(Error::InvalidParams(format!("dimension {} out of range", signs.len())));
        }
        let mut bits = 0;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << j,
                _ => return Err(Error::InvalidParams(format!("component {s} is not a sign"))),
            }
        }
        Ok(Self { bits, p: signs.len() as u8 })
    }

    pub fn p(&self) -> usize {
        usize::from(self.p)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, j: usize) -> i8 {
        if self.bits >> j & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn flipped(&self, j: usize) -> Self {
        Self { bits: self.bits ^ (1 << j), p: self.p }
    }

    pub fn negated(&self) -> Self {
        Self::from_bits(!self.bits, self.p())
    }

    pub fn count_negative(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.p() as i64 - 2 * i64::from(self.hamming_unchecked(other))
    }

    #[inline]
    pub fn hamming_unchecked(&self, other: &Self) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.p()).map(|j| f64::from(self.get(j))).collect()
    }

    /// Apply a coordinate permutation: component `j` moves to `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut bits = 0;
        for (j, &t) in perm.iter().enumerate() {
            bits |= (self.bits >> j & 1) << t;
        }
        Self { bits, p: self.p }
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.p() {
            f.write_str(if self.get(j) == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Result<Vec<i8>> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidParams(format!("unexpected sign character {other:?}"))),
            })
            .collect();
        Self::from_signs(&signs?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_ops() {
        let w: SignVector = "+-+-".parse().unwrap();
        assert_eq!(w.to_string(), "+-+-");
        assert_eq!(w.to_f64(), vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(w.dot(&SignVector::ones(4)), 0);
        assert_eq!(w.flipped(1).to_string(), "+++-");
        assert_eq!(w.negated().to_string(), "-+-+");
        assert_eq!(w.permuted(&[1, 0, 3, 2]).to_string(), "-+-+");
        assert!(SignVector::from_signs(&[1, 0]).is_err());
    }
}
