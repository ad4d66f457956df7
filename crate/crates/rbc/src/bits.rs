//! Fixed-length bit strings.
//!
//! A [`BitString`] is an element of {0,1}^n with n fixed at construction.
//! Bit `j` is the coefficient of X^j in the polynomial view used by [`crate::gf`];
//! textual forms (binary and hex) print the n-bit integer most-significant
//! digit first, so `"110"` is the string with bits b2=1, b1=1, b0=0.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::SplitMix64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("length must be positive")]
    EmptyString,
    #[error("invalid character {0:?} in bit/hex literal")]
    BadLiteral(char),
    #[error("literal does not fit in {0} bits")]
    TooWide(usize),
}

/// An n-bit string, n >= 1. Immutable after construction except through
/// explicitly named mutators used by tests.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    n: usize,
    limbs: Vec<u64>,
}

fn limb_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl BitString {
    /// The all-zero string 0^n.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "bit string length must be positive");
        BitString {
            n,
            limbs: vec![0; limb_count(n)],
        }
    }

    /// Builds from the integer value of the string (bit j of `value` = bit j).
    pub fn from_u64(n: usize, value: u64) -> Self {
        let mut s = Self::zeros(n);
        s.limbs[0] = value;
        s.mask_tail();
        debug_assert!(n >= 64 || value < (1u64 << n), "value wider than n bits");
        s
    }

    /// Uniformly random n-bit string drawn from `rng`.
    pub fn random(n: usize, rng: &mut SplitMix64) -> Self {
        let mut s = Self::zeros(n);
        for limb in s.limbs.iter_mut() {
            *limb = rng.next_u64();
        }
        s.mask_tail();
        s
    }

    /// Parses an MSB-first binary literal such as `"0110"`.
    pub fn parse_bin(text: &str) -> Result<Self, BitError> {
        if text.is_empty() {
            return Err(BitError::EmptyString);
        }
        let n = text.len();
        let mut s = Self::zeros(n);
        for (i, ch) in text.chars().enumerate() {
            let bit = match ch {
                '0' => false,
                '1' => true,
                other => return Err(BitError::BadLiteral(other)),
            };
            s.set(n - 1 - i, bit);
        }
        Ok(s)
    }

    /// Parses an MSB-first hex literal into an n-bit string.
    pub fn parse_hex(n: usize, text: &str) -> Result<Self, BitError> {
        if n == 0 {
            return Err(BitError::EmptyString);
        }
        let mut s = Self::zeros(n);
        let digits = text.len();
        for (i, ch) in text.chars().enumerate() {
            let nibble = ch.to_digit(16).ok_or(BitError::BadLiteral(ch))? as u64;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let pos = 4 * (digits - 1 - i) + b;
                    if pos >= n {
                        return Err(BitError::TooWide(n));
                    }
                    s.set(pos, true);
                }
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.n);
        self.limbs[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize, bit: bool) {
        assert!(j < self.n);
        let mask = 1u64 << (j % 64);
        if bit {
            self.limbs[j / 64] |= mask;
        } else {
            self.limbs[j / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, j: usize) {
        assert!(j < self.n);
        self.limbs[j / 64] ^= 1u64 << (j % 64);
    }

    pub(crate) fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    pub(crate) fn from_limbs(n: usize, limbs: Vec<u64>) -> Self {
        debug_assert_eq!(limbs.len(), limb_count(n));
        let mut s = BitString { n, limbs };
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.limbs.len() - 1;
            self.limbs[last] &= (1u64 << rem) - 1;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.limbs.iter().map(|l| u64::from(l.count_ones())).sum()
    }

    /// Bitwise XOR of two equal-length strings.
    pub fn xor(&self, other: &Self) -> Result<Self, BitError> {
        if self.n != other.n {
            return Err(BitError::LengthMismatch(self.n, other.n));
        }
        let limbs = self
            .limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString { n: self.n, limbs })
    }

    /// The bit-by-string product d.x: 0^n when d = 0, x when d = 1.
    pub fn select(d: bool, x: &Self) -> Self {
        if d {
            x.clone()
        } else {
            Self::zeros(x.n)
        }
    }

    /// Fractional Hamming weight: the fraction of ones in the string.
    pub fn wham(&self) -> Ratio<u64> {
        Ratio::new(self.count_ones(), self.n as u64)
    }

    /// Fractional Hamming distance between two equal-length strings.
    pub fn dham(&self, other: &Self) -> Result<Ratio<u64>, BitError> {
        Ok(self.xor(other)?.wham())
    }

    /// MSB-first hex form of the n-bit integer, zero-padded to ceil(n/4) digits.
    pub fn to_hex(&self) -> String {
        let digits = self.n.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for i in (0..digits).rev() {
            let mut nibble = 0u64;
            for b in 0..4 {
                let pos = 4 * i + b;
                if pos < self.n && self.get(pos) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// MSB-first binary form, n characters.
    pub fn to_bin(&self) -> String {
        (0..self.n).rev().map(|j| if self.get(j) { '1' } else { '0' }).collect()
    }

    /// Low 64 bits as an integer (the whole value when n <= 64).
    pub fn as_u64(&self) -> u64 {
        self.limbs[0]
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_bin())
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({})", self.to_bin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(text: &str) -> BitString {
        BitString::parse_bin(text).unwrap()
    }

    #[test]
    fn xor_self_inverse_and_identity() {
        let x = bs("0110");
        assert_eq!(x.xor(&x).unwrap(), bs("0000"));
        assert_eq!(x.xor(&bs("0000")).unwrap(), x);
    }

    #[test]
    fn xor_bitwise() {
        assert_eq!(bs("1010").xor(&bs("0110")).unwrap(), bs("1100"));
    }

    #[test]
    fn xor_length_mismatch_is_error() {
        assert_eq!(
            bs("10").xor(&bs("100")),
            Err(BitError::LengthMismatch(2, 3))
        );
    }

    #[test]
    fn select_branches() {
        let x = bs("1011");
        assert_eq!(BitString::select(false, &x), bs("0000"));
        assert_eq!(BitString::select(true, &x), x);
        let z = BitString::zeros(7);
        assert_eq!(BitString::select(false, &z), z);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(bs("0110").wham(), Ratio::new(1, 2));
        let x = bs("10110");
        assert_eq!(x.dham(&x).unwrap(), Ratio::new(0, 1));
        assert_eq!(bs("1010").dham(&bs("0110")).unwrap(), Ratio::new(1, 2));
        // wham is the distance from the all-zero string
        assert_eq!(x.wham(), x.dham(&BitString::zeros(5)).unwrap());
    }

    #[test]
    fn hex_msb_first() {
        // n = 3, value X^2 + X = 110 -> integer 6
        assert_eq!(bs("110").to_hex(), "6");
        assert_eq!(bs("110").to_bin(), "110");
        // 12-bit value, zero padded
        assert_eq!(bs("000010100011").to_hex(), "0a3");
        assert_eq!(BitString::parse_hex(12, "0a3").unwrap(), bs("000010100011"));
    }

    #[test]
    fn hex_rejects_wide_literals() {
        assert!(BitString::parse_hex(3, "f8").is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trip(n in 1usize..200, seed in any::<u64>()) {
            let mut rng = SplitMix64::new(seed);
            let x = BitString::random(n, &mut rng);
            let back = BitString::parse_hex(n, &x.to_hex()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn wham_of_xor_is_dham(n in 1usize..150, seed in any::<u64>()) {
            let mut rng = SplitMix64::new(seed);
            let x = BitString::random(n, &mut rng);
            let y = BitString::random(n, &mut rng);
            prop_assert_eq!(x.xor(&y).unwrap().wham(), x.dham(&y).unwrap());
        }

        #[test]
        fn dham_triangle_inequality(n in 1usize..100, seed in any::<u64>()) {
            let mut rng = SplitMix64::new(seed);
            let x = BitString::random(n, &mut rng);
            let y = BitString::random(n, &mut rng);
            let z = BitString::random(n, &mut rng);
            let xy = x.dham(&y).unwrap();
            let yz = y.dham(&z).unwrap();
            let xz = x.dham(&z).unwrap();
            prop_assert!(xz <= xy + yz);
        }
    }
}
