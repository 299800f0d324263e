//! Canonical binary strings and the standard enumeration
//! λ, 0, 1, 00, 01, 10, 11, 000, … (length-then-lexicographic order).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PermLabError, Result};

/// A finite string over {0,1}. The empty string λ is allowed.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryString {
    bits: Vec<bool>,
}

impl BinaryString {
    pub fn empty() -> Self {
        BinaryString { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BinaryString { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BinaryString {
            bits: vec![false; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        BinaryString { bits: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn first_bit(&self) -> Option<bool> {
        self.bits.first().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn concat(&self, other: &BinaryString) -> BinaryString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BinaryString { bits }
    }

    /// x^k: the string repeated k times.
    pub fn repeat(&self, k: usize) -> BinaryString {
        let mut bits = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            bits.extend_from_slice(&self.bits);
        }
        BinaryString { bits }
    }

    pub fn starts_with(&self, prefix: &BinaryString) -> bool {
        self.bits.len() >= prefix.bits.len() && self.bits[..prefix.bits.len()] == prefix.bits[..]
    }

    /// Value of the bits read as a big-endian integer. The rank of the
    /// string within its length block.
    pub fn lex_rank(&self) -> BigUint {
        let mut v = BigUint::zero();
        for &b in &self.bits {
            v <<= 1u8;
            if b {
                v += 1u8;
            }
        }
        v
    }

    /// `lex_rank` as usize; blocks this library materializes always fit.
    pub fn lex_rank_usize(&self) -> usize {
        self.lex_rank().to_usize().expect("block too large")
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return write!(f, "λ");
        }
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for BinaryString {
    type Err = PermLabError;

    /// Accepts a string of 0/1 characters; `"λ"` and `""` both denote the
    /// empty string.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "λ" {
            return Ok(BinaryString::empty());
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(PermLabError::Parse(format!(
                        "invalid binary string {s:?}"
                    )))
                }
            }
        }
        Ok(BinaryString { bits })
    }
}

impl Serialize for BinaryString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // JSON uses "" for λ so keys stay plain ASCII.
        let s: String = self
            .bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        serializer.serialize_str(&s)
    }
}

impl<'de> Deserialize<'de> for BinaryString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Length-then-lexicographic order, matching the standard enumeration.
impl Ord for BinaryString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BinaryString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Position of a string in the standard enumeration s_0 = λ, s_1 = 0,
/// s_2 = 1, s_3 = 00, … Indices are unbounded naturals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StringIndex(pub BigUint);

impl StringIndex {
    pub fn from_u64(i: u64) -> Self {
        StringIndex(BigUint::from(i))
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }
}

/// s_i for an unbounded index. Strings of length n occupy indices
/// [2^n − 1, 2^{n+1} − 2] in lexicographic order.
pub fn index_to_string(i: &StringIndex) -> BinaryString {
    let succ = &i.0 + BigUint::one();
    let n = (succ.bits() - 1) as usize;
    let offset = &succ - (BigUint::one() << n);
    let mut bits = vec![false; n];
    for (k, bit) in bits.iter_mut().enumerate() {
        *bit = offset.bit((n - 1 - k) as u64);
    }
    BinaryString::from_bits(bits)
}

/// Inverse of [`index_to_string`].
pub fn string_to_index(s: &BinaryString) -> StringIndex {
    let block_start = (BigUint::one() << s.len()) - BigUint::one();
    StringIndex(block_start + s.lex_rank())
}

/// s_i for a machine-sized index; the common case inside runners.
pub fn domain_string_at(i: usize) -> BinaryString {
    index_to_string(&StringIndex::from_u64(i as u64))
}

/// Index of `s` as usize. Panics if it does not fit, which cannot happen
/// for strings short enough to appear in a materialized table.
pub fn index_of(s: &BinaryString) -> usize {
    string_to_index(s).to_usize().expect("index too large")
}

/// All strings of length n in lexicographic order.
pub fn all_strings_of_length(n: usize) -> Vec<BinaryString> {
    let count: usize = 1usize << n;
    let mut out = Vec::with_capacity(count);
    for v in 0..count {
        let mut bits = vec![false; n];
        for (k, bit) in bits.iter_mut().enumerate() {
            *bit = (v >> (n - 1 - k)) & 1 == 1;
        }
        out.push(BinaryString::from_bits(bits));
    }
    out
}

/// First index of the length-n block: 2^n − 1.
pub fn block_start(n: usize) -> usize {
    (1usize << n) - 1
}

/// One past the last index of the length-n block: 2^{n+1} − 1.
pub fn block_end_exclusive(n: usize) -> usize {
    (1usize << (n + 1)) - 1
}

/// Length of s_i for a machine-sized index.
pub fn length_of_index(i: usize) -> usize {
    (usize::BITS - (i + 1).leading_zeros() - 1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> BinaryString {
        text.parse().unwrap()
    }

    #[test]
    fn enumeration_start_matches_definition() {
        // s_0=λ, s_1=0, s_2=1, s_3=00, s_4=01
        let expected = ["λ", "0", "1", "00", "01", "10", "11", "000"];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(domain_string_at(i), s(e), "s_{i}");
        }
    }

    #[test]
    fn string_to_index_examples() {
        assert_eq!(string_to_index(&s("λ")).to_usize(), Some(0));
        assert_eq!(string_to_index(&s("0")).to_usize(), Some(1));
        assert_eq!(string_to_index(&s("1")).to_usize(), Some(2));
        // 11 → 6, by enumerating lengths 0–2.
        assert_eq!(string_to_index(&s("11")).to_usize(), Some(6));
    }

    #[test]
    fn block_boundaries() {
        assert_eq!(block_start(0), 0);
        assert_eq!(block_start(3), 7);
        assert_eq!(block_end_exclusive(2), 7);
        assert_eq!(length_of_index(0), 0);
        assert_eq!(length_of_index(6), 2);
        assert_eq!(length_of_index(7), 3);
    }

    #[test]
    fn order_is_length_then_lex() {
        assert!(s("1") < s("00"));
        assert!(s("01") < s("10"));
        assert!(s("λ") < s("0"));
    }

    #[test]
    fn repeat_and_concat() {
        assert_eq!(s("01").repeat(3), s("010101"));
        assert_eq!(s("0").concat(&s("11")), s("011"));
        assert_eq!(s("λ").repeat(5), s("λ"));
    }

    proptest! {
        #[test]
        fn round_trip_index(i in 0u64..(1 << 16)) {
            let idx = StringIndex::from_u64(i);
            let back = string_to_index(&index_to_string(&idx));
            prop_assert_eq!(back, idx);
        }

        #[test]
        fn index_order_matches_string_order(i in 0u64..(1 << 12), j in 0u64..(1 << 12)) {
            let si = index_to_string(&StringIndex::from_u64(i));
            let sj = index_to_string(&StringIndex::from_u64(j));
            prop_assert_eq!(i.cmp(&j), si.cmp(&sj));
        }
    }
}
