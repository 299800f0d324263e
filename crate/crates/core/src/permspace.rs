//! The permutation-space data model: prefix partial permutations, free
//! sets, the exact cylinder measure, full permutation tables bounded by a
//! maximum length, and the exhaustive enumeration oracle behind all
//! brute-force measure checks.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PermLabError, Result};
use crate::rational::ExactRational;
use crate::strings::{
    all_strings_of_length, block_end_exclusive, block_start, domain_string_at, length_of_index,
    BinaryString,
};

/// Hard ceiling for exhaustive table enumeration. 1·2·24·40320 tables at
/// length 3 is the practical limit for desk-scale brute force.
pub const ENUMERATION_GUARD: u32 = 3;

/// A finite prefix of a permutation's value sequence: the images
/// g(s_0), …, g(s_{N−1}) in standard enumeration order. The betting state
/// every martingale evaluates on.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PrefixPartialPermutation {
    values: Vec<BinaryString>,
}

impl PrefixPartialPermutation {
    pub fn empty() -> Self {
        PrefixPartialPermutation { values: Vec::new() }
    }

    /// Validates per-index lengths and per-block injectivity.
    pub fn from_values(values: Vec<BinaryString>) -> Result<Self> {
        let mut g = PrefixPartialPermutation::empty();
        for v in values {
            g = g.extend(&v)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BinaryString] {
        &self.values
    }

    pub fn value_at(&self, i: usize) -> &BinaryString {
        &self.values[i]
    }

    /// l(g): the length of the next string in the standard enumeration.
    pub fn betting_length(&self) -> usize {
        length_of_index(self.len())
    }

    /// Images already used within the current betting block.
    pub fn used_in_current_block(&self) -> &[BinaryString] {
        let n = self.betting_length();
        &self.values[block_start(n).min(self.len())..]
    }

    /// free(g): strings of the betting length not yet appearing as images,
    /// in lexicographic order.
    pub fn free_values(&self) -> Vec<BinaryString> {
        let n = self.betting_length();
        let used = self.used_in_current_block();
        all_strings_of_length(n)
            .into_iter()
            .filter(|x| !used.contains(x))
            .collect()
    }

    /// (g, x): appends the next function value. Rejects images of the
    /// wrong length or already used in the current block.
    pub fn extend(&self, x: &BinaryString) -> Result<Self> {
        let n = self.betting_length();
        if x.len() != n {
            return Err(PermLabError::InvalidExtension(format!(
                "image {x} has length {}, betting length is {n}",
                x.len()
            )));
        }
        if self.used_in_current_block().contains(x) {
            return Err(PermLabError::InvalidExtension(format!(
                "image {x} already used in the length-{n} block"
            )));
        }
        let mut values = self.values.clone();
        values.push(x.clone());
        Ok(PrefixPartialPermutation { values })
    }

    pub fn is_prefix_of(&self, other: &PrefixPartialPermutation) -> bool {
        other.len() >= self.len() && other.values[..self.len()] == self.values[..]
    }

    pub fn truncated(&self, len: usize) -> Self {
        PrefixPartialPermutation {
            values: self.values[..len.min(self.len())].to_vec(),
        }
    }

    /// Images assigned within the length-n block, possibly fewer than 2^n.
    pub fn block_assignments(&self, n: usize) -> &[BinaryString] {
        let start = block_start(n).min(self.len());
        let end = block_end_exclusive(n).min(self.len());
        &self.values[start..end]
    }
}

impl fmt::Display for PrefixPartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for PrefixPartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// P(n, k) = n!/(n−k)!, the number of k-permutations of n elements.
/// P(n, 0) = 1, which lets one formula cover the block boundary.
fn falling_factorial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= n - j;
    }
    acc
}

/// μ(⟨g⟩): the exact probability that a uniformly random length-preserving
/// permutation extends g. With n the betting length and m the number of
/// images already placed in block n:
///
///   μ(⟨g⟩) = (∏_{k<n} 1/(2^k)!) · 1/P(2^n, m)
pub fn cylinder_measure(g: &PrefixPartialPermutation) -> ExactRational {
    let n = g.betting_length();
    let m = g.len() - block_start(n);
    let mut den = BigInt::one();
    for k in 0..n {
        den *= factorial(1u64 << k);
    }
    den *= falling_factorial(1u64 << n, m as u64);
    ExactRational::from_big_ratio(BigInt::one(), den).expect("nonzero denominator")
}

/// A complete length-preserving permutation table on all strings of length
/// at most `max_length`; the environment strategies bet against.
#[derive(Clone, PartialEq, Eq)]
pub struct FinitePermutation {
    max_length: u32,
    /// Images in standard enumeration order, length 2^{max_length+1} − 1.
    images: Vec<BinaryString>,
    /// preimages[i] = x with π(x) = s_i, aligned with the enumeration.
    preimages: Vec<BinaryString>,
}

impl FinitePermutation {
    pub fn from_images(max_length: u32, images: Vec<BinaryString>) -> Result<Self> {
        let expected = block_end_exclusive(max_length as usize);
        if images.len() != expected {
            return Err(PermLabError::InvalidTable(format!(
                "expected {expected} images for max_length {max_length}, got {}",
                images.len()
            )));
        }
        let mut preimages = vec![BinaryString::empty(); expected];
        let mut seen = vec![false; expected];
        for (i, y) in images.iter().enumerate() {
            let n = length_of_index(i);
            if y.len() != n {
                return Err(PermLabError::InvalidTable(format!(
                    "image of {} must have length {n}, got {y}",
                    domain_string_at(i)
                )));
            }
            let j = block_start(n) + y.lex_rank_usize();
            if seen[j] {
                return Err(PermLabError::InvalidTable(format!(
                    "image {y} repeated in the length-{n} block"
                )));
            }
            seen[j] = true;
            preimages[j] = domain_string_at(i);
        }
        Ok(FinitePermutation {
            max_length,
            images,
            preimages,
        })
    }

    pub fn max_length(&self) -> u32 {
        self.max_length
    }

    pub fn identity(max_length: u32) -> Self {
        let images = (0..block_end_exclusive(max_length as usize))
            .map(domain_string_at)
            .collect();
        FinitePermutation::from_images(max_length, images).expect("identity is legal")
    }

    /// Table whose restriction to every length n is the single cycle
    /// x ↦ x+1 (mod 2^n) on lexicographic ranks.
    pub fn single_cycles(max_length: u32) -> Self {
        let mut images = Vec::new();
        for n in 0..=max_length as usize {
            let block = all_strings_of_length(n);
            let size = block.len();
            for i in 0..size {
                images.push(block[(i + 1) % size].clone());
            }
        }
        FinitePermutation::from_images(max_length, images).expect("cycle table is legal")
    }

    /// Fisher–Yates per length block, seeded; reproducible experiments.
    pub fn random(max_length: u32, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut images = Vec::new();
        for n in 0..=max_length as usize {
            let mut block = all_strings_of_length(n);
            block.shuffle(&mut rng);
            images.extend(block);
        }
        FinitePermutation::from_images(max_length, images).expect("shuffled table is legal")
    }

    pub fn image(&self, x: &BinaryString) -> Result<&BinaryString> {
        if x.len() > self.max_length as usize {
            return Err(PermLabError::LengthOutOfRange(format!(
                "{x} is longer than table max_length {}",
                self.max_length
            )));
        }
        Ok(&self.images[block_start(x.len()) + x.lex_rank_usize()])
    }

    pub fn preimage(&self, y: &BinaryString) -> Result<&BinaryString> {
        if y.len() > self.max_length as usize {
            return Err(PermLabError::LengthOutOfRange(format!(
                "{y} is longer than table max_length {}",
                self.max_length
            )));
        }
        Ok(&self.preimages[block_start(y.len()) + y.lex_rank_usize()])
    }

    /// ν_π ↾ count: the first `count` images as a prefix partial
    /// permutation.
    pub fn value_prefix(&self, count: usize) -> PrefixPartialPermutation {
        PrefixPartialPermutation {
            values: self.images[..count.min(self.images.len())].to_vec(),
        }
    }

    pub fn full_prefix(&self) -> PrefixPartialPermutation {
        self.value_prefix(self.images.len())
    }

    pub fn domain_size(&self) -> usize {
        self.images.len()
    }

    pub fn extends(&self, g: &PrefixPartialPermutation) -> bool {
        g.len() <= self.images.len() && self.images[..g.len()] == g.values()[..]
    }

    /// UTF-8 text format: header `maxlen=<n>`, then `<x> -> <y>` per
    /// domain string in standard enumeration order. λ is written as `λ`.
    pub fn to_text(&self) -> String {
        let mut out = format!("maxlen={}\n", self.max_length);
        for (i, y) in self.images.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", domain_string_at(i), y));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| PermLabError::Parse("empty table file".into()))?;
        let max_length: u32 = header
            .trim()
            .strip_prefix("maxlen=")
            .ok_or_else(|| PermLabError::Parse(format!("bad header {header:?}")))?
            .parse()
            .map_err(|e| PermLabError::Parse(format!("bad maxlen: {e}")))?;
        let mut map = BTreeMap::new();
        for line in lines {
            let (x, y) = line
                .split_once("->")
                .ok_or_else(|| PermLabError::Parse(format!("bad line {line:?}")))?;
            let x: BinaryString = x.parse()?;
            let y: BinaryString = y.parse()?;
            map.insert(x, y);
        }
        Self::from_map(max_length, &map)
    }

    /// JSON mirror: {"maxlen": n, "map": {"x": "y", …}} with "" for λ.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<BinaryString, BinaryString> = (0..self.images.len())
            .map(|i| (domain_string_at(i), self.images[i].clone()))
            .collect();
        let doc = TableDoc {
            maxlen: self.max_length,
            map,
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text)
            .map_err(|e| PermLabError::Parse(format!("bad table json: {e}")))?;
        Self::from_map(doc.maxlen, &doc.map)
    }

    fn from_map(max_length: u32, map: &BTreeMap<BinaryString, BinaryString>) -> Result<Self> {
        let mut images = Vec::new();
        for i in 0..block_end_exclusive(max_length as usize) {
            let x = domain_string_at(i);
            let y = map.get(&x).ok_or_else(|| {
                PermLabError::Parse(format!("table is missing the image of {x}"))
            })?;
            images.push(y.clone());
        }
        FinitePermutation::from_images(max_length, images)
    }
}

impl fmt::Debug for FinitePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePermutation(maxlen={})", self.max_length)
    }
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    maxlen: u32,
    map: BTreeMap<BinaryString, BinaryString>,
}

/// All arrangements of `items` in lexicographic order.
fn lex_permutations(items: &[BinaryString]) -> Vec<Vec<BinaryString>> {
    let mut current: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::new();
    loop {
        out.push(current.iter().map(|&i| items[i].clone()).collect());
        // next_permutation on indices
        let Some(pivot) = current.windows(2).rposition(|w| w[0] < w[1]) else {
            break;
        };
        let swap = current.iter().rposition(|&x| x > current[pivot]).unwrap();
        current.swap(pivot, swap);
        current[pivot + 1..].reverse();
    }
    out
}

/// Exhaustive enumeration of every table up to `max_length`, yielded in
/// lexicographic order of concatenated value sequences. The count is
/// ∏_{k≤max_length} (2^k)!. Refuses max_length beyond the guard.
pub fn enumerate_permutations(
    max_length: u32,
) -> Result<impl Iterator<Item = FinitePermutation>> {
    if max_length > ENUMERATION_GUARD {
        return Err(PermLabError::InfeasibleEnumeration {
            requested: max_length,
            guard: ENUMERATION_GUARD,
        });
    }
    let block_perms: Vec<Vec<Vec<BinaryString>>> = (0..=max_length as usize)
        .map(|n| lex_permutations(&all_strings_of_length(n)))
        .collect();
    let total: usize = block_perms.iter().map(Vec::len).product();
    let iter = (0..total).map(move |mut idx| {
        // Mixed-radix digits, earliest block most significant.
        let mut choices = vec![0usize; block_perms.len()];
        for (n, perms) in block_perms.iter().enumerate().rev() {
            choices[n] = idx % perms.len();
            idx /= perms.len();
        }
        let mut images = Vec::new();
        for (n, perms) in block_perms.iter().enumerate() {
            images.extend(perms[choices[n]].iter().cloned());
        }
        FinitePermutation::from_images(max_length, images).expect("enumerated table is legal")
    });
    Ok(iter)
}

/// Number of tables `enumerate_permutations(max_length)` yields.
pub fn enumeration_count(max_length: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 0..=max_length as u64 {
        acc *= factorial(1u64 << k);
    }
    acc
}

/// Whether the images, indexed by lexicographic rank of their domain
/// strings, form a single cycle covering the whole block.
pub fn is_single_cycle(block_images: &[BinaryString]) -> bool {
    let size = block_images.len();
    if size == 0 {
        return false;
    }
    let mut pos = 0usize;
    for step in 1..=size {
        pos = block_images[pos].lex_rank_usize();
        if pos == 0 {
            return step == size;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> BinaryString {
        text.parse().unwrap()
    }

    fn g(values: &[&str]) -> PrefixPartialPermutation {
        PrefixPartialPermutation::from_values(values.iter().map(|v| s(v)).collect()).unwrap()
    }

    #[test]
    fn betting_length_examples() {
        assert_eq!(g(&[]).betting_length(), 0);
        assert_eq!(g(&["λ"]).betting_length(), 1);
        assert_eq!(g(&["λ", "0", "1"]).betting_length(), 2);
    }

    #[test]
    fn free_values_examples() {
        // free([λ]) = {0,1}
        assert_eq!(g(&["λ"]).free_values(), vec![s("0"), s("1")]);
        // free([λ,1,0,11]) = {00,01,10}
        assert_eq!(
            g(&["λ", "1", "0", "11"]).free_values(),
            vec![s("00"), s("01"), s("10")]
        );
        // free([λ,1,0,11,00,01]) = {10}
        assert_eq!(g(&["λ", "1", "0", "11", "00", "01"]).free_values(), vec![s("10")]);
    }

    #[test]
    fn extend_examples() {
        let base = g(&["λ"]);
        assert_eq!(base.extend(&s("0")).unwrap(), g(&["λ", "0"]));
        assert!(g(&["λ", "0"]).extend(&s("0")).is_err());
        assert!(g(&["λ", "0"]).extend(&s("00")).is_err());
        assert_eq!(
            g(&["λ", "0", "1"]).extend(&s("10")).unwrap(),
            g(&["λ", "0", "1", "10"])
        );
    }

    #[test]
    fn measure_examples() {
        assert_eq!(cylinder_measure(&g(&[])), ExactRational::one());
        assert_eq!(cylinder_measure(&g(&["λ", "0"])), ExactRational::ratio(1, 2));
        // Full prefix through length 2: 1!·2!·4! = 48 equally likely tables.
        assert_eq!(
            cylinder_measure(&g(&["λ", "0", "1", "00", "01", "10", "11"])),
            ExactRational::ratio(1, 48)
        );
        assert_eq!(cylinder_measure(&g(&["λ", "0", "1"])), ExactRational::ratio(1, 2));
    }

    #[test]
    fn one_step_measure_ratio() {
        // μ(⟨g,x⟩)/μ(⟨g⟩) = 1/|free(g)| for every free x, all g over lengths ≤ 2.
        let mut stack = vec![g(&[])];
        while let Some(p) = stack.pop() {
            if p.len() >= 7 {
                continue;
            }
            let m = cylinder_measure(&p);
            let free = p.free_values();
            let inv = ExactRational::from_int(free.len() as i64).recip().unwrap();
            for x in free {
                let q = p.extend(&x).unwrap();
                assert_eq!(cylinder_measure(&q), &m * &inv);
                stack.push(q);
            }
        }
    }

    #[test]
    fn measure_additivity_exhaustive() {
        // μ(⟨g⟩) = Σ_{x∈free(g)} μ(⟨g,x⟩) for every g with betting length ≤ 2.
        let mut stack = vec![g(&[])];
        while let Some(p) = stack.pop() {
            if p.betting_length() > 2 {
                continue;
            }
            let total: ExactRational = p
                .free_values()
                .into_iter()
                .map(|x| {
                    let q = p.extend(&x).unwrap();
                    let m = cylinder_measure(&q);
                    if q.len() < 7 {
                        stack.push(q);
                    }
                    m
                })
                .sum();
            assert_eq!(total, cylinder_measure(&p));
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_permutations(1).unwrap().count(), 2);
        assert_eq!(enumerate_permutations(2).unwrap().count(), 48);
        assert!(matches!(
            enumerate_permutations(4),
            Err(PermLabError::InfeasibleEnumeration { .. })
        ));
    }

    #[test]
    fn enumeration_is_unique_and_ordered() {
        let tables: Vec<_> = enumerate_permutations(2).unwrap().collect();
        let seqs: Vec<Vec<BinaryString>> = tables
            .iter()
            .map(|t| t.full_prefix().values().to_vec())
            .collect();
        let mut sorted = seqs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 48);
        assert_eq!(seqs, sorted, "lexicographic yield order");
    }

    #[test]
    fn empirical_measure_matches_formula() {
        let tables: Vec<_> = enumerate_permutations(2).unwrap().collect();
        for probe in [g(&["λ", "1"]), g(&["λ", "0", "1", "11"]), g(&[])] {
            let hits = tables.iter().filter(|t| t.extends(&probe)).count();
            assert_eq!(
                ExactRational::ratio(hits as i64, 48),
                cylinder_measure(&probe)
            );
        }
    }

    #[test]
    fn preimage_is_inverse() {
        let t = FinitePermutation::random(3, 7);
        for i in 0..t.domain_size() {
            let x = domain_string_at(i);
            let y = t.image(&x).unwrap().clone();
            assert_eq!(t.preimage(&y).unwrap(), &x);
        }
        assert!(t.image(&s("0000")).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = FinitePermutation::random(2, 42);
        let text = t.to_text();
        assert!(text.starts_with("maxlen=2\n"));
        assert!(text.contains("λ -> λ"));
        assert_eq!(FinitePermutation::from_text(&text).unwrap(), t);
    }

    #[test]
    fn json_round_trip() {
        let t = FinitePermutation::single_cycles(2);
        assert_eq!(FinitePermutation::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn single_cycle_detection() {
        let t = FinitePermutation::single_cycles(3);
        for n in 1..=3usize {
            let block = t.full_prefix().block_assignments(n).to_vec();
            assert!(is_single_cycle(&block));
        }
        let id = FinitePermutation::identity(2);
        assert!(!is_single_cycle(id.full_prefix().block_assignments(2)));
    }

    #[test]
    fn rejects_bad_tables() {
        // repeated image within a block
        let bad = vec![s("λ"), s("0"), s("0")];
        assert!(FinitePermutation::from_images(1, bad).is_err());
        // wrong image length
        let bad = vec![s("λ"), s("00"), s("1")];
        assert!(FinitePermutation::from_images(1, bad).is_err());
    }

    proptest! {
        #[test]
        fn random_tables_are_deterministic(seed in 0u64..500) {
            let a = FinitePermutation::random(2, seed);
            let b = FinitePermutation::random(2, seed);
            prop_assert_eq!(a, b);
        }
    }
}
