//! Half-range test languages and the exact event probabilities behind the
//! main betting game.
//!
//! A string x of length n is in HALFRANGE_k of a table π when the preimage
//! of x^k (k copies of x) begins with 0; the preimage itself is the
//! witness either way. POLYHRNG scales the same idea polynomially.

use crate::error::{PermLabError, Result};
use crate::permspace::{FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::{all_strings_of_length, BinaryString};

/// Partial injective assignment from domain strings of a single length to
/// images of that length: the "status" a subgame conditions on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStatus {
    length: usize,
    /// (domain string, image) pairs, both of `length`.
    assignments: Vec<(BinaryString, BinaryString)>,
}

impl BlockStatus {
    pub fn new(length: usize) -> Self {
        BlockStatus {
            length,
            assignments: Vec::new(),
        }
    }

    pub fn from_assignments(
        length: usize,
        assignments: Vec<(BinaryString, BinaryString)>,
    ) -> Result<Self> {
        let mut status = BlockStatus::new(length);
        for (x, y) in assignments {
            status.assign(x, y)?;
        }
        Ok(status)
    }

    pub fn assign(&mut self, x: BinaryString, y: BinaryString) -> Result<()> {
        if x.len() != self.length || y.len() != self.length {
            return Err(PermLabError::InconsistentStatus(format!(
                "pair ({x}, {y}) does not fit a length-{} block",
                self.length
            )));
        }
        if self.assignments.iter().any(|(a, _)| a == &x) {
            return Err(PermLabError::InconsistentStatus(format!(
                "{x} already assigned"
            )));
        }
        if self.assignments.iter().any(|(_, b)| b == &y) {
            return Err(PermLabError::InconsistentStatus(format!(
                "image {y} already used"
            )));
        }
        self.assignments.push((x, y));
        Ok(())
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn assignments(&self) -> &[(BinaryString, BinaryString)] {
        &self.assignments
    }

    pub fn image_of(&self, x: &BinaryString) -> Option<&BinaryString> {
        self.assignments
            .iter()
            .find(|(a, _)| a == x)
            .map(|(_, b)| b)
    }

    pub fn preimage_of(&self, y: &BinaryString) -> Option<&BinaryString> {
        self.assignments
            .iter()
            .find(|(_, b)| b == y)
            .map(|(a, _)| a)
    }

    /// Block-`length` assignments induced by a prefix partial permutation.
    /// A prefix assigns the lexicographically first strings of the block.
    pub fn from_prefix(g: &PrefixPartialPermutation, length: usize) -> Self {
        let block = all_strings_of_length(length);
        let assigned = g.block_assignments(length);
        let mut status = BlockStatus::new(length);
        for (i, y) in assigned.iter().enumerate() {
            status
                .assign(block[i].clone(), y.clone())
                .expect("prefix blocks are injective");
        }
        status
    }
}

/// x ∈ HALFRANGE_k(π) iff the preimage of x^k begins with 0, computed by
/// inverse lookup.
pub fn halfrange_member(π: &FinitePermutation, x: &BinaryString, k: usize) -> Result<bool> {
    if k < 1 {
        return Err(PermLabError::InvalidArgument("k must be ≥ 1".into()));
    }
    if x.is_empty() {
        return Err(PermLabError::InvalidArgument(
            "the empty string has no half-range membership".into(),
        ));
    }
    let target = x.repeat(k);
    if target.len() > π.max_length() as usize {
        return Err(PermLabError::LengthOutOfRange(format!(
            "target {target} exceeds table max_length {}",
            π.max_length()
        )));
    }
    Ok(π.preimage(&target)?.first_bit() == Some(false))
}

/// The ∃-witness route: search all y of length k|x|−1 for π(0y) = x^k.
/// Same semantics as [`halfrange_member`] on total tables; kept as the
/// definitional oracle for equivalence checks.
pub fn halfrange_member_witness_search(
    π: &FinitePermutation,
    x: &BinaryString,
    k: usize,
) -> Result<bool> {
    if k < 1 || x.is_empty() {
        return Err(PermLabError::InvalidArgument(
            "need k ≥ 1 and a nonempty x".into(),
        ));
    }
    let target = x.repeat(k);
    if target.len() > π.max_length() as usize {
        return Err(PermLabError::LengthOutOfRange(format!(
            "target {target} exceeds table max_length {}",
            π.max_length()
        )));
    }
    let zero = BinaryString::zeros(1);
    for y in all_strings_of_length(k * x.len() - 1) {
        if π.image(&zero.concat(&y))? == &target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// x ∈ POLYHRNG_k(π) iff the preimage of x^{|x|^{k−1}} begins with 0.
/// |x| = 1 blocks are degenerate (witness length |x|^k − 1 = 0) and the
/// construction never evaluates them; they are rejected outright.
pub fn polyhrng_member(π: &FinitePermutation, x: &BinaryString, k: usize) -> Result<bool> {
    if x.len() <= 1 {
        return Err(PermLabError::DegenerateBlock(format!(
            "POLYHRNG is undefined for |x| = {}",
            x.len()
        )));
    }
    let copies = x.len().pow(k.saturating_sub(1) as u32);
    let target = x.repeat(copies);
    if target.len() > π.max_length() as usize {
        return Err(PermLabError::LengthOutOfRange(format!(
            "target {target} exceeds table max_length {}",
            π.max_length()
        )));
    }
    Ok(π.preimage(&target)?.first_bit() == Some(false))
}

/// Exact Pr(𝒜_n | ω) where 𝒜_n is the event that the preimage of
/// 0^{(k+3)n} starts with 1. Returns 0 or 1 when the status determines the
/// event; otherwise the ratio of 1-prefixed free domain strings to all
/// free domain strings.
pub fn halfrange_event_probability(
    ω: &BlockStatus,
    n: usize,
    k: usize,
) -> Result<ExactRational> {
    let block_len = (k + 3) * n;
    if n < 1 {
        return Err(PermLabError::InvalidArgument("n must be ≥ 1".into()));
    }
    if ω.length() != block_len {
        return Err(PermLabError::InconsistentStatus(format!(
            "status covers length {}, event lives at length {block_len}",
            ω.length()
        )));
    }
    let target = BinaryString::zeros(block_len);
    if let Some(x) = ω.preimage_of(&target) {
        return Ok(if x.first_bit() == Some(true) {
            ExactRational::one()
        } else {
            ExactRational::zero()
        });
    }
    // The preimage of the target is one of the unassigned domain strings,
    // uniformly.
    let mut free_total: i64 = 0;
    let mut free_one_prefixed: i64 = 0;
    for x in all_strings_of_length(block_len) {
        if ω.image_of(&x).is_none() {
            free_total += 1;
            if x.first_bit() == Some(true) {
                free_one_prefixed += 1;
            }
        }
    }
    if free_total == 0 {
        return Err(PermLabError::InconsistentStatus(
            "fully assigned status with no preimage for the target".into(),
        ));
    }
    Ok(ExactRational::ratio(free_one_prefixed, free_total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permspace::enumerate_permutations;

    fn s(text: &str) -> BinaryString {
        text.parse().unwrap()
    }

    #[test]
    fn halfrange_on_identity() {
        let id = FinitePermutation::identity(2);
        // preimage of 01 is 01, starts with 0
        assert!(halfrange_member(&id, &s("01"), 1).unwrap());
        assert!(!halfrange_member(&id, &s("11"), 1).unwrap());
        assert!(halfrange_member(&id, &s("0"), 2).unwrap());
    }

    #[test]
    fn halfrange_rejects_out_of_range() {
        let id = FinitePermutation::identity(2);
        assert!(halfrange_member(&id, &s("11"), 2).is_err());
        assert!(halfrange_member(&id, &s("λ"), 1).is_err());
    }

    #[test]
    fn halfrange_at_length_six_follows_the_inverse() {
        // x = 11, k = 3: the target is 111111. Rerouting 011111 onto it
        // makes x a member; the identity leaves it out.
        let id = FinitePermutation::identity(6);
        assert!(!halfrange_member(&id, &s("11"), 3).unwrap());
        let mut images: Vec<BinaryString> =
            (0..id.domain_size()).map(|i| id.image(&crate::strings::domain_string_at(i)).unwrap().clone()).collect();
        let a = crate::strings::index_of(&s("011111"));
        let b = crate::strings::index_of(&s("111111"));
        images.swap(a, b);
        let rerouted = FinitePermutation::from_images(6, images).unwrap();
        assert!(halfrange_member(&rerouted, &s("11"), 3).unwrap());
        assert_eq!(
            halfrange_member(&rerouted, &s("11"), 3).unwrap(),
            halfrange_member_witness_search(&rerouted, &s("11"), 3).unwrap()
        );
    }

    #[test]
    fn polyhrng_reduces_to_halfrange_at_k1() {
        let id = FinitePermutation::identity(2);
        assert!(polyhrng_member(&id, &s("01"), 1).unwrap());
        assert!(!polyhrng_member(&id, &s("10"), 1).unwrap());
        assert!(matches!(
            polyhrng_member(&id, &s("0"), 2),
            Err(PermLabError::DegenerateBlock(_))
        ));
    }

    #[test]
    fn witness_equivalence_exhaustive_length2() {
        // ∃-witness search agrees with inverse lookup on all 48 tables.
        for t in enumerate_permutations(2).unwrap() {
            for x in all_strings_of_length(1) {
                assert_eq!(
                    halfrange_member(&t, &x, 2).unwrap(),
                    halfrange_member_witness_search(&t, &x, 2).unwrap()
                );
            }
            for x in all_strings_of_length(2) {
                assert_eq!(
                    halfrange_member(&t, &x, 1).unwrap(),
                    halfrange_member_witness_search(&t, &x, 1).unwrap()
                );
            }
        }
    }

    #[test]
    fn complement_symmetry() {
        // x ∉ HALFRANGE_k iff the preimage of x^k starts with 1.
        for t in enumerate_permutations(2).unwrap() {
            for x in all_strings_of_length(2) {
                let member = halfrange_member(&t, &x, 1).unwrap();
                let pre = t.preimage(&x).unwrap();
                assert_eq!(!member, pre.first_bit() == Some(true));
            }
        }
    }

    #[test]
    fn event_probability_empty_status_is_half() {
        let ω = BlockStatus::new(3);
        assert_eq!(
            halfrange_event_probability(&ω, 1, 0).unwrap(),
            ExactRational::ratio(1, 2)
        );
    }

    #[test]
    fn event_probability_determined_cases() {
        let mut ω = BlockStatus::new(3);
        ω.assign(s("101"), s("000")).unwrap();
        assert_eq!(
            halfrange_event_probability(&ω, 1, 0).unwrap(),
            ExactRational::one()
        );
        let mut ω = BlockStatus::new(3);
        ω.assign(s("001"), s("000")).unwrap();
        assert_eq!(
            halfrange_event_probability(&ω, 1, 0).unwrap(),
            ExactRational::zero()
        );
    }

    #[test]
    fn event_probability_counting_case() {
        // Two 0-prefixed strings assigned to non-target images: 4 of the 6
        // remaining candidates start with 1.
        let mut ω = BlockStatus::new(3);
        ω.assign(s("000"), s("111")).unwrap();
        ω.assign(s("001"), s("110")).unwrap();
        assert_eq!(
            halfrange_event_probability(&ω, 1, 0).unwrap(),
            ExactRational::ratio(2, 3)
        );
    }

    #[test]
    fn probability_coherence_is_a_martingale_in_the_status() {
        // Averaging over all free images of any unassigned string returns
        // the current probability. Exhaustive at block length 3 over
        // statuses with ≤ 2 assignments.
        let block = all_strings_of_length(3);
        let mut statuses = vec![BlockStatus::new(3)];
        for _ in 0..2 {
            let mut next = Vec::new();
            for ω in &statuses {
                for x in &block {
                    if ω.image_of(x).is_some() {
                        continue;
                    }
                    for y in &block {
                        if ω.preimage_of(y).is_some() {
                            continue;
                        }
                        let mut ext = ω.clone();
                        ext.assign(x.clone(), y.clone()).unwrap();
                        next.push(ext);
                    }
                }
            }
            statuses.extend(next);
        }
        for ω in &statuses {
            let p = halfrange_event_probability(ω, 1, 0).unwrap();
            for x in &block {
                if ω.image_of(x).is_some() {
                    continue;
                }
                let mut total = ExactRational::zero();
                let mut count = 0i64;
                for y in &block {
                    if ω.preimage_of(y).is_some() {
                        continue;
                    }
                    let mut ext = ω.clone();
                    ext.assign(x.clone(), y.clone()).unwrap();
                    total += halfrange_event_probability(&ext, 1, 0).unwrap();
                    count += 1;
                }
                assert_eq!(total, &p * &ExactRational::from_int(count));
            }
        }
    }

    #[test]
    fn status_rejects_collisions() {
        let mut ω = BlockStatus::new(3);
        ω.assign(s("000"), s("111")).unwrap();
        assert!(ω.assign(s("000"), s("110")).is_err());
        assert!(ω.assign(s("001"), s("111")).is_err());
        assert!(ω.assign(s("00"), s("11")).is_err());
    }
}
