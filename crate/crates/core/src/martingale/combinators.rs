//! Sums of martingales, covers, and the Kraft-style mass check — the
//! constructive content of the Ville-equivalence theorem.

use std::sync::Arc;

use crate::error::{PermLabError, Result};
use crate::permspace::{cylinder_measure, FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::block_end_exclusive;

use super::{PermMartingale, SharedMartingale};

struct WeightedSum {
    parts: Vec<(ExactRational, SharedMartingale)>,
}

impl PermMartingale for WeightedSum {
    fn name(&self) -> String {
        if self.parts.is_empty() {
            "zero".to_string()
        } else {
            format!("sum[{}]", self.parts.len())
        }
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        let mut total = ExactRational::zero();
        for (w, d) in &self.parts {
            if w.is_zero() {
                continue;
            }
            total += w * &d.value(g)?;
        }
        Ok(total)
    }
}

/// Σ w_i·d_i pointwise. Averaging is preserved; the initial capital is
/// Σ w_i·d_i([ ]). Weights must be nonnegative and match the strategy
/// list in length.
pub fn weighted_sum(
    ds: Vec<SharedMartingale>,
    weights: Vec<ExactRational>,
) -> Result<SharedMartingale> {
    if ds.len() != weights.len() {
        return Err(PermLabError::MismatchedLengths(format!(
            "{} strategies, {} weights",
            ds.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(PermLabError::InvalidArgument(format!(
            "negative weight {w}"
        )));
    }
    Ok(Arc::new(WeightedSum {
        parts: weights.into_iter().zip(ds).collect(),
    }))
}

/// A list of prefix partial permutations read as an open cover
/// ∪⟨g⟩.
#[derive(Clone, Debug, Default)]
pub struct CoverSet {
    prefixes: Vec<PrefixPartialPermutation>,
}

impl CoverSet {
    pub fn new(prefixes: Vec<PrefixPartialPermutation>) -> Self {
        CoverSet { prefixes }
    }

    pub fn prefixes(&self) -> &[PrefixPartialPermutation] {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    /// No element is a (proper or improper) prefix of another element.
    pub fn is_prefix_free(&self) -> bool {
        for (i, a) in self.prefixes.iter().enumerate() {
            for (j, b) in self.prefixes.iter().enumerate() {
                if i != j && a.is_prefix_of(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Σ μ(g) over the listed prefixes; counts overlaps twice.
    pub fn total_measure(&self) -> ExactRational {
        self.prefixes.iter().map(cylinder_measure).sum()
    }

    pub fn covers_table(&self, π: &FinitePermutation) -> bool {
        self.prefixes.iter().any(|g| π.extends(g))
    }
}

/// The minimal prefixes where d first reaches k, searched in standard
/// enumeration order through the blocks of length ≤ max_len. The result is
/// prefix-free and its total measure is at most d([ ])/k.
pub fn martingale_to_cover(
    d: &dyn PermMartingale,
    k: &ExactRational,
    max_len: u32,
) -> Result<CoverSet> {
    if k < &ExactRational::one() {
        return Err(PermLabError::InvalidArgument(format!(
            "threshold k must be ≥ 1, got {k}"
        )));
    }
    let depth = block_end_exclusive(max_len as usize);
    let mut cover = Vec::new();
    let mut stack = vec![PrefixPartialPermutation::empty()];
    while let Some(g) = stack.pop() {
        if &d.value(&g)? >= k {
            cover.push(g);
            continue;
        }
        if g.len() >= depth {
            continue;
        }
        // Reverse keeps the pop order aligned with the standard
        // enumeration of extensions.
        for x in g.free_values().into_iter().rev() {
            stack.push(g.extend(&x)?);
        }
    }
    Ok(CoverSet::new(cover))
}

/// Σ_{g∈G} d_g: cylinder martingales summed with unit weights. The initial
/// capital is Σ μ(g) and the unitary success set contains ∪⟨g⟩.
pub fn cover_to_martingale(cover: &CoverSet) -> SharedMartingale {
    let parts: Vec<SharedMartingale> = cover
        .prefixes()
        .iter()
        .map(|g| super::strategies::cylinder_martingale(g.clone()))
        .collect();
    let weights = vec![ExactRational::one(); parts.len()];
    weighted_sum(parts, weights).expect("lengths match by construction")
}

/// Σ_{g∈W} μ(g)·d(g) for a prefix-free W. The caller asserts the Kraft
/// bound ≤ d([ ]).
pub fn verify_kraft(w: &CoverSet, d: &dyn PermMartingale) -> Result<ExactRational> {
    if !w.is_prefix_free() {
        return Err(PermLabError::NotPrefixFree(
            "Kraft mass is only meaningful for prefix-free families".into(),
        ));
    }
    let mut total = ExactRational::zero();
    for g in w.prefixes() {
        total += cylinder_measure(g) * d.value(g)?;
    }
    Ok(total)
}
