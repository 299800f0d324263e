//! Permutation martingales: capital functions on prefix partial
//! permutations whose value at g is the average of their values over all
//! one-step extensions.
//!
//! The trait is the abstraction; [`strategies`] holds every constructed
//! martingale, [`combinators`] the sums, covers, and the Kraft check.

pub mod combinators;
pub mod strategies;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{PermLabError, Result};
use crate::permspace::{FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::{domain_string_at, BinaryString};

pub use combinators::{
    cover_to_martingale, martingale_to_cover, verify_kraft, weighted_sum, CoverSet,
};
pub use strategies::{
    check_oracle_additivity, cycle_martingale, cylinder_martingale, figure1_martingale,
    likelihood_ratio_martingale, predictor_martingale, BetSchedule, ConstantMartingale,
    CycleMartingale, EventOracle, ForfeitedBet, HalfrangeEventOracle, ImagePredictor,
    PredictorMartingale, ShareState, TablePredictor,
};

/// A permutation martingale. Evaluators must be pure: the value depends
/// only on the prefix, never on evaluation order, so shared strategies are
/// safe across concurrent runners.
pub trait PermMartingale: Send + Sync {
    fn name(&self) -> String;

    /// d(g) ≥ 0 for every prefix partial permutation the strategy
    /// supports. Errors signal contract violations, never outcomes.
    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational>;

    /// d([ ]): the declared initial capital.
    fn initial_capital(&self) -> Result<ExactRational> {
        self.value(&PrefixPartialPermutation::empty())
    }
}

pub type SharedMartingale = Arc<dyn PermMartingale>;

/// True iff d(g)·|free(g)| = Σ_{x∈free(g)} d(g,x) exactly.
pub fn check_averaging(d: &dyn PermMartingale, g: &PrefixPartialPermutation) -> Result<bool> {
    let free = g.free_values();
    let mut total = ExactRational::zero();
    for x in &free {
        total += d.value(&g.extend(x)?)?;
    }
    let here = d.value(g)?;
    Ok(here * ExactRational::from_int(free.len() as i64) == total)
}

/// Visits every prefix partial permutation with betting length at most
/// `max_betting_length`, in depth-first standard order.
pub fn for_each_prefix(
    max_betting_length: usize,
    mut visit: impl FnMut(&PrefixPartialPermutation) -> Result<()>,
) -> Result<()> {
    fn walk(
        g: &PrefixPartialPermutation,
        max_bl: usize,
        visit: &mut impl FnMut(&PrefixPartialPermutation) -> Result<()>,
    ) -> Result<()> {
        visit(g)?;
        if g.betting_length() > max_bl {
            return Ok(());
        }
        for x in g.free_values() {
            let child = g.extend(&x)?;
            if child.betting_length() <= max_bl {
                walk(&child, max_bl, visit)?;
            } else {
                visit(&child)?;
            }
        }
        Ok(())
    }
    walk(
        &PrefixPartialPermutation::empty(),
        max_betting_length,
        &mut visit,
    )
}

/// First averaging violation of `d` over all prefixes with betting length
/// at most `max_betting_length`, or None if the audit passes.
pub fn averaging_violation(
    d: &dyn PermMartingale,
    max_betting_length: usize,
) -> Result<Option<PrefixPartialPermutation>> {
    let mut witness = None;
    for_each_prefix(max_betting_length, |g| {
        if witness.is_none() && !check_averaging(d, g)? {
            witness = Some(g.clone());
        }
        Ok(())
    })?;
    Ok(witness)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryStep {
    pub index: usize,
    pub domain: BinaryString,
    pub image: BinaryString,
    pub capital: ExactRational,
}

/// Ordered record of capitals after each bet: the finite evidence for
/// success-set membership.
#[derive(Clone, Debug, Serialize)]
pub struct CapitalTrajectory {
    pub strategy: String,
    pub initial_capital: ExactRational,
    pub steps: Vec<TrajectoryStep>,
    pub sup_capital: ExactRational,
    /// (k, first capital count reaching k) for the standard thresholds;
    /// count 0 means the initial capital already qualifies.
    pub thresholds: Vec<(ExactRational, Option<usize>)>,
}

pub const STANDARD_THRESHOLDS: [u64; 3] = [1, 2, 4];

impl CapitalTrajectory {
    pub fn new(strategy: String, initial_capital: ExactRational, steps: Vec<TrajectoryStep>) -> Self {
        let mut sup = initial_capital.clone();
        for s in &steps {
            if s.capital > sup {
                sup = s.capital.clone();
            }
        }
        let mut t = CapitalTrajectory {
            strategy,
            initial_capital,
            steps,
            sup_capital: sup,
            thresholds: Vec::new(),
        };
        t.thresholds = STANDARD_THRESHOLDS
            .iter()
            .map(|&k| {
                let k = ExactRational::from(k);
                let hit = t.first_reaching(&k);
                (k, hit)
            })
            .collect();
        t
    }

    /// Number of bets after which capital first reaches k; 0 if the
    /// initial capital already does.
    pub fn first_reaching(&self, k: &ExactRational) -> Option<usize> {
        if &self.initial_capital >= k {
            return Some(0);
        }
        self.steps
            .iter()
            .position(|s| &s.capital >= k)
            .map(|i| i + 1)
    }

    pub fn final_capital(&self) -> &ExactRational {
        self.steps
            .last()
            .map(|s| &s.capital)
            .unwrap_or(&self.initial_capital)
    }

    pub fn capitals(&self) -> Vec<ExactRational> {
        self.steps.iter().map(|s| s.capital.clone()).collect()
    }
}

/// Runs d along the value sequence of π, recording the capital after each
/// of the 2^{L+1}−1 bets.
pub fn run_martingale(
    d: &dyn PermMartingale,
    π: &FinitePermutation,
) -> Result<CapitalTrajectory> {
    let initial = d.initial_capital()?;
    let mut prefix = PrefixPartialPermutation::empty();
    let mut steps = Vec::with_capacity(π.domain_size());
    for i in 0..π.domain_size() {
        let x = domain_string_at(i);
        let y = π.image(&x)?.clone();
        prefix = prefix.extend(&y)?;
        let capital = d.value(&prefix)?;
        if capital.is_negative() {
            return Err(PermLabError::InvalidArgument(format!(
                "martingale {} evaluated negative at {prefix}",
                d.name()
            )));
        }
        steps.push(TrajectoryStep {
            index: i,
            domain: x,
            image: y,
            capital,
        });
    }
    Ok(CapitalTrajectory::new(d.name(), initial, steps))
}

/// An exactly computable approximation d̂(g, r) with
/// |d(g) − d̂(g, r)| ≤ 2^{−r}, deterministic for fixed (g, r).
pub trait ApproxPermMartingale: Send + Sync {
    fn name(&self) -> String;

    fn approx_value(&self, g: &PrefixPartialPermutation, precision_bits: u32)
        -> Result<ExactRational>;

    /// Exact initial capital of the wrapped strategy.
    fn declared_initial(&self) -> Result<ExactRational>;
}

pub type SharedApproxMartingale = Arc<dyn ApproxPermMartingale>;

/// Noise injected by [`approx_wrap`]. Exact reporting is always
/// admissible; hashed noise exercises the approximation contract while
/// staying strictly inside half the allowed budget.
#[derive(Clone, Copy, Debug)]
pub enum NoiseMode {
    Exact,
    Hashed { salt: u64 },
}

struct ApproxWrap {
    inner: SharedMartingale,
    mode: NoiseMode,
}

fn fnv64(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn prefix_bytes(g: &PrefixPartialPermutation) -> impl Iterator<Item = u8> + '_ {
    g.values().iter().flat_map(|v| {
        v.bits()
            .iter()
            .map(|&b| if b { b'1' } else { b'0' })
            .chain(std::iter::once(b','))
    })
}

impl ApproxPermMartingale for ApproxWrap {
    fn name(&self) -> String {
        match self.mode {
            NoiseMode::Exact => format!("approx({})", self.inner.name()),
            NoiseMode::Hashed { .. } => format!("approx-noisy({})", self.inner.name()),
        }
    }

    fn approx_value(
        &self,
        g: &PrefixPartialPermutation,
        precision_bits: u32,
    ) -> Result<ExactRational> {
        let exact = self.inner.value(g)?;
        let NoiseMode::Hashed { salt } = self.mode else {
            return Ok(exact);
        };
        // One hash per prefix; the magnitude then halves with each extra
        // bit of precision, so deviations are monotone in r.
        let h = fnv64(
            prefix_bytes(g)
                .chain(self.inner.name().bytes())
                .chain(salt.to_le_bytes()),
        );
        let frac = h & 0xFFFFF; // 20 bits
        let sign = (h >> 20) & 1 == 1;
        let mut noise = ExactRational::from(frac)
            * ExactRational::pow2(-(20 + precision_bits as i32 + 1));
        if sign {
            noise = -noise;
        }
        let reported = exact + noise;
        Ok(if reported.is_negative() {
            ExactRational::zero()
        } else {
            reported
        })
    }

    fn declared_initial(&self) -> Result<ExactRational> {
        self.inner.initial_capital()
    }
}

/// Wraps an exact martingale as an approximable one. `NoiseMode::Exact`
/// reports true values; `NoiseMode::Hashed` perturbs them by at most
/// 2^{−(r+1)} per probe.
pub fn approx_wrap(d: SharedMartingale, mode: NoiseMode) -> SharedApproxMartingale {
    Arc::new(ApproxWrap { inner: d, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::strategies::ConstantMartingale;

    fn p(values: &[&str]) -> PrefixPartialPermutation {
        PrefixPartialPermutation::from_values(
            values.iter().map(|v| v.parse().unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_martingale_passes_averaging_everywhere() {
        let d = ConstantMartingale::new(ExactRational::one());
        assert!(averaging_violation(&d, 2).unwrap().is_none());
    }

    #[test]
    fn constant_trajectory_is_flat() {
        let d = ConstantMartingale::new(ExactRational::ratio(3, 7));
        let t = run_martingale(&d, &FinitePermutation::identity(2)).unwrap();
        assert_eq!(t.steps.len(), 7);
        assert!(t.capitals().iter().all(|c| *c == ExactRational::ratio(3, 7)));
        assert_eq!(t.sup_capital, ExactRational::ratio(3, 7));
        assert_eq!(t.first_reaching(&ExactRational::one()), None);
    }

    #[test]
    fn approx_exact_mode_is_identity() {
        let d: SharedMartingale = Arc::new(ConstantMartingale::new(ExactRational::ratio(5, 9)));
        let a = approx_wrap(d.clone(), NoiseMode::Exact);
        for r in [0, 3, 10] {
            assert_eq!(
                a.approx_value(&p(&["λ", "0"]), r).unwrap(),
                ExactRational::ratio(5, 9)
            );
        }
    }

    #[test]
    fn approx_noise_respects_budget_and_monotonicity() {
        let d: SharedMartingale = Arc::new(ConstantMartingale::new(ExactRational::ratio(1, 3)));
        let a = approx_wrap(d, NoiseMode::Hashed { salt: 11 });
        let probes = [p(&[]), p(&["λ"]), p(&["λ", "1"]), p(&["λ", "0", "1", "10"])];
        for g in &probes {
            let mut last_dev: Option<ExactRational> = None;
            for r in 1..12 {
                let v = a.approx_value(g, r).unwrap();
                let dev = (v - ExactRational::ratio(1, 3)).abs();
                assert!(dev <= ExactRational::pow2(-(r as i32)), "budget at r={r}");
                if let Some(prev) = last_dev {
                    assert!(dev <= prev, "deviation must not grow with precision");
                }
                last_dev = Some(dev);
            }
        }
    }

    #[test]
    fn approx_is_deterministic() {
        let d: SharedMartingale = Arc::new(ConstantMartingale::new(ExactRational::one()));
        let a = approx_wrap(d, NoiseMode::Hashed { salt: 3 });
        let g = p(&["λ", "0", "1"]);
        assert_eq!(a.approx_value(&g, 6).unwrap(), a.approx_value(&g, 6).unwrap());
    }
}
