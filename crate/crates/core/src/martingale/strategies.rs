//! Every martingale the library constructs: cylinder bets, the worked
//! length-2 example fixture, the cycle bettor, predictor-driven betting,
//! and likelihood-ratio betting on an exact event oracle.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{PermLabError, Result};
use crate::permspace::{
    cylinder_measure, is_single_cycle, FinitePermutation, PrefixPartialPermutation,
};
use crate::rational::ExactRational;
use crate::strings::{index_of, BinaryString};
use crate::testlang::{halfrange_event_probability, BlockStatus};

use super::{PermMartingale, SharedMartingale};

/// d ≡ c. The simplest martingale; useful as a flat baseline.
pub struct ConstantMartingale {
    value: ExactRational,
}

impl ConstantMartingale {
    pub fn new(value: ExactRational) -> Self {
        assert!(!value.is_negative(), "martingales are nonnegative");
        ConstantMartingale { value }
    }
}

impl PermMartingale for ConstantMartingale {
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }

    fn value(&self, _g: &PrefixPartialPermutation) -> Result<ExactRational> {
        Ok(self.value.clone())
    }
}

struct CylinderMartingale {
    target: PrefixPartialPermutation,
    target_measure: ExactRational,
}

impl PermMartingale for CylinderMartingale {
    fn name(&self) -> String {
        format!("cylinder({})", self.target)
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        if self.target.is_prefix_of(g) {
            Ok(ExactRational::one())
        } else if g.is_prefix_of(&self.target) {
            Ok(&self.target_measure / &cylinder_measure(g))
        } else {
            Ok(ExactRational::zero())
        }
    }
}

/// d_g(x) = Pr(g | x ⊑ h) over length-|g| prefixes h chosen uniformly:
/// μ(g)/μ(x) while x is still compatible with g, 1 once g is confirmed,
/// 0 once it is refuted. Initial capital μ(g); the unitary success set is
/// exactly ⟨g⟩.
pub fn cylinder_martingale(target: PrefixPartialPermutation) -> SharedMartingale {
    let target_measure = cylinder_measure(&target);
    Arc::new(CylinderMartingale {
        target,
        target_measure,
    })
}

struct Figure1Martingale {
    nodes: HashMap<String, ExactRational>,
}

const FIGURE1_JSON: &str = include_str!("../../data/figure1.json");

fn figure1_key(g: &PrefixPartialPermutation) -> String {
    let block: Vec<String> = g.block_assignments(2).iter().map(|v| v.to_string()).collect();
    block.join(",")
}

impl PermMartingale for Figure1Martingale {
    fn name(&self) -> String {
        "figure1".to_string()
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        // The fixture is a fragment on the length-2 block; outside it the
        // martingale is constant, so the value depends only on the block-2
        // images seen so far.
        self.nodes
            .get(&figure1_key(g))
            .cloned()
            .ok_or_else(|| PermLabError::InvalidPrefix(format!("no fixture node for {g}")))
    }
}

#[derive(serde::Deserialize)]
struct Figure1Doc {
    nodes: BTreeMap<String, String>,
}

/// The worked example martingale on the length-2 block, loaded from the
/// shipped fixture. Root value 13/24.
pub fn figure1_martingale() -> SharedMartingale {
    let doc: Figure1Doc = serde_json::from_str(FIGURE1_JSON).expect("fixture parses");
    let nodes = doc
        .nodes
        .into_iter()
        .map(|(k, v)| (k, v.parse().expect("fixture rationals parse")))
        .collect();
    Arc::new(Figure1Martingale { nodes })
}

/// Betting shares of the cycle bettor: a_i = 1/i².
fn cycle_share(i: u64) -> ExactRational {
    ExactRational::ratio(1, (i * i) as i64)
}

/// Bets that the permutation is a single cycle at every length. The
/// initial capital is split into shares a_i = 1/i² (truncated at
/// `max_share`); share i goes all-in at every length n ≥ i on the image of
/// 1^{n−1}0 that completes a single 2^n-cycle, the one bet with exactly
/// two live choices. Winning doubles the share, losing zeroes it. When
/// neither completion closes a cycle the shares stake uniformly and keep
/// their value, but the cycle event at that length has already failed;
/// both accountings are visible through [`CycleMartingale::share_states`].
pub struct CycleMartingale {
    max_share: u64,
}

/// Per-share replay outcome; `value` is the capital the share carries and
/// `first_cycle_failure` the first length where no completion was a cycle
/// (a survival that strict accounting treats as dead).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareState {
    pub index: u64,
    pub value: ExactRational,
    pub first_cycle_failure: Option<usize>,
}

impl CycleMartingale {
    pub fn new(max_share: u64) -> Self {
        assert!(max_share >= 1);
        CycleMartingale { max_share }
    }

    /// Index of the bet on the image of 1^{n−1}0: the next-to-last
    /// position of the length-n block, where exactly two images remain.
    fn critical_index(n: usize) -> usize {
        (1usize << (n + 1)) - 3
    }

    /// The image of 1^{n−1}0 whose completion makes the length-n block a
    /// single cycle, if any. `before` is the prefix truncated to the
    /// critical bet.
    fn cycle_image(before: &PrefixPartialPermutation, n: usize) -> Option<BinaryString> {
        let free = before.free_values();
        debug_assert_eq!(free.len(), 2);
        let assigned = before.block_assignments(n);
        let mut winners = free.iter().filter(|&choice| {
            let other = free.iter().find(|o| *o != choice).unwrap();
            let mut block = assigned.to_vec();
            block.push(choice.clone());
            block.push(other.clone());
            is_single_cycle(&block)
        });
        let winner = winners.next().cloned();
        // Parity: the two completions differ by a transposition, so at
        // most one closes a full cycle.
        debug_assert!(winners.next().is_none());
        winner
    }

    /// Replays g and reports each share's capital and cycle-failure flag.
    pub fn share_states(&self, g: &PrefixPartialPermutation) -> Vec<ShareState> {
        let mut shares: Vec<ShareState> = (1..=self.max_share)
            .map(|i| ShareState {
                index: i,
                value: cycle_share(i),
                first_cycle_failure: None,
            })
            .collect();
        let mut n = 1usize;
        loop {
            let idx = Self::critical_index(n);
            if g.len() <= idx {
                break;
            }
            let before = g.truncated(idx);
            let chosen = g.value_at(idx);
            match Self::cycle_image(&before, n) {
                Some(winner) => {
                    let won = chosen == &winner;
                    for s in shares.iter_mut() {
                        if (s.index as usize) <= n {
                            s.value = if won {
                                &s.value * &ExactRational::from_int(2)
                            } else {
                                ExactRational::zero()
                            };
                        }
                    }
                }
                None => {
                    // Uniform stake: capital unchanged, event failed.
                    for s in shares.iter_mut() {
                        if (s.index as usize) <= n && s.first_cycle_failure.is_none() {
                            s.first_cycle_failure = Some(n);
                        }
                    }
                }
            }
            n += 1;
        }
        shares
    }
}

impl PermMartingale for CycleMartingale {
    fn name(&self) -> String {
        format!("cycle(shares≤{})", self.max_share)
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        Ok(self.share_states(g).into_iter().map(|s| s.value).sum())
    }
}

/// a_1 + … + a_L with L = max_share shares of 1/i².
pub fn cycle_martingale(max_share: u64) -> SharedMartingale {
    Arc::new(CycleMartingale::new(max_share))
}

/// Predicts the image of a domain string given the prefix seen so far.
pub trait ImagePredictor: Send + Sync {
    fn name(&self) -> String;
    fn predict(&self, prefix: &PrefixPartialPermutation, target: &BinaryString) -> BinaryString;
}

/// The strongest predictor: reads the true table.
pub struct TablePredictor {
    table: FinitePermutation,
}

impl TablePredictor {
    pub fn new(table: FinitePermutation) -> Self {
        TablePredictor { table }
    }
}

impl ImagePredictor for TablePredictor {
    fn name(&self) -> String {
        "true-table".to_string()
    }

    fn predict(&self, _prefix: &PrefixPartialPermutation, target: &BinaryString) -> BinaryString {
        self.table
            .image(target)
            .cloned()
            .unwrap_or_else(|_| BinaryString::zeros(target.len()))
    }
}

/// Nonnegative share staked per scheduled domain string.
pub type BetSchedule = BTreeMap<BinaryString, ExactRational>;

/// Stakes each scheduled share entirely on the predictor's image for that
/// string: a correct prediction multiplies the share by |free| at bet
/// time, an incorrect one loses it. Shares must sum to at most the
/// declared initial capital; the remainder rides along unchanged.
///
/// A predictor emitting an image that is not free at bet time forfeits
/// that share (recorded through [`PredictorMartingale::forfeits`], not
/// fatal); averaging audits will flag such nodes, since a forfeited stake
/// is a strict loss on every outcome.
pub struct PredictorMartingale {
    predictor: Arc<dyn ImagePredictor>,
    schedule: BetSchedule,
    initial: ExactRational,
}

/// A bet whose predicted image was not available at bet time; the share is
/// forfeited rather than aborting the run.
#[derive(Clone, Debug)]
pub struct ForfeitedBet {
    pub domain: BinaryString,
    pub predicted: BinaryString,
}

impl PredictorMartingale {
    pub fn new(
        predictor: Arc<dyn ImagePredictor>,
        schedule: BetSchedule,
        initial: ExactRational,
    ) -> Result<Self> {
        let staked: ExactRational = schedule.values().cloned().sum();
        if schedule.values().any(|s| s.is_negative()) {
            return Err(PermLabError::InvalidArgument(
                "bet shares must be nonnegative".into(),
            ));
        }
        if staked > initial {
            return Err(PermLabError::InvalidArgument(format!(
                "scheduled shares {staked} exceed initial capital {initial}"
            )));
        }
        Ok(PredictorMartingale {
            predictor,
            schedule,
            initial,
        })
    }

    /// Walks the scheduled bets resolved inside g. Returns the capital and
    /// the forfeited bets along the way.
    fn replay(&self, g: &PrefixPartialPermutation) -> (ExactRational, Vec<ForfeitedBet>) {
        let mut capital = self.initial.clone();
        let mut forfeits = Vec::new();
        for (domain, share) in &self.schedule {
            let idx = index_of(domain);
            if idx >= g.len() || share.is_zero() {
                continue;
            }
            let before = g.truncated(idx);
            let predicted = self.predictor.predict(&before, domain);
            let free = before.free_values();
            if !free.contains(&predicted) {
                // Illegal prediction: the share is lost on every outcome.
                capital -= share.clone();
                forfeits.push(ForfeitedBet {
                    domain: domain.clone(),
                    predicted,
                });
                continue;
            }
            if g.value_at(idx) == &predicted {
                // All-in payout: the share multiplies by |free|.
                capital += share * &ExactRational::from_int(free.len() as i64 - 1);
            } else {
                capital -= share.clone();
            }
        }
        (capital, forfeits)
    }

    pub fn forfeits(&self, g: &PrefixPartialPermutation) -> Vec<ForfeitedBet> {
        self.replay(g).1
    }
}

impl PermMartingale for PredictorMartingale {
    fn name(&self) -> String {
        format!("predictor({})", self.predictor.name())
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        Ok(self.replay(g).0)
    }
}

/// [`PredictorMartingale`] behind the shared trait object.
pub fn predictor_martingale(
    predictor: Arc<dyn ImagePredictor>,
    schedule: BetSchedule,
    initial: ExactRational,
) -> Result<SharedMartingale> {
    Ok(Arc::new(PredictorMartingale::new(
        predictor, schedule, initial,
    )?))
}

/// Exact conditional probability of a fixed measurable event given a
/// cylinder.
pub trait EventOracle: Send + Sync {
    fn name(&self) -> String;

    /// Pr(E | ⟨g⟩), exactly. Must form a premeasure ratio: averaging the
    /// result over all one-step extensions returns the value at g.
    fn probability(&self, g: &PrefixPartialPermutation) -> Result<ExactRational>;
}

/// The event 𝒜_n: the preimage of 0^{(k+3)n} begins with 1, conditioned
/// on whatever part of that block the prefix has fixed.
pub struct HalfrangeEventOracle {
    pub n: usize,
    pub k: usize,
}

impl EventOracle for HalfrangeEventOracle {
    fn name(&self) -> String {
        format!("halfrange-event(n={},k={})", self.n, self.k)
    }

    fn probability(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        let status = BlockStatus::from_prefix(g, (self.k + 3) * self.n);
        halfrange_event_probability(&status, self.n, self.k)
    }
}

struct LikelihoodRatioMartingale {
    event: Arc<dyn EventOracle>,
    start_probability: ExactRational,
}

impl PermMartingale for LikelihoodRatioMartingale {
    fn name(&self) -> String {
        format!("likelihood-ratio({})", self.event.name())
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        let p = self.event.probability(g)?;
        if p.is_negative() || p > ExactRational::one() {
            return Err(PermLabError::InvalidOracle(format!(
                "probability {p} outside [0,1] at {g}"
            )));
        }
        Ok(&p / &self.start_probability)
    }
}

/// d(g) = Pr(E|g)/Pr(E|start): capital 1 at the start prefix, exactly
/// 1/Pr(E|start) once the event is confirmed, 0 once refuted. Averaging
/// holds because conditional probabilities are a premeasure ratio.
pub fn likelihood_ratio_martingale(
    event: Arc<dyn EventOracle>,
    start: PrefixPartialPermutation,
) -> Result<SharedMartingale> {
    let start_probability = event.probability(&start)?;
    if start_probability.is_negative() || start_probability > ExactRational::one() {
        return Err(PermLabError::InvalidOracle(format!(
            "start probability {start_probability} outside [0,1]"
        )));
    }
    if start_probability.is_zero() {
        return Err(PermLabError::InvalidOracle(
            "event has probability 0 at the start prefix".into(),
        ));
    }
    Ok(Arc::new(LikelihoodRatioMartingale {
        event,
        start_probability,
    }))
}

/// Audits the oracle's premeasure property at g: the average of the
/// probabilities over all one-step extensions must equal the probability
/// at g exactly.
pub fn check_oracle_additivity(
    event: &dyn EventOracle,
    g: &PrefixPartialPermutation,
) -> Result<bool> {
    let here = event.probability(g)?;
    let free = g.free_values();
    let mut total = ExactRational::zero();
    for x in &free {
        total += event.probability(&g.extend(x)?)?;
    }
    Ok(here * ExactRational::from_int(free.len() as i64) == total)
}
