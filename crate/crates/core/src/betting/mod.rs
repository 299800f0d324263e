//! Adaptive-order betting games.
//!
//! A betting game chooses which string to query next — never repeating a
//! query — and distributes stakes over the free images at that string's
//! length. The value function on ordered states must satisfy the same
//! averaging condition martingales do, taken over free(w, n) for the
//! chosen query length n.

pub mod subgames;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{PermLabError, Result};
use crate::martingale::{CapitalTrajectory, SharedMartingale, TrajectoryStep};
use crate::permspace::{FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::{all_strings_of_length, block_end_exclusive, domain_string_at, BinaryString};

pub use subgames::{halfrange_event_subgame, witness_bettor, HalfrangeSubgame, WitnessBettor};

/// List of (query, image) pairs in the order the game made them. Queries
/// are pairwise distinct and images pairwise distinct within each length.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrderedBetState {
    pairs: Vec<(BinaryString, BinaryString)>,
}

impl OrderedBetState {
    pub fn empty() -> Self {
        OrderedBetState { pairs: Vec::new() }
    }

    pub fn from_pairs(pairs: Vec<(BinaryString, BinaryString)>) -> Result<Self> {
        let mut state = OrderedBetState::empty();
        for (q, y) in pairs {
            state = state.extended(&q, &y)?;
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(BinaryString, BinaryString)] {
        &self.pairs
    }

    pub fn queried(&self, q: &BinaryString) -> bool {
        self.pairs.iter().any(|(a, _)| a == q)
    }

    pub fn image_of(&self, q: &BinaryString) -> Option<&BinaryString> {
        self.pairs.iter().find(|(a, _)| a == q).map(|(_, b)| b)
    }

    /// free(w, n): length-n strings not yet the image of any queried
    /// string, in lexicographic order.
    pub fn free(&self, n: usize) -> Vec<BinaryString> {
        all_strings_of_length(n)
            .into_iter()
            .filter(|x| !self.pairs.iter().any(|(_, b)| b == x))
            .collect()
    }

    /// w[a, b]: the state extended with the pair (a, b).
    pub fn extended(&self, query: &BinaryString, image: &BinaryString) -> Result<Self> {
        if query.len() != image.len() {
            return Err(PermLabError::InvalidExtension(format!(
                "pair ({query}, {image}) is not length-preserving"
            )));
        }
        if self.queried(query) {
            return Err(PermLabError::InvalidExtension(format!(
                "{query} was already queried"
            )));
        }
        if self.pairs.iter().any(|(_, b)| b == image) {
            return Err(PermLabError::InvalidExtension(format!(
                "image {image} already used"
            )));
        }
        let mut pairs = self.pairs.clone();
        pairs.push((query.clone(), image.clone()));
        Ok(OrderedBetState { pairs })
    }

    /// The prefix partial permutation this state encodes, when the queries
    /// are exactly s_0, s_1, … in standard order.
    pub fn as_standard_prefix(&self) -> Result<PrefixPartialPermutation> {
        let mut values = Vec::with_capacity(self.pairs.len());
        for (i, (q, y)) in self.pairs.iter().enumerate() {
            if q != &domain_string_at(i) {
                return Err(PermLabError::Unsupported(format!(
                    "state queries {q} at position {i}, not the standard order"
                )));
            }
            values.push(y.clone());
        }
        PrefixPartialPermutation::from_values(values)
    }
}

/// An adaptive betting strategy: a query selector plus a value function on
/// ordered states. The stake distribution at a query is implied by the
/// values of the one-pair extensions.
pub trait BettingGame: Send + Sync {
    fn name(&self) -> String;

    /// The next string to query, or None when the game is done. Must never
    /// repeat a query already in the state.
    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>>;

    /// Capital after the bets recorded in `state`.
    fn value(&self, state: &OrderedBetState) -> Result<ExactRational>;

    fn initial_capital(&self) -> Result<ExactRational> {
        self.value(&OrderedBetState::empty())
    }
}

pub type SharedGame = Arc<dyn BettingGame>;

/// True iff the stake distribution at the game's chosen query averages
/// exactly to the current value.
pub fn check_bg_averaging(game: &dyn BettingGame, state: &OrderedBetState) -> Result<bool> {
    let Some(query) = game.next_query(state)? else {
        return Err(PermLabError::InvalidArgument(
            "game has no next move at this state".into(),
        ));
    };
    let free = state.free(query.len());
    let mut total = ExactRational::zero();
    for b in &free {
        total += game.value(&state.extended(&query, b)?)?;
    }
    Ok(game.value(state)? * ExactRational::from_int(free.len() as i64) == total)
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryRecord {
    pub step: usize,
    pub query: BinaryString,
    pub image: BinaryString,
    /// Amount at risk: current value minus the worst-case post-bet value.
    /// Zero iff the stake distribution is uniform.
    pub stake: ExactRational,
    pub capital: ExactRational,
}

/// Ordered queries with step counts and bet sizes; the honesty audits run
/// over this record.
#[derive(Clone, Debug, Default, Serialize)]
pub struct QueryLog {
    pub records: Vec<QueryRecord>,
}

impl QueryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct queries — every log produced by the runner satisfies this.
    pub fn queries_distinct(&self) -> bool {
        for (i, a) in self.records.iter().enumerate() {
            for b in &self.records[..i] {
                if a.query == b.query {
                    return false;
                }
            }
        }
        true
    }
}

/// The stage of a step: the smallest length whose block is not yet fully
/// queried before the step runs. Time bounds t(2^n) are modeled as
/// query-count budgets per length block, so a game working through block n
/// is at stage n no matter how many longer strings it has probed.
fn stage_of(queried_before: &[&BinaryString]) -> usize {
    let mut n = 0usize;
    loop {
        let block = all_strings_of_length(n);
        if !block.iter().all(|x| queried_before.contains(&x)) {
            return n;
        }
        n += 1;
    }
}

/// True iff every non-zero bet concerns a string of length at most
/// h(stage) where the stage is the first incompletely-queried block at the
/// time of the bet.
pub fn check_honesty(log: &QueryLog, bound: &dyn Fn(usize) -> usize) -> bool {
    first_dishonest_step(log, bound).is_none()
}

/// Step number of the first honesty violation, if any.
pub fn first_dishonest_step(log: &QueryLog, bound: &dyn Fn(usize) -> usize) -> Option<usize> {
    let mut seen: Vec<&BinaryString> = Vec::new();
    for record in &log.records {
        if !record.stake.is_zero() {
            let stage = stage_of(&seen);
            if record.query.len() > bound(stage) {
                return Some(record.step);
            }
        }
        seen.push(&record.query);
    }
    None
}

/// Plays the game against a table until the budget runs out, the game
/// stops, or every string of length ≤ max_length has been queried. Records
/// the capital after each bet and the full query order. Illegal moves
/// (repeat queries, out-of-range queries, malformed stakes) abort the run
/// with a diagnostic.
pub fn run_betting_game(
    game: &dyn BettingGame,
    π: &FinitePermutation,
    budget: usize,
) -> Result<(CapitalTrajectory, QueryLog)> {
    let initial = game.initial_capital()?;
    let coverage = block_end_exclusive(π.max_length() as usize);
    let mut state = OrderedBetState::empty();
    let mut steps = Vec::new();
    let mut records = Vec::new();
    for step in 1..=budget {
        if state.len() == coverage {
            break;
        }
        let Some(query) = game.next_query(&state)? else {
            break;
        };
        if state.queried(&query) {
            return Err(PermLabError::IllegalMove {
                step,
                reason: format!("repeated query {query}"),
            });
        }
        if query.len() > π.max_length() as usize {
            return Err(PermLabError::IllegalMove {
                step,
                reason: format!(
                    "query {query} exceeds the table max_length {}",
                    π.max_length()
                ),
            });
        }
        let here = game.value(&state)?;
        let free = state.free(query.len());
        let mut worst: Option<ExactRational> = None;
        let mut total = ExactRational::zero();
        for b in &free {
            let v = game.value(&state.extended(&query, b)?)?;
            if v.is_negative() {
                return Err(PermLabError::IllegalMove {
                    step,
                    reason: format!("negative value {v} staked at ({query}, {b})"),
                });
            }
            worst = Some(match worst {
                Some(w) => w.min(v.clone()),
                None => v.clone(),
            });
            total += v;
        }
        if &here * &ExactRational::from_int(free.len() as i64) != total {
            return Err(PermLabError::IllegalMove {
                step,
                reason: format!("stakes at {query} violate the averaging condition"),
            });
        }
        let image = π.image(&query)?.clone();
        state = state.extended(&query, &image)?;
        let capital = game.value(&state)?;
        let stake = &here - &worst.unwrap_or_else(|| here.clone());
        records.push(QueryRecord {
            step,
            query: query.clone(),
            image: image.clone(),
            stake,
            capital: capital.clone(),
        });
        steps.push(TrajectoryStep {
            index: step - 1,
            domain: query,
            image,
            capital,
        });
    }
    Ok((
        CapitalTrajectory::new(game.name(), initial, steps),
        QueryLog { records },
    ))
}

/// A martingale is the betting game that queries s_0, s_1, … in standard
/// order with the same stakes.
pub struct MartingaleGame {
    inner: SharedMartingale,
}

impl BettingGame for MartingaleGame {
    fn name(&self) -> String {
        format!("game({})", self.inner.name())
    }

    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>> {
        state.as_standard_prefix()?;
        Ok(Some(domain_string_at(state.len())))
    }

    fn value(&self, state: &OrderedBetState) -> Result<ExactRational> {
        self.inner.value(&state.as_standard_prefix()?)
    }
}

pub fn from_martingale(d: SharedMartingale) -> SharedGame {
    Arc::new(MartingaleGame { inner: d })
}

/// A game whose value function ignores the state: flat trajectories, no
/// bets anywhere.
pub struct FlatGame {
    pub capital: ExactRational,
}

impl BettingGame for FlatGame {
    fn name(&self) -> String {
        format!("flat({})", self.capital)
    }

    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>> {
        Ok(Some(domain_string_at(state.len())))
    }

    fn value(&self, _state: &OrderedBetState) -> Result<ExactRational> {
        Ok(self.capital.clone())
    }
}
