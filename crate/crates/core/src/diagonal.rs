//! Constructing permutations that defeat a given strategy: answer every
//! bet with a capital-minimizing free image, so the capital can never
//! climb beyond the initial value plus the approximation slack.

use serde::Serialize;

use crate::betting::{BettingGame, OrderedBetState};
use crate::error::{PermLabError, Result};
use crate::martingale::ApproxPermMartingale;
use crate::permspace::{FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::{all_strings_of_length, block_end_exclusive, domain_string_at, BinaryString};

/// Outcome of a diagonalization run. The slack ledger tracks, per length,
/// how much the capital actually rose across bets of that length; with
/// evaluations at 2n bits the rise per bet is at most 2^{−2n}, so the
/// supremum stays within the initial capital plus Σ_n 2^{−n}.
#[derive(Clone, Debug, Serialize)]
pub struct DefeatReport {
    pub strategy: String,
    pub initial_capital: ExactRational,
    pub sup_capital: ExactRational,
    /// (length, total capital increase incurred across that block's bets).
    pub slack_by_length: Vec<(usize, ExactRational)>,
    #[serde(skip)]
    pub permutation: FinitePermutation,
}

impl DefeatReport {
    /// Σ_n 2^{−n} over the covered lengths 1..=max_length.
    pub fn slack_budget(max_length: u32) -> ExactRational {
        (1..=max_length as i32).map(|n| ExactRational::pow2(-n)).sum()
    }

    /// sup_capital ≤ initial + Σ_n 2^{−n}, the report invariant.
    pub fn within_bound(&self) -> bool {
        let budget = Self::slack_budget(self.permutation.max_length());
        self.sup_capital <= &self.initial_capital + &budget
    }

    pub fn total_slack(&self) -> ExactRational {
        self.slack_by_length.iter().map(|(_, s)| s.clone()).sum()
    }
}

/// Precision used when evaluating a strategy at betting length n: 2n bits,
/// mirroring the 2^{−2n} additive error of the construction.
fn precision_for_length(n: usize) -> u32 {
    (2 * n.max(1)) as u32
}

/// Builds a table on which `d` never gains. For each string in standard
/// order the image is a free value minimizing d's capital evaluated at 2n
/// bits, ties broken by the lexicographically smallest value.
pub fn defeat_martingale(
    d: &dyn ApproxPermMartingale,
    max_length: u32,
) -> Result<DefeatReport> {
    let initial = d.declared_initial()?;
    let mut prefix = PrefixPartialPermutation::empty();
    let mut sup = initial.clone();
    let mut slack: Vec<(usize, ExactRational)> = (0..=max_length as usize)
        .map(|n| (n, ExactRational::zero()))
        .collect();
    let mut previous = d.approx_value(&prefix, precision_for_length(0))?;
    while prefix.len() < block_end_exclusive(max_length as usize) {
        let n = prefix.betting_length();
        let bits = precision_for_length(n);
        let mut best: Option<(ExactRational, BinaryString)> = None;
        for x in prefix.free_values() {
            let v = d.approx_value(&prefix.extend(&x)?, bits)?;
            // Free values arrive in lexicographic order, so strict
            // improvement implements the smallest-value tie-break.
            if best.as_ref().is_none_or(|(b, _)| &v < b) {
                best = Some((v, x));
            }
        }
        let (value, choice) = best.expect("free set is never empty");
        prefix = prefix.extend(&choice)?;
        if value > previous {
            slack[n].1 += &value - &previous;
        }
        if value > sup {
            sup = value.clone();
        }
        previous = value;
    }
    let permutation = FinitePermutation::from_images(max_length, prefix.values().to_vec())?;
    Ok(DefeatReport {
        strategy: d.name(),
        initial_capital: initial,
        sup_capital: sup,
        slack_by_length: slack,
        permutation,
    })
}

/// Replays a betting game, answering each bet-carrying query with an
/// exactly capital-minimizing free image (lexicographic tie-break).
/// Queries longer than the honesty bound at the current stage must carry
/// no bet; they are answered with the first free image, and a stake on one
/// aborts the construction as dishonest. Positions the game never queried
/// are filled with the first free image afterwards.
pub fn defeat_betting_game(
    game: &dyn BettingGame,
    honesty: &dyn Fn(usize) -> usize,
    max_length: u32,
) -> Result<DefeatReport> {
    let initial = game.initial_capital()?;
    let coverage = block_end_exclusive(max_length as usize);
    let mut state = OrderedBetState::empty();
    let mut sup = initial.clone();
    let mut slack: Vec<(usize, ExactRational)> = (0..=max_length as usize)
        .map(|n| (n, ExactRational::zero()))
        .collect();
    let mut previous = game.value(&state)?;
    for step in 1..=coverage {
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
        if query.len() > max_length as usize {
            return Err(PermLabError::IllegalMove {
                step,
                reason: format!("query {query} exceeds the construction bound {max_length}"),
            });
        }
        let free = state.free(query.len());
        let stage = stage_of_state(&state);
        if query.len() > honesty(stage) {
            // Over-long query: allowed only with a uniform (zero) stake.
            let here = game.value(&state)?;
            for b in &free {
                if game.value(&state.extended(&query, b)?)? != here {
                    return Err(PermLabError::DishonestBet {
                        step,
                        reason: format!(
                            "non-zero bet on {query} (length {}) at stage {stage} with bound {}",
                            query.len(),
                            honesty(stage)
                        ),
                    });
                }
            }
            state = state.extended(&query, &free[0])?;
            continue;
        }
        let mut best: Option<(ExactRational, BinaryString)> = None;
        for b in &free {
            let v = game.value(&state.extended(&query, b)?)?;
            if v.is_negative() {
                return Err(PermLabError::IllegalMove {
                    step,
                    reason: format!("negative value {v} at ({query}, {b})"),
                });
            }
            if best.as_ref().is_none_or(|(w, _)| &v < w) {
                best = Some((v, b.clone()));
            }
        }
        let (value, choice) = best.expect("free set is never empty");
        state = state.extended(&query, &choice)?;
        if value > previous {
            slack[query.len()].1 += &value - &previous;
        }
        if value > sup {
            sup = value.clone();
        }
        previous = value;
    }
    // Fill unqueried positions with the first free image; the game placed
    // no bets there, so the capital is unaffected.
    let mut images = Vec::with_capacity(coverage);
    let mut fill = state.clone();
    for i in 0..coverage {
        let x = domain_string_at(i);
        let y = match fill.image_of(&x) {
            Some(y) => y.clone(),
            None => {
                let y = first_free_of_length(&fill, x.len());
                fill = fill.extended(&x, &y)?;
                y
            }
        };
        images.push(y);
    }
    let permutation = FinitePermutation::from_images(max_length, images)?;
    Ok(DefeatReport {
        strategy: game.name(),
        initial_capital: initial,
        sup_capital: sup,
        slack_by_length: slack,
        permutation,
    })
}

fn stage_of_state(state: &OrderedBetState) -> usize {
    let mut n = 0usize;
    loop {
        if all_strings_of_length(n).iter().any(|x| !state.queried(x)) {
            return n;
        }
        n += 1;
    }
}

fn first_free_of_length(state: &OrderedBetState, n: usize) -> BinaryString {
    state.free(n).into_iter().next().expect("block not exhausted")
}
