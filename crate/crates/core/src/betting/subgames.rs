//! The subgames behind the main half-range betting game: an exact
//! conditional-probability bettor on the event 𝒜_n and a witness bettor
//! that splits a share over candidate (string, witness) pairs.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{PermLabError, Result};
use crate::rational::ExactRational;
use crate::strings::{all_strings_of_length, BinaryString};
use crate::testlang::{halfrange_event_probability, BlockStatus};

use super::{BettingGame, OrderedBetState, SharedGame};

fn status_at_length(state: &OrderedBetState, block_len: usize) -> Result<BlockStatus> {
    let mut status = BlockStatus::new(block_len);
    for (q, y) in state.pairs() {
        if q.len() == block_len {
            status.assign(q.clone(), y.clone())?;
        }
    }
    Ok(status)
}

/// Bets a share on 𝒜_n = "the preimage of 0^{(k+3)n} begins with 1".
/// The value at status ω is 2·share·Pr(𝒜_n | ω): exactly 2·share once the
/// event is confirmed, 0 once refuted, share at the empty status (the
/// prior is 1/2). Queries walk the length-(k+3)n block in lexicographic
/// order; all other block lengths are ignored.
pub struct HalfrangeSubgame {
    n: usize,
    k: usize,
    share: ExactRational,
}

impl HalfrangeSubgame {
    pub fn new(n: usize, k: usize, share: ExactRational) -> Result<Self> {
        if n < 1 {
            return Err(PermLabError::InvalidArgument("n must be ≥ 1".into()));
        }
        if share.is_negative() {
            return Err(PermLabError::InvalidArgument(
                "share must be nonnegative".into(),
            ));
        }
        Ok(HalfrangeSubgame { n, k, share })
    }

    pub fn block_length(&self) -> usize {
        (self.k + 3) * self.n
    }

    /// 2·share·Pr(𝒜_n | ω) for an explicit status — the exhaustive audits
    /// evaluate this directly on synthetic statuses.
    pub fn value_at_status(&self, ω: &BlockStatus) -> Result<ExactRational> {
        let p = halfrange_event_probability(ω, self.n, self.k)?;
        Ok(ExactRational::from_int(2) * &self.share * p)
    }
}

impl BettingGame for HalfrangeSubgame {
    fn name(&self) -> String {
        format!("halfrange-subgame(n={},k={})", self.n, self.k)
    }

    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>> {
        Ok(all_strings_of_length(self.block_length())
            .into_iter()
            .find(|q| !state.queried(q)))
    }

    fn value(&self, state: &OrderedBetState) -> Result<ExactRational> {
        self.value_at_status(&status_at_length(state, self.block_length())?)
    }
}

pub fn halfrange_event_subgame(n: usize, k: usize, share: ExactRational) -> Result<SharedGame> {
    Ok(Arc::new(HalfrangeSubgame::new(n, k, share)?))
}

/// Splits a share evenly over candidate (x, y) pairs with |x| = n and
/// |y| = (k+3)n − 1. When 0y is queried the slice rides entirely on the
/// image x^{k+3}: a hit multiplies it by the number of free images at bet
/// time, a miss zeroes it. A slice whose target image was already consumed
/// has had its event refuted before the bet; it stakes uniformly and keeps
/// its value.
pub struct WitnessBettor {
    n: usize,
    k: usize,
    share: ExactRational,
    /// Sorted by witness then string; queries deduplicate by witness.
    candidates: Vec<(BinaryString, BinaryString)>,
}

impl WitnessBettor {
    pub fn new(
        n: usize,
        k: usize,
        share: ExactRational,
        candidates: BTreeSet<(BinaryString, BinaryString)>,
    ) -> Result<Self> {
        // BTreeSet input makes duplicates unrepresentable; validate shapes.
        for (x, y) in &candidates {
            if x.len() != n {
                return Err(PermLabError::InvalidArgument(format!(
                    "candidate string {x} must have length {n}"
                )));
            }
            if y.len() != (k + 3) * n - 1 {
                return Err(PermLabError::InvalidArgument(format!(
                    "candidate witness {y} must have length {}",
                    (k + 3) * n - 1
                )));
            }
        }
        let mut candidates: Vec<_> = candidates.into_iter().collect();
        candidates.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(WitnessBettor {
            n,
            k,
            share,
            candidates,
        })
    }

    fn query_for(&self, y: &BinaryString) -> BinaryString {
        BinaryString::zeros(1).concat(y)
    }

    fn slice(&self) -> ExactRational {
        &self.share / &ExactRational::from_int(self.candidates.len() as i64)
    }
}

impl BettingGame for WitnessBettor {
    fn name(&self) -> String {
        format!(
            "witness-bettor(n={},k={},candidates={})",
            self.n,
            self.k,
            self.candidates.len()
        )
    }

    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>> {
        for (_, y) in &self.candidates {
            let q = self.query_for(y);
            if !state.queried(&q) {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    fn value(&self, state: &OrderedBetState) -> Result<ExactRational> {
        if self.candidates.is_empty() {
            return Ok(self.share.clone());
        }
        let slice = self.slice();
        let block_len = (self.k + 3) * self.n;
        let mut total = ExactRational::zero();
        for (x, y) in &self.candidates {
            let q = self.query_for(y);
            let target = x.repeat(self.k + 3);
            // Replay the state up to the moment 0y was queried.
            let mut outcome = slice.clone();
            let mut free_before = (1i64) << block_len;
            let mut target_free = true;
            for (a, b) in state.pairs() {
                if a == &q {
                    outcome = if !target_free {
                        slice.clone()
                    } else if b == &target {
                        &slice * &ExactRational::from_int(free_before)
                    } else {
                        ExactRational::zero()
                    };
                    break;
                }
                if b.len() == block_len {
                    free_before -= 1;
                    if b == &target {
                        target_free = false;
                    }
                }
            }
            total += outcome;
        }
        Ok(total)
    }
}

pub fn witness_bettor(
    n: usize,
    k: usize,
    share: ExactRational,
    candidates: BTreeSet<(BinaryString, BinaryString)>,
) -> Result<SharedGame> {
    Ok(Arc::new(WitnessBettor::new(n, k, share, candidates)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betting::{check_bg_averaging, run_betting_game};
    use crate::permspace::FinitePermutation;

    fn s(text: &str) -> BinaryString {
        text.parse().unwrap()
    }

    #[test]
    fn subgame_prior_value_is_the_share() {
        let g = HalfrangeSubgame::new(1, 0, ExactRational::ratio(1, 4)).unwrap();
        assert_eq!(
            g.value(&OrderedBetState::empty()).unwrap(),
            ExactRational::ratio(1, 4)
        );
    }

    #[test]
    fn subgame_confirmation_doubles_refutation_zeroes() {
        let g = HalfrangeSubgame::new(1, 0, ExactRational::ratio(1, 4)).unwrap();
        let confirmed = OrderedBetState::empty()
            .extended(&s("101"), &s("000"))
            .unwrap();
        assert_eq!(g.value(&confirmed).unwrap(), ExactRational::ratio(1, 2));
        let refuted = OrderedBetState::empty()
            .extended(&s("001"), &s("000"))
            .unwrap();
        assert!(g.value(&refuted).unwrap().is_zero());
    }

    #[test]
    fn subgame_averaging_along_its_own_play() {
        let g = HalfrangeSubgame::new(1, 0, ExactRational::one()).unwrap();
        let mut state = OrderedBetState::empty();
        let table = FinitePermutation::random(3, 3);
        for _ in 0..8 {
            assert!(check_bg_averaging(&g, &state).unwrap());
            let q = g.next_query(&state).unwrap().unwrap();
            let y = table.image(&q).unwrap().clone();
            state = state.extended(&q, &y).unwrap();
        }
        assert!(g.next_query(&state).unwrap().is_none());
    }

    #[test]
    fn subgame_run_hits_double_on_a_confirming_table() {
        // A table mapping 10x ↦ 000…: the target's preimage starts with 1.
        let mut images: Vec<BinaryString> = vec![s("λ"), s("0"), s("1")];
        images.extend([s("00"), s("01"), s("10"), s("11")]);
        // Block 3: 000↦111, 001↦110, 010↦101, 011↦100, 100↦000, 101↦001,
        // 110↦010, 111↦011.
        images.extend([
            s("111"),
            s("110"),
            s("101"),
            s("100"),
            s("000"),
            s("001"),
            s("010"),
            s("011"),
        ]);
        let table = FinitePermutation::from_images(3, images).unwrap();
        let g = HalfrangeSubgame::new(1, 0, ExactRational::one()).unwrap();
        let (traj, log) = run_betting_game(&g, &table, 100).unwrap();
        assert_eq!(traj.sup_capital, ExactRational::from_int(2));
        assert_eq!(traj.final_capital(), &ExactRational::from_int(2));
        assert!(log.queries_distinct());
    }

    #[test]
    fn witness_bettor_single_correct_candidate() {
        // n=1, k=0: candidate (x=1, y=00); query 000; a fresh block has
        // |free| = 8, so the slice multiplies by 8 on a hit.
        let mut candidates = BTreeSet::new();
        candidates.insert((s("1"), s("00")));
        let g = WitnessBettor::new(1, 0, ExactRational::one(), candidates).unwrap();
        let hit = OrderedBetState::empty()
            .extended(&s("000"), &s("111"))
            .unwrap();
        assert_eq!(g.value(&hit).unwrap(), ExactRational::from_int(8));
        let miss = OrderedBetState::empty()
            .extended(&s("000"), &s("110"))
            .unwrap();
        assert!(g.value(&miss).unwrap().is_zero());
    }

    #[test]
    fn witness_bettor_all_wrong_loses_share() {
        let mut candidates = BTreeSet::new();
        candidates.insert((s("0"), s("00")));
        candidates.insert((s("1"), s("01")));
        let g = WitnessBettor::new(1, 0, ExactRational::one(), candidates).unwrap();
        // Identity table: image of 000 is 000 ≠ 000? target for (0,00) is
        // 000 — identity actually hits it. Use a shifted table instead.
        let table = FinitePermutation::single_cycles(3);
        // 000 ↦ 001 (≠ 000 target), 001 ↦ 010 (≠ 111 target): both slices die.
        let (traj, _) = run_betting_game(&g, &table, 100).unwrap();
        assert!(traj.final_capital().is_zero());
        assert_eq!(traj.initial_capital, ExactRational::one());
    }

    #[test]
    fn witness_bettor_empty_candidates_is_flat() {
        let g = WitnessBettor::new(1, 0, ExactRational::ratio(2, 3), BTreeSet::new()).unwrap();
        assert!(g.next_query(&OrderedBetState::empty()).unwrap().is_none());
        assert_eq!(
            g.value(&OrderedBetState::empty()).unwrap(),
            ExactRational::ratio(2, 3)
        );
    }

    #[test]
    fn witness_bettor_averaging_at_the_bet() {
        let mut candidates = BTreeSet::new();
        candidates.insert((s("1"), s("00")));
        candidates.insert((s("0"), s("01")));
        let g = WitnessBettor::new(1, 0, ExactRational::one(), candidates).unwrap();
        let mut state = OrderedBetState::empty();
        for _ in 0..2 {
            assert!(check_bg_averaging(&g, &state).unwrap());
            let q = g.next_query(&state).unwrap().unwrap();
            let y = FinitePermutation::identity(3).image(&q).unwrap().clone();
            state = state.extended(&q, &y).unwrap();
        }
    }

    #[test]
    fn witness_bettor_rides_uniform_when_target_is_consumed() {
        // Two candidates with the same target x^3: once the first hits,
        // the second's event is refuted before its bet; its slice rides.
        let mut candidates = BTreeSet::new();
        candidates.insert((s("1"), s("00")));
        candidates.insert((s("1"), s("01")));
        let g = WitnessBettor::new(1, 0, ExactRational::one(), candidates).unwrap();
        let state = OrderedBetState::empty()
            .extended(&s("000"), &s("111"))
            .unwrap()
            .extended(&s("001"), &s("110"))
            .unwrap();
        // First slice: hit, ×8. Second: target 111 consumed → rides at 1/2.
        assert_eq!(
            g.value(&state).unwrap(),
            ExactRational::from_int(4) + ExactRational::ratio(1, 2)
        );
    }

    #[test]
    fn witness_bettor_rejects_malformed_candidates() {
        let mut candidates = BTreeSet::new();
        candidates.insert((s("11"), s("00")));
        assert!(WitnessBettor::new(1, 0, ExactRational::one(), candidates).is_err());
    }
}
