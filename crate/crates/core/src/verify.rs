//! The brute-force audit suite: averaging, measure-vs-frequency, Kraft,
//! conservation, the Ville round trip, adapter equivalence, defeat
//! bounds, cycle parity, subgame doubling, and the quantitative transfer
//! bound. Each audit reports pass/fail with an exact witness on failure.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use rand::prelude::IndexedRandom;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::betting::{
    from_martingale, halfrange_event_subgame, run_betting_game, witness_bettor, SharedGame,
};
use crate::diagonal::{defeat_betting_game, defeat_martingale};
use crate::error::{PermLabError, Result};
use crate::martingale::{
    approx_wrap, averaging_violation, check_averaging, cover_to_martingale, cycle_martingale,
    cylinder_martingale, figure1_martingale, likelihood_ratio_martingale, martingale_to_cover,
    predictor_martingale, run_martingale, verify_kraft, BetSchedule, ConstantMartingale,
    CoverSet, HalfrangeEventOracle, NoiseMode, SharedMartingale, TablePredictor,
};
use crate::permspace::{
    cylinder_measure, enumerate_permutations, is_single_cycle, FinitePermutation,
    PrefixPartialPermutation,
};
use crate::rational::ExactRational;
use crate::strings::{all_strings_of_length, block_end_exclusive, BinaryString};
use crate::testlang::BlockStatus;
use crate::transfer::{
    transfer_betting_game, transfer_martingale, transfer_step_multiplier, ClassicalConstant,
    ClassicalMartingaleGame, SharedClassical,
};

#[derive(Clone, Debug)]
pub struct AuditOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl AuditOutcome {
    fn pass(name: &str, detail: String) -> Self {
        AuditOutcome {
            name: name.into(),
            passed: true,
            detail,
        }
    }

    fn fail(name: &str, detail: String) -> Self {
        AuditOutcome {
            name: name.into(),
            passed: false,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn prefix(values: &[&str]) -> PrefixPartialPermutation {
    PrefixPartialPermutation::from_values(
        values.iter().map(|v| v.parse().expect("literal")).collect(),
    )
    .expect("literal prefix")
}

/// The strategies every cross-cutting audit runs: one of each constructed
/// kind, at parameters small enough for length ≤ 3 work.
pub fn built_in_martingales() -> Vec<SharedMartingale> {
    let oracle = Arc::new(HalfrangeEventOracle { n: 1, k: 0 });
    let mut schedule = BetSchedule::new();
    schedule.insert(
        "00".parse().expect("literal"),
        ExactRational::ratio(1, 2),
    );
    vec![
        Arc::new(ConstantMartingale::new(ExactRational::one())),
        figure1_martingale(),
        cycle_martingale(3),
        cylinder_martingale(prefix(&["λ", "0"])),
        cylinder_martingale(prefix(&["λ", "1", "0", "11"])),
        cover_to_martingale(&CoverSet::new(vec![
            prefix(&["λ", "0"]),
            prefix(&["λ", "1", "0", "11"]),
        ])),
        likelihood_ratio_martingale(oracle, PrefixPartialPermutation::empty())
            .expect("prior is 1/2"),
        transfer_martingale(Arc::new(ClassicalConstant(ExactRational::one()))),
        predictor_martingale(
            Arc::new(TablePredictor::new(FinitePermutation::single_cycles(3))),
            schedule,
            ExactRational::one(),
        )
        .expect("schedule fits"),
    ]
}

/// Honesty bound as a plain function of the stage.
pub type HonestyBound = fn(usize) -> usize;

/// Built-in betting games paired with the honesty bound each satisfies.
pub fn built_in_games() -> Vec<(SharedGame, HonestyBound)> {
    fn identity(n: usize) -> usize {
        n
    }
    fn three(_: usize) -> usize {
        3
    }
    let mut candidates = std::collections::BTreeSet::new();
    candidates.insert((
        "1".parse::<BinaryString>().expect("literal"),
        "00".parse::<BinaryString>().expect("literal"),
    ));
    candidates.insert(("0".parse().expect("literal"), "01".parse().expect("literal")));
    vec![
        (from_martingale(figure1_martingale()), identity as HonestyBound),
        (from_martingale(cycle_martingale(3)), identity),
        (
            from_martingale(cylinder_martingale(prefix(&["λ", "1", "0", "11"]))),
            identity,
        ),
        (
            halfrange_event_subgame(1, 0, ExactRational::one()).expect("n ≥ 1"),
            three,
        ),
        (
            witness_bettor(1, 0, ExactRational::one(), candidates).expect("candidates fit"),
            three,
        ),
        (
            transfer_betting_game(Arc::new(ClassicalMartingaleGame::new(Arc::new(
                ClassicalConstant(ExactRational::one()),
            )))),
            identity,
        ),
    ]
}

/// Figure-1 fixture audit: the root value and the 17 averaging checks at
/// the root, the 4 depth-1 nodes, and the 12 depth-2 nodes of the
/// length-2 block.
pub fn audit_figure1() -> Result<AuditOutcome> {
    let name = "figure1";
    let d = figure1_martingale();
    if d.initial_capital()? != ExactRational::ratio(13, 24) {
        return Ok(AuditOutcome::fail(
            name,
            format!("root value {} ≠ 13/24", d.initial_capital()?),
        ));
    }
    let base = prefix(&["λ", "0", "1"]);
    let mut checks = 0usize;
    let mut stack = vec![base];
    while let Some(g) = stack.pop() {
        if !check_averaging(d.as_ref(), &g)? {
            return Ok(AuditOutcome::fail(name, format!("averaging fails at {g}")));
        }
        checks += 1;
        if g.len() < 5 {
            for x in g.free_values() {
                stack.push(g.extend(&x)?);
            }
        }
    }
    if checks != 17 {
        return Ok(AuditOutcome::fail(
            name,
            format!("expected 17 averaging nodes, audited {checks}"),
        ));
    }
    Ok(AuditOutcome::pass(
        name,
        "root = 13/24; 17/17 averaging checks exact".into(),
    ))
}

/// Every prefix over lengths ≤ max_length has formula measure equal to its
/// brute-force frequency among all enumerated tables.
pub fn audit_measure(max_length: u32) -> Result<AuditOutcome> {
    let name = "measure";
    let total: usize = enumerate_permutations(max_length)?.count();
    let mut counts: HashMap<Vec<BinaryString>, usize> = HashMap::new();
    for table in enumerate_permutations(max_length)? {
        let full = table.full_prefix();
        for n in 0..=full.len() {
            *counts.entry(full.values()[..n].to_vec()).or_default() += 1;
        }
    }
    let mut audited = 0usize;
    for (values, count) in counts {
        let g = PrefixPartialPermutation::from_values(values)?;
        let frequency = ExactRational::ratio(count as i64, total as i64);
        if cylinder_measure(&g) != frequency {
            return Ok(AuditOutcome::fail(
                name,
                format!(
                    "μ({g}) = {} but {count}/{total} tables extend it",
                    cylinder_measure(&g)
                ),
            ));
        }
        audited += 1;
    }
    Ok(AuditOutcome::pass(
        name,
        format!("{audited} prefixes match brute-force frequency over {total} tables"),
    ))
}

/// Exhaustive averaging and nonnegativity audit of every built-in
/// martingale at betting lengths ≤ 2.
pub fn audit_averaging() -> Result<AuditOutcome> {
    let name = "averaging";
    for d in built_in_martingales() {
        if let Some(witness) = averaging_violation(d.as_ref(), 2)? {
            return Ok(AuditOutcome::fail(
                name,
                format!("{} violates averaging at {witness}", d.name()),
            ));
        }
        let mut negative = None;
        crate::martingale::for_each_prefix(2, |g| {
            if negative.is_none() && d.value(g)?.is_negative() {
                negative = Some(g.clone());
            }
            Ok(())
        })?;
        if let Some(witness) = negative {
            return Ok(AuditOutcome::fail(
                name,
                format!("{} is negative at {witness}", d.name()),
            ));
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!(
            "{} built-in martingales exact and nonnegative at every node with betting length ≤ 2",
            built_in_martingales().len()
        ),
    ))
}

/// μ(S^k[d]) ≤ d([ ])/k for k ∈ {1,2,4}, brute-forced over all tables.
pub fn audit_conservation(max_length: u32) -> Result<AuditOutcome> {
    let name = "conservation";
    let tables: Vec<FinitePermutation> = enumerate_permutations(max_length)?.collect();
    let total = ExactRational::from_int(tables.len() as i64);
    let mut lines = Vec::new();
    for d in built_in_martingales() {
        let sups: Vec<ExactRational> = tables
            .iter()
            .map(|t| run_martingale(d.as_ref(), t).map(|traj| traj.sup_capital))
            .collect::<Result<_>>()?;
        let initial = d.initial_capital()?;
        for k in [1u64, 2, 4] {
            let k = ExactRational::from(k);
            let hits = sups.iter().filter(|s| *s >= &k).count();
            let mass = ExactRational::from_int(hits as i64) / total.clone();
            let bound = &initial / &k;
            if mass > bound {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("{}: μ(S^{k}) = {mass} > {bound}", d.name()),
                ));
            }
        }
        lines.push(d.name());
    }
    Ok(AuditOutcome::pass(
        name,
        format!(
            "μ(S^k) ≤ d([])/k for k ∈ {{1,2,4}} over {} tables for: {}",
            tables.len(),
            lines.join(", ")
        ),
    ))
}

/// Betting-game conservation over all tables: games define premeasures
/// exactly as martingales do.
pub fn audit_game_conservation(max_length: u32) -> Result<AuditOutcome> {
    let name = "game-conservation";
    let tables: Vec<FinitePermutation> = enumerate_permutations(max_length)?.collect();
    let total = ExactRational::from_int(tables.len() as i64);
    let mut audited = 0usize;
    for (game, _) in built_in_games() {
        // The subgames query length-3 strings, so they need tables long
        // enough to answer.
        if max_length < 3
            && (game.name().starts_with("halfrange-subgame")
                || game.name().starts_with("witness-bettor"))
        {
            continue;
        }
        let initial = game.initial_capital()?;
        let mut sups = Vec::new();
        for t in &tables {
            let (traj, _) = run_betting_game(game.as_ref(), t, 1 << 12)?;
            sups.push(traj.sup_capital);
        }
        for k in [1u64, 2] {
            let k = ExactRational::from(k);
            let hits = sups.iter().filter(|s| *s >= &k).count();
            let mass = ExactRational::from_int(hits as i64) / total.clone();
            let bound = &initial / &k;
            if mass > bound {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("{}: μ(sup ≥ {k}) = {mass} > {bound}", game.name()),
                ));
            }
        }
        audited += 1;
    }
    Ok(AuditOutcome::pass(
        name,
        format!("{audited} games within the k ∈ {{1,2}} bounds over {} tables", tables.len()),
    ))
}

/// All prefix partial permutations over lengths ≤ 2, used as the sampling
/// universe for Kraft families and covers.
fn all_prefixes_len2() -> Vec<PrefixPartialPermutation> {
    let mut out = Vec::new();
    let mut stack = vec![PrefixPartialPermutation::empty()];
    while let Some(g) = stack.pop() {
        if g.len() < block_end_exclusive(2) {
            for x in g.free_values() {
                stack.push(g.extend(&x).expect("free extension"));
            }
        }
        out.push(g);
    }
    out
}

/// A random prefix-free family over lengths ≤ 2: a depth-first descent
/// that includes, skips, or recurses at each node.
fn sample_prefix_free(rng: &mut ChaCha12Rng) -> CoverSet {
    let mut family = Vec::new();
    let mut stack = vec![PrefixPartialPermutation::empty()];
    while let Some(g) = stack.pop() {
        if !g.is_empty() {
            match rng.random_range(0..3u8) {
                0 => {
                    family.push(g);
                    continue;
                }
                1 => continue,
                _ => {}
            }
        }
        if g.len() < block_end_exclusive(2) {
            for x in g.free_values() {
                stack.push(g.extend(&x).expect("free extension"));
            }
        }
    }
    CoverSet::new(family)
}

/// Σ μ(g)·d(g) ≤ d([ ]) for sampled prefix-free families and every
/// built-in martingale.
pub fn audit_kraft(samples: usize, seed: u64) -> Result<AuditOutcome> {
    let name = "kraft";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let strategies = built_in_martingales();
    for i in 0..samples {
        let family = sample_prefix_free(&mut rng);
        debug_assert!(family.is_prefix_free());
        for d in &strategies {
            let mass = verify_kraft(&family, d.as_ref())?;
            let initial = d.initial_capital()?;
            if mass > initial {
                return Ok(AuditOutcome::fail(
                    name,
                    format!(
                        "sample {i}: {} has Kraft mass {mass} > initial {initial}",
                        d.name()
                    ),
                ));
            }
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!(
            "{samples} prefix-free families × {} martingales within d([])",
            strategies.len()
        ),
    ))
}

/// Ville round trip on sampled covers: the cover-sum martingale starts at
/// Σ μ(g), and its k = 1 extracted cover re-covers every table the
/// original covered, with no more total measure.
pub fn audit_ville(samples: usize, seed: u64) -> Result<AuditOutcome> {
    let name = "ville";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let universe = all_prefixes_len2();
    let tables: Vec<FinitePermutation> = enumerate_permutations(2)?.collect();
    for i in 0..samples {
        let count = rng.random_range(1..=6);
        let cover = CoverSet::new(
            (0..count)
                .map(|_| universe.choose(&mut rng).expect("universe nonempty").clone())
                .collect(),
        );
        let d = cover_to_martingale(&cover);
        if d.initial_capital()? != cover.total_measure() {
            return Ok(AuditOutcome::fail(
                name,
                format!("sample {i}: initial capital ≠ Σ μ(g)"),
            ));
        }
        let extracted = martingale_to_cover(d.as_ref(), &ExactRational::one(), 2)?;
        if !extracted.is_prefix_free() {
            return Ok(AuditOutcome::fail(
                name,
                format!("sample {i}: extracted cover is not prefix-free"),
            ));
        }
        if extracted.total_measure() > cover.total_measure() {
            return Ok(AuditOutcome::fail(
                name,
                format!(
                    "sample {i}: extracted measure {} exceeds μ(G) = {}",
                    extracted.total_measure(),
                    cover.total_measure()
                ),
            ));
        }
        for t in &tables {
            if cover.covers_table(t) && !extracted.covers_table(t) {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("sample {i}: a covered table escaped the extracted cover"),
                ));
            }
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!("{samples} covers round-trip exactly over 48 tables"),
    ))
}

/// Diagonalization bounds: exact strategies never gain; noisy
/// approximations stay within the Σ 2^{−n} slack; betting games defeat to
/// within their initial capital.
pub fn audit_defeat(max_length: u32) -> Result<AuditOutcome> {
    let name = "defeat";
    let mut audited = 0usize;
    for d in built_in_martingales() {
        let initial = d.initial_capital()?;
        let exact = defeat_martingale(approx_wrap(d.clone(), NoiseMode::Exact).as_ref(), max_length)?;
        if exact.sup_capital > initial {
            return Ok(AuditOutcome::fail(
                name,
                format!("{}: exact defeat reached {}", d.name(), exact.sup_capital),
            ));
        }
        let noisy = defeat_martingale(
            approx_wrap(d.clone(), NoiseMode::Hashed { salt: 0xD1A6 }).as_ref(),
            max_length,
        )?;
        let bound = &initial + &ExactRational::one();
        // The true capital along the noisy table obeys the same bound.
        let true_sup = run_martingale(d.as_ref(), &noisy.permutation)?.sup_capital;
        if noisy.sup_capital > bound || true_sup > bound || !noisy.within_bound() {
            return Ok(AuditOutcome::fail(
                name,
                format!("{}: noisy defeat exceeded c + 1", d.name()),
            ));
        }
        audited += 1;
    }
    for (game, honesty) in built_in_games() {
        let report = defeat_betting_game(game.as_ref(), &honesty, max_length)?;
        if report.sup_capital > report.initial_capital {
            return Ok(AuditOutcome::fail(
                name,
                format!("{}: game defeat reached {}", game.name(), report.sup_capital),
            ));
        }
        audited += 1;
    }
    Ok(AuditOutcome::pass(
        name,
        format!("{audited} strategies defeated within bounds at max length {max_length}"),
    ))
}

fn cycle_completion_count(assigned: &[BinaryString], n: usize) -> usize {
    let block = all_strings_of_length(n);
    let free: Vec<BinaryString> = block
        .iter()
        .filter(|x| !assigned.contains(x))
        .cloned()
        .collect();
    assert_eq!(free.len(), 2);
    let mut count = 0;
    for (a, b) in [(0, 1), (1, 0)] {
        let mut images = assigned.to_vec();
        images.push(free[a].clone());
        images.push(free[b].clone());
        if is_single_cycle(&images) {
            count += 1;
        }
    }
    count
}

/// At most one of the two completions of 1^{n−1}0's image forms a single
/// 2^n-cycle: exhaustive at n ≤ 2, sampled at n = 3.
pub fn audit_parity(samples: usize, seed: u64) -> Result<AuditOutcome> {
    let name = "parity";
    // n = 1: nothing assigned before the critical bet.
    if cycle_completion_count(&[], 1) > 1 {
        return Ok(AuditOutcome::fail(name, "two cycle completions at n=1".into()));
    }
    // n = 2: all P(4,2) = 12 partial assignments.
    let block2 = all_strings_of_length(2);
    let mut checked2 = 0usize;
    for first in &block2 {
        for second in &block2 {
            if first == second {
                continue;
            }
            if cycle_completion_count(&[first.clone(), second.clone()], 2) > 1 {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("two cycle completions after [{first},{second}]"),
                ));
            }
            checked2 += 1;
        }
    }
    // n = 3: sampled near-complete prefixes.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let block3 = all_strings_of_length(3);
    for _ in 0..samples {
        let mut images = block3.clone();
        images.shuffle(&mut rng);
        images.truncate(6);
        if cycle_completion_count(&images, 3) > 1 {
            return Ok(AuditOutcome::fail(
                name,
                format!("two cycle completions after {images:?}"),
            ));
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!("exhaustive at n ≤ 2 ({checked2} states) and {samples} sampled states at n = 3"),
    ))
}

fn statuses_up_to(assignments: usize, block_len: usize) -> Vec<BlockStatus> {
    let block = all_strings_of_length(block_len);
    let mut layers = vec![vec![BlockStatus::new(block_len)]];
    for _ in 0..assignments {
        let mut next = Vec::new();
        for ω in layers.last().expect("nonempty") {
            for x in &block {
                if ω.image_of(x).is_some() {
                    continue;
                }
                // Extend only at the lexicographically largest assigned
                // domain string to avoid duplicate statuses.
                if ω.assignments().iter().any(|(a, _)| a > x) {
                    continue;
                }
                for y in &block {
                    if ω.preimage_of(y).is_some() {
                        continue;
                    }
                    let mut ext = ω.clone();
                    ext.assign(x.clone(), y.clone()).expect("fresh pair");
                    next.push(ext);
                }
            }
        }
        layers.push(next);
    }
    layers.into_iter().flatten().collect()
}

/// Subgame doubling: 2s on every confirming status, 0 on every refuting
/// one, 2s·(free 1-prefixed)/(free) otherwise; exhaustive over statuses
/// with ≤ 3 assignments at n = 1, k = 0.
pub fn audit_subgame() -> Result<AuditOutcome> {
    let name = "subgame";
    let share = ExactRational::ratio(3, 5);
    let subgame = crate::betting::HalfrangeSubgame::new(1, 0, share.clone())?;
    let target = BinaryString::zeros(3);
    let statuses = statuses_up_to(3, 3);
    let double = &share * &ExactRational::from_int(2);
    for ω in &statuses {
        let value = subgame.value_at_status(ω)?;
        let expected = match ω.preimage_of(&target) {
            Some(x) if x.first_bit() == Some(true) => double.clone(),
            Some(_) => ExactRational::zero(),
            None => {
                let free: Vec<BinaryString> = all_strings_of_length(3)
                    .into_iter()
                    .filter(|x| ω.image_of(x).is_none())
                    .collect();
                let ones = free
                    .iter()
                    .filter(|x| x.first_bit() == Some(true))
                    .count() as i64;
                &double * &ExactRational::ratio(ones, free.len() as i64)
            }
        };
        if value != expected {
            return Ok(AuditOutcome::fail(
                name,
                format!("status {ω:?}: value {value} ≠ {expected}"),
            ));
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!(
            "{} statuses: 2s when confirmed, 0 when refuted, exact ratio otherwise",
            statuses.len()
        ),
    ))
}

/// Quantitative transfer bound at n = 1 plus the full averaging walk of
/// the coded block for one lower arrangement, with value independence
/// from the lower blocks checked explicitly.
pub fn audit_transfer(full_walk: bool) -> Result<AuditOutcome> {
    let name = "transfer";
    let classical: SharedClassical = Arc::new(ClassicalConstant(ExactRational::one()));
    let lo = ExactRational::ratio(3, 4);
    let hi = (ExactRational::ratio(3, 4)).recip()?;
    let floor = &lo * &lo;
    let base = prefix(&["λ", "0", "1", "00", "01", "10", "11"]);
    let mut bets = 0usize;
    for first in base.free_values() {
        let g1 = base.extend(&first)?;
        let m1 = transfer_step_multiplier(classical.clone(), &g1, 7)?;
        if m1 < lo || m1 > hi {
            return Ok(AuditOutcome::fail(
                name,
                format!("first coded multiplier {m1} outside [3/4, 4/3]"),
            ));
        }
        for second in g1.free_values() {
            let g2 = g1.extend(&second)?;
            let m2 = transfer_step_multiplier(classical.clone(), &g2, 8)?;
            if m2 < lo || m2 > hi {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("second coded multiplier {m2} outside [3/4, 4/3]"),
                ));
            }
            if &m1 * &m2 < floor {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("block product {} below (3/4)²", &m1 * &m2),
                ));
            }
            bets += 1;
        }
    }
    let d = transfer_martingale(classical.clone());
    // The value never reads the lower blocks; check that directly, then
    // walk one arrangement's block-3 subtree exhaustively.
    let other = prefix(&["λ", "1", "0", "10", "11", "00", "01"]);
    for tail in [&["011"][..], &["011", "101"], &["100", "000", "111"]] {
        let mut a = base.clone();
        let mut b = other.clone();
        for img in tail {
            let img: BinaryString = img.parse().expect("literal");
            a = a.extend(&img)?;
            b = b.extend(&img)?;
        }
        if d.value(&a)? != d.value(&b)? {
            return Ok(AuditOutcome::fail(
                name,
                format!("value depends on the lower blocks at {a}"),
            ));
        }
    }
    let depth_limit = if full_walk { 14 } else { 11 };
    let mut nodes = 0usize;
    let mut stack = vec![base];
    while let Some(g) = stack.pop() {
        if !check_averaging(d.as_ref(), &g)? {
            return Ok(AuditOutcome::fail(name, format!("averaging fails at {g}")));
        }
        nodes += 1;
        if g.len() < depth_limit {
            for x in g.free_values() {
                stack.push(g.extend(&x)?);
            }
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!("{bets} coded-bet pairs in window; {nodes} block-3 averaging nodes exact"),
    ))
}

/// from_martingale trajectories equal run_martingale trajectories
/// step-for-step on every table, for every built-in martingale.
pub fn audit_adapter(max_length: u32) -> Result<AuditOutcome> {
    let name = "adapter";
    let tables: Vec<FinitePermutation> = enumerate_permutations(max_length)?.collect();
    let strategies = built_in_martingales();
    for d in &strategies {
        let game = from_martingale(d.clone());
        for t in &tables {
            let (game_traj, log) = run_betting_game(game.as_ref(), t, 1 << 12)?;
            let mart_traj = run_martingale(d.as_ref(), t)?;
            if game_traj.initial_capital != mart_traj.initial_capital
                || game_traj.capitals() != mart_traj.capitals()
            {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("{} diverges from its adapter on a table", d.name()),
                ));
            }
            if !log.queries_distinct() {
                return Ok(AuditOutcome::fail(
                    name,
                    format!("{} adapter repeated a query", d.name()),
                ));
            }
        }
    }
    Ok(AuditOutcome::pass(
        name,
        format!(
            "{} martingales × {} tables step-for-step equal",
            strategies.len(),
            tables.len()
        ),
    ))
}

/// Which audits to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Figure1,
    Measure,
    Averaging,
    Conservation,
    GameConservation,
    Kraft,
    Ville,
    Defeat,
    Parity,
    Subgame,
    Transfer,
    Adapter,
    All,
}

impl FromStr for Scope {
    type Err = PermLabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "figure1" => Scope::Figure1,
            "measure" => Scope::Measure,
            "averaging" => Scope::Averaging,
            "conservation" => Scope::Conservation,
            "game-conservation" => Scope::GameConservation,
            "kraft" => Scope::Kraft,
            "ville" => Scope::Ville,
            "defeat" => Scope::Defeat,
            "parity" => Scope::Parity,
            "subgame" => Scope::Subgame,
            "transfer" => Scope::Transfer,
            "adapter" => Scope::Adapter,
            "all" => Scope::All,
            other => {
                return Err(PermLabError::InvalidArgument(format!(
                    "unknown verify scope {other:?}"
                )))
            }
        })
    }
}

pub struct VerifyConfig {
    /// Exhaustive-enumeration length for the table-sweep audits.
    pub max_length: u32,
    pub kraft_samples: usize,
    pub ville_samples: usize,
    pub parity_samples: usize,
    pub seed: u64,
    /// Walk the entire coded block in the transfer audit.
    pub full_transfer_walk: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_length: 2,
            kraft_samples: 1000,
            ville_samples: 100,
            parity_samples: 10_000,
            seed: 0,
            full_transfer_walk: true,
        }
    }
}

pub fn run_scope(scope: Scope, config: &VerifyConfig) -> Result<Vec<AuditOutcome>> {
    let mut out = Vec::new();
    let all = scope == Scope::All;
    if all || scope == Scope::Figure1 {
        out.push(audit_figure1()?);
    }
    if all || scope == Scope::Measure {
        out.push(audit_measure(config.max_length)?);
    }
    if all || scope == Scope::Averaging {
        out.push(audit_averaging()?);
    }
    if all || scope == Scope::Conservation {
        out.push(audit_conservation(config.max_length)?);
    }
    if all || scope == Scope::GameConservation {
        out.push(audit_game_conservation(config.max_length)?);
    }
    if all || scope == Scope::Kraft {
        out.push(audit_kraft(config.kraft_samples, config.seed)?);
    }
    if all || scope == Scope::Ville {
        out.push(audit_ville(config.ville_samples, config.seed)?);
    }
    if all || scope == Scope::Defeat {
        out.push(audit_defeat(3)?);
    }
    if all || scope == Scope::Parity {
        out.push(audit_parity(config.parity_samples, config.seed)?);
    }
    if all || scope == Scope::Subgame {
        out.push(audit_subgame()?);
    }
    if all || scope == Scope::Transfer {
        out.push(audit_transfer(config.full_transfer_walk)?);
    }
    if all || scope == Scope::Adapter {
        out.push(audit_adapter(config.max_length)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_audit_passes() {
        assert!(audit_figure1().unwrap().passed);
    }

    #[test]
    fn averaging_audit_passes() {
        let outcome = audit_averaging().unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn built_ins_average_along_length3_prefixes() {
        // The exhaustive audit stops at betting length 2; the block-3
        // bets (cycle critical bet, coded transfer bets, the event
        // block) are checked here along whole-table prefixes.
        let tables = [
            FinitePermutation::identity(3),
            FinitePermutation::single_cycles(3),
            FinitePermutation::random(3, 5),
            FinitePermutation::random(3, 11),
        ];
        for d in built_in_martingales() {
            for t in &tables {
                for n in 0..t.domain_size() {
                    let g = t.value_prefix(n);
                    assert!(
                        check_averaging(d.as_ref(), &g).unwrap(),
                        "{} fails averaging at {g}",
                        d.name()
                    );
                }
            }
        }
    }

    #[test]
    fn game_conservation_audit_passes() {
        let outcome = audit_game_conservation(2).unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn subgame_audit_passes() {
        let outcome = audit_subgame().unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn parity_audit_passes_on_a_small_sample() {
        let outcome = audit_parity(200, 1).unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn scope_parsing() {
        assert_eq!("all".parse::<Scope>().unwrap(), Scope::All);
        assert!("bogus".parse::<Scope>().is_err());
    }

    #[test]
    fn fault_injection_is_caught() {
        // A deliberately broken martingale fails the averaging audit
        // machinery (the audit functions themselves are wired to the
        // built-ins, so probe the primitive directly).
        struct Broken;
        impl crate::martingale::PermMartingale for Broken {
            fn name(&self) -> String {
                "broken".into()
            }
            fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
                // Literally the prefix length: not a martingale.
                Ok(ExactRational::from_int(g.len() as i64))
            }
        }
        let witness = averaging_violation(&Broken, 1).unwrap();
        assert!(witness.is_some());
    }
}
