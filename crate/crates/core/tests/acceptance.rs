//! Acceptance suite. One test per criterion; each prints a single
//! pass/fail line and enforces its runtime budget. All comparisons are
//! exact rationals — zero tolerance unless a bound is itself the claim.
//!
//! Run with `cargo test -p permlab-core --test acceptance` (add
//! `-- --nocapture` to see the per-criterion lines).

use std::time::Instant;

use permlab_core::verify::{
    audit_adapter, audit_conservation, audit_defeat, audit_figure1, audit_kraft, audit_measure,
    audit_parity, audit_subgame, audit_transfer, audit_ville, AuditOutcome,
};

const SEED: u64 = 42;

fn criterion(name: &str, budget_secs: f64, run: impl FnOnce() -> AuditOutcome) {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion {name}: {} ({elapsed:.2}s) — {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail
    );
    assert!(outcome.passed, "{name}: {}", outcome.detail);
    assert!(
        elapsed < budget_secs,
        "{name} exceeded its {budget_secs}s budget: {elapsed:.2}s"
    );
}

#[test]
fn criterion_01_figure1_fixture() {
    // 17 averaging checks (root, 4 depth-1, 12 depth-2), root = 13/24.
    criterion("1 figure1-fixture", 1.0, || audit_figure1().unwrap());
}

#[test]
fn criterion_02_measure_formula() {
    // Formula vs brute-force frequency over all 48 tables, every prefix
    // with |g| ≤ 7, exactly.
    criterion("2 measure-formula", 1.0, || audit_measure(2).unwrap());
}

#[test]
fn criterion_03_conservation() {
    // μ(S^k[d]) ≤ d([])/k for k ∈ {1,2,4}, each built-in martingale,
    // brute-forced over the 48 tables.
    criterion("3 conservation", 10.0, || audit_conservation(2).unwrap());
}

#[test]
fn criterion_04_kraft() {
    // Σ μ(g)·d(g) ≤ d([]) for 1000 sampled prefix-free families over
    // lengths ≤ 2 and each built-in martingale.
    criterion("4 kraft", 30.0, || audit_kraft(1000, SEED).unwrap());
}

#[test]
fn criterion_05_ville_round_trip() {
    // 100 sampled covers: initial capital Σ μ(g); the k = 1 extracted
    // cover re-covers every table in ∪⟨g⟩ with no more measure.
    criterion("5 ville-round-trip", 30.0, || audit_ville(100, SEED).unwrap());
}

#[test]
fn criterion_06_defeat_bound() {
    // Diagonalized tables up to length 3: sup ≤ c + 1 for noisy
    // approximations, ≤ c for exact strategies and betting games.
    criterion("6 defeat-bound", 60.0, || audit_defeat(3).unwrap());
}

#[test]
fn criterion_07_cycle_parity() {
    // At most one of the two final completions forms a single 2^n-cycle:
    // exhaustive at n ≤ 2, 10⁴ sampled near-complete prefixes at n = 3.
    criterion("7 cycle-parity", 30.0, || audit_parity(10_000, SEED).unwrap());
}

#[test]
fn criterion_08_subgame_doubling() {
    // halfrange_event_subgame(1,0,s) is exactly 2s on confirming statuses
    // and 0 on refuting ones, exhaustively over ≤ 3 assignments.
    criterion("8 subgame-doubling", 10.0, || audit_subgame().unwrap());
}

#[test]
fn criterion_09_transfer_bound() {
    // Every coded bet of transfer(d≡1) at n = 1 has multiplier within
    // [3/4, 4/3]; the block product stays ≥ (3/4)².
    criterion("9 transfer-bound", 10.0, || audit_transfer(false).unwrap());
}

#[test]
fn criterion_10_adapter_equivalence() {
    // from_martingale trajectories equal run_martingale trajectories on
    // all 48 tables for every built-in martingale, step for step.
    criterion("10 adapter-equivalence", 30.0, || audit_adapter(2).unwrap());
}
