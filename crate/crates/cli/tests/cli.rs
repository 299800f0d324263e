//! End-to-end checks on the permlab binary: exit codes, determinism of
//! reports, and the table file round trip.

use std::path::PathBuf;
use std::process::{Command, Output};

fn permlab(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("permlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn figure1_run_reports_the_paper_path() {
    let dir = tempdir("fig1");
    // The table whose length-2 images follow the 00·01·11·10 path.
    let table = "maxlen=2\nλ -> λ\n0 -> 0\n1 -> 1\n00 -> 00\n01 -> 01\n10 -> 11\n11 -> 10\n";
    std::fs::write(dir.join("path.txt"), table).unwrap();
    let out = permlab(
        &[
            "run",
            "--strategy",
            "figure1",
            "--table",
            "file:path.txt",
            "--out",
            ".",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let capitals: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit_once(',').unwrap().0.rsplit_once(',').unwrap().1)
        .collect();
    // numerators of 13/24, …, 2/3, 3/2, 2, 2
    let nums: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts = l.split(',');
            parts.nth(3).unwrap()
        })
        .collect();
    assert_eq!(capitals.len(), 8);
    assert_eq!(nums, vec!["13", "13", "13", "13", "2", "3", "2", "2"]);
}

#[test]
fn verify_scopes_exit_zero() {
    let dir = tempdir("verify");
    for scope in ["figure1", "subgame", "parity"] {
        let out = permlab(
            &["verify", "--scope", scope, "--parity-samples", "200"],
            &dir,
        );
        assert!(out.status.success(), "scope {scope}");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("PASS"), "scope {scope}: {stdout}");
    }
}

#[test]
fn missing_table_file_exits_two() {
    let dir = tempdir("missing");
    let out = permlab(
        &["run", "--strategy", "figure1", "--table", "file:no-such-table.txt"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_strategy_exits_two() {
    let dir = tempdir("unknown");
    let out = permlab(&["run", "--strategy", "martin-gale"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strategy_violation_exits_one() {
    // The subgame queries length-3 strings; a maxlen-2 table cannot
    // answer, which the runner reports as an illegal move.
    let dir = tempdir("violation");
    let out = permlab(
        &["run", "--strategy", "subgame:1,0", "--table", "identity", "--maxlen", "2"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("illegal move"), "{stderr}");
}

#[test]
fn identical_seeds_give_byte_identical_reports() {
    let a = tempdir("det-a");
    let b = tempdir("det-b");
    for dir in [&a, &b] {
        let out = permlab(
            &[
                "run", "--strategy", "cycle", "--table", "random", "--seed", "11", "--maxlen",
                "3", "--out", ".",
            ],
            dir,
        );
        assert!(out.status.success());
    }
    let left = std::fs::read(a.join("trajectory.csv")).unwrap();
    let right = std::fs::read(b.join("trajectory.csv")).unwrap();
    assert_eq!(left, right);
}

#[test]
fn diagonalize_emits_table_and_report() {
    let dir = tempdir("diag");
    let out = permlab(
        &["diagonalize", "--strategy", "cylinder:λ,0", "--maxlen", "2", "--out", "."],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.join("defeat_table.txt")).unwrap();
    assert!(table.contains("0 -> 1"), "minimizer escapes the cylinder:\n{table}");
    let report = std::fs::read_to_string(dir.join("defeat_report.json")).unwrap();
    assert!(report.contains("\"within_bound\": true"));
}

#[test]
fn cycle_run_on_the_cycle_family_doubles_shares() {
    let dir = tempdir("cycles");
    let out = permlab(
        &[
            "run", "--strategy", "cycle", "--table", "cycles", "--maxlen", "3", "--out", ".",
        ],
        &dir,
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    // 1 + 1/4 + 1/9 initial; 8 + 1 + 2/9 after three winning doublings.
    assert!(stdout.contains("initial 49/36"), "{stdout}");
    assert!(stdout.contains("sup 83/9"), "{stdout}");
}

#[test]
fn subgame_runs_as_a_game_and_logs_queries() {
    let dir = tempdir("subgame");
    let out = permlab(
        &[
            "run", "--strategy", "subgame:1,0", "--table", "random", "--seed", "3", "--maxlen",
            "3", "--out", ".", "--format", "json",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(dir.join("querylog.json")).unwrap();
    assert!(log.contains("\"query\": \"000\""));
}

#[test]
fn derive_language_writes_the_prefix() {
    let dir = tempdir("lang");
    let out = permlab(
        &["derive-language", "--table", "identity", "--maxlen", "3", "--out", "."],
        &dir,
    );
    assert!(out.status.success());
    let lang = std::fs::read_to_string(dir.join("language.txt")).unwrap();
    assert_eq!(lang, "000");
}
