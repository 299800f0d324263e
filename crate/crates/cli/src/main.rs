//! permlab: batch experiments on permutation martingales and betting
//! games. Run strategies against tables, diagonalize, audit the
//! brute-force invariants, and emit CSV/JSON reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use permlab_core::betting::{
    from_martingale, halfrange_event_subgame, run_betting_game, witness_bettor, SharedGame,
};
use permlab_core::diagonal::{defeat_betting_game, defeat_martingale};
use permlab_core::error::PermLabError;
use permlab_core::export::{
    defeat_report_to_json, querylog_to_csv, querylog_to_json, trajectory_to_csv,
    trajectory_to_json,
};
use permlab_core::martingale::{
    approx_wrap, cycle_martingale, cylinder_martingale, figure1_martingale,
    likelihood_ratio_martingale, run_martingale, ConstantMartingale, HalfrangeEventOracle,
    NoiseMode, SharedMartingale,
};
use permlab_core::permspace::{
    cylinder_measure, enumerate_permutations, FinitePermutation, PrefixPartialPermutation,
};
use permlab_core::rational::ExactRational;
use permlab_core::strings::BinaryString;
use permlab_core::testlang::{halfrange_member, polyhrng_member};
use permlab_core::transfer::{
    derived_language_prefix, transfer_martingale, ClassicalConstant,
};
use permlab_core::verify::{run_scope, Scope, VerifyConfig};

/// Brute-force guard override for the exhaustive verify scopes; values are
/// clamped to the library ceiling of 3.
const MAX_ENUM_ENV: &str = "PERMLAB_MAX_ENUM_LEN";

#[derive(Parser)]
#[command(
    name = "permlab",
    version,
    about = "Exact martingales and betting games on length-preserving permutations"
)]
struct Cli {
    /// Maximum string length for tables and constructions.
    #[arg(long, global = true)]
    maxlen: Option<u32>,

    /// Seed for random tables and sampled audits.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for report files; defaults to the working directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a strategy against a table and export the trajectory.
    Run(RunArgs),
    /// Run the brute-force audit suites.
    Verify(VerifyArgs),
    /// Construct a table that defeats a strategy.
    Diagonalize(DiagArgs),
    /// Exact cylinder measure of a prefix, optionally brute-forced.
    Measure(MeasureArgs),
    /// Emit the derived-language prefix of a table.
    DeriveLanguage(TableOnlyArgs),
    /// Half-range membership queries against a table.
    Halfrange(HalfrangeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// constant[:v], figure1, cycle[:shares], cylinder:<images>,
    /// likelihood[:n,k], transfer1, subgame[:n,k], witness (with
    /// --candidates).
    #[arg(long)]
    strategy: String,

    /// identity | cycles | random | file:PATH (.json or text format).
    #[arg(long, default_value = "identity")]
    table: String,

    /// Query budget for betting games.
    #[arg(long, default_value_t = 4096)]
    budget: usize,

    /// Run a martingale through the adaptive-game runner instead.
    #[arg(long)]
    as_game: bool,

    /// Witness-bettor candidates: "x,y;x,y;…".
    #[arg(long)]
    candidates: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// figure1 | measure | averaging | conservation | game-conservation |
    /// kraft | ville | defeat | parity | subgame | transfer | adapter | all
    #[arg(long, default_value = "all")]
    scope: String,

    #[arg(long, default_value_t = 1000)]
    kraft_samples: usize,

    #[arg(long, default_value_t = 100)]
    ville_samples: usize,

    #[arg(long, default_value_t = 10_000)]
    parity_samples: usize,
}

#[derive(Args)]
struct DiagArgs {
    /// Strategy selector, as in `run`.
    #[arg(long)]
    strategy: String,

    /// Diagonalize against a noisy 2n-bit approximation instead of exact
    /// values (martingales only).
    #[arg(long)]
    noisy: bool,

    /// Honesty bound for betting games: "n", "3n", or a constant.
    #[arg(long, default_value = "n")]
    honesty: String,

    #[arg(long)]
    candidates: Option<String>,
}

#[derive(Args)]
struct MeasureArgs {
    /// Comma-separated image list, λ for the empty string: "λ,0,1,11".
    #[arg(long)]
    prefix: String,

    /// Check the formula against exhaustive enumeration.
    #[arg(long)]
    brute_force: bool,
}

#[derive(Args)]
struct TableOnlyArgs {
    #[arg(long, default_value = "identity")]
    table: String,
}

#[derive(Args)]
struct HalfrangeArgs {
    #[arg(long, default_value = "identity")]
    table: String,

    /// The string whose membership is queried.
    #[arg(long)]
    x: String,

    #[arg(long, default_value_t = 1)]
    k: u32,

    /// Query POLYHRNG_k instead of HALFRANGE_k.
    #[arg(long)]
    poly: bool,
}

enum Strategy {
    Martingale(SharedMartingale),
    Game(SharedGame),
}

fn parse_prefix(text: &str) -> Result<PrefixPartialPermutation, PermLabError> {
    let values: Result<Vec<BinaryString>, _> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect();
    PrefixPartialPermutation::from_values(values?)
}

fn parse_candidates(
    text: &str,
) -> Result<std::collections::BTreeSet<(BinaryString, BinaryString)>, PermLabError> {
    let mut out = std::collections::BTreeSet::new();
    for pair in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (x, y) = pair.split_once(',').ok_or_else(|| {
            PermLabError::InvalidArgument(format!("candidate {pair:?} is not \"x,y\""))
        })?;
        out.insert((x.trim().parse()?, y.trim().parse()?));
    }
    Ok(out)
}

fn parse_strategy(
    name: &str,
    maxlen: u32,
    candidates: Option<&str>,
) -> Result<Strategy, PermLabError> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (name, None),
    };
    let strategy = match kind {
        "constant" => {
            let value = match arg {
                Some(a) => a.parse::<ExactRational>()?,
                None => ExactRational::one(),
            };
            Strategy::Martingale(Arc::new(ConstantMartingale::new(value)))
        }
        "figure1" => Strategy::Martingale(figure1_martingale()),
        "cycle" => {
            let shares = match arg {
                Some(a) => a.parse::<u64>().map_err(|e| {
                    PermLabError::InvalidArgument(format!("bad share count: {e}"))
                })?,
                None => maxlen as u64,
            };
            Strategy::Martingale(cycle_martingale(shares.max(1)))
        }
        "cylinder" => {
            let spec = arg.ok_or_else(|| {
                PermLabError::InvalidArgument("cylinder needs images, e.g. cylinder:λ,0".into())
            })?;
            Strategy::Martingale(cylinder_martingale(parse_prefix(spec)?))
        }
        "likelihood" => {
            let (n, k) = parse_nk(arg)?;
            let oracle = Arc::new(HalfrangeEventOracle { n, k });
            Strategy::Martingale(likelihood_ratio_martingale(
                oracle,
                PrefixPartialPermutation::empty(),
            )?)
        }
        "transfer1" => Strategy::Martingale(transfer_martingale(Arc::new(ClassicalConstant(
            ExactRational::one(),
        )))),
        "subgame" => {
            let (n, k) = parse_nk(arg)?;
            Strategy::Game(halfrange_event_subgame(n, k, ExactRational::one())?)
        }
        "witness" => {
            let spec = candidates.ok_or_else(|| {
                PermLabError::InvalidArgument(
                    "witness needs --candidates \"x,y;x,y;…\"".into(),
                )
            })?;
            let (n, k) = parse_nk(arg)?;
            Strategy::Game(witness_bettor(n, k, ExactRational::one(), parse_candidates(spec)?)?)
        }
        other => {
            return Err(PermLabError::InvalidArgument(format!(
                "unknown strategy {other:?}"
            )))
        }
    };
    Ok(strategy)
}

fn parse_nk(arg: Option<&str>) -> Result<(usize, usize), PermLabError> {
    match arg {
        None => Ok((1, 0)),
        Some(a) => {
            let (n, k) = a.split_once(',').ok_or_else(|| {
                PermLabError::InvalidArgument(format!("expected n,k — got {a:?}"))
            })?;
            let parse = |s: &str| {
                s.trim().parse::<usize>().map_err(|e| {
                    PermLabError::InvalidArgument(format!("bad parameter {s:?}: {e}"))
                })
            };
            Ok((parse(n)?, parse(k)?))
        }
    }
}

fn load_table(spec: &str, maxlen: u32, seed: u64) -> Result<FinitePermutation, PermLabError> {
    match spec {
        "identity" => Ok(FinitePermutation::identity(maxlen)),
        "cycles" => Ok(FinitePermutation::single_cycles(maxlen)),
        "random" => Ok(FinitePermutation::random(maxlen, seed)),
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                PermLabError::InvalidArgument(format!(
                    "unknown table {other:?}; use identity, cycles, random, or file:PATH"
                ))
            })?;
            let text = fs::read_to_string(path)?;
            if path.ends_with(".json") {
                FinitePermutation::from_json(&text)
            } else {
                FinitePermutation::from_text(&text)
            }
        }
    }
}

fn parse_honesty(spec: &str) -> Result<Box<dyn Fn(usize) -> usize>, PermLabError> {
    match spec {
        "n" => Ok(Box::new(|n| n)),
        "3n" => Ok(Box::new(|n| 3 * n)),
        other => {
            let c: usize = other.parse().map_err(|e| {
                PermLabError::InvalidArgument(format!("bad honesty bound {other:?}: {e}"))
            })?;
            Ok(Box::new(move |_| c))
        }
    }
}

fn write_report(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, PermLabError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn effective_enum_len(maxlen: Option<u32>) -> u32 {
    let env = std::env::var(MAX_ENUM_ENV)
        .ok()
        .and_then(|v| v.parse::<u32>().ok());
    maxlen.or(env).unwrap_or(2).min(3)
}

fn real_main(cli: Cli) -> Result<bool, PermLabError> {
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let json = cli.format == "json";
    match &cli.command {
        Command::Run(args) => {
            if args.budget == 0 {
                return Err(PermLabError::InvalidArgument(
                    "budget must be positive".into(),
                ));
            }
            let maxlen = cli.maxlen.unwrap_or(2);
            let table = load_table(&args.table, maxlen, cli.seed)?;
            let strategy =
                parse_strategy(&args.strategy, maxlen, args.candidates.as_deref())?;
            match (strategy, args.as_game) {
                (Strategy::Martingale(d), false) => {
                    let traj = run_martingale(d.as_ref(), &table)?;
                    let (name, body) = if json {
                        ("trajectory.json", trajectory_to_json(&traj))
                    } else {
                        ("trajectory.csv", trajectory_to_csv(&traj))
                    };
                    let path = write_report(&out_dir, name, &body)?;
                    println!(
                        "{}: initial {} sup {} → {}",
                        traj.strategy,
                        traj.initial_capital,
                        traj.sup_capital,
                        path.display()
                    );
                }
                (Strategy::Martingale(d), true) => {
                    run_game(from_martingale(d), &table, args.budget, &out_dir, json)?;
                }
                (Strategy::Game(g), _) => {
                    run_game(g, &table, args.budget, &out_dir, json)?;
                }
            }
        }
        Command::Verify(args) => {
            let scope = Scope::from_str(&args.scope)?;
            let config = VerifyConfig {
                max_length: effective_enum_len(cli.maxlen),
                kraft_samples: args.kraft_samples,
                ville_samples: args.ville_samples,
                parity_samples: args.parity_samples,
                seed: cli.seed,
                full_transfer_walk: true,
            };
            let outcomes = run_scope(scope, &config)?;
            let mut all_passed = true;
            for outcome in &outcomes {
                println!("{}", outcome.line());
                all_passed &= outcome.passed;
            }
            return Ok(all_passed);
        }
        Command::Diagonalize(args) => {
            let maxlen = cli.maxlen.unwrap_or(3);
            let strategy =
                parse_strategy(&args.strategy, maxlen, args.candidates.as_deref())?;
            let report = match strategy {
                Strategy::Martingale(d) => {
                    let mode = if args.noisy {
                        NoiseMode::Hashed { salt: cli.seed }
                    } else {
                        NoiseMode::Exact
                    };
                    defeat_martingale(approx_wrap(d, mode).as_ref(), maxlen)?
                }
                Strategy::Game(g) => {
                    let honesty = parse_honesty(&args.honesty)?;
                    defeat_betting_game(g.as_ref(), honesty.as_ref(), maxlen)?
                }
            };
            let table_path = write_report(&out_dir, "defeat_table.txt", &report.permutation.to_text())?;
            let json_path =
                write_report(&out_dir, "defeat_report.json", &defeat_report_to_json(&report))?;
            println!(
                "{}: initial {} sup {} within_bound {} → {}, {}",
                report.strategy,
                report.initial_capital,
                report.sup_capital,
                report.within_bound(),
                table_path.display(),
                json_path.display()
            );
        }
        Command::Measure(args) => {
            let g = parse_prefix(&args.prefix)?;
            let measure = cylinder_measure(&g);
            println!("μ(⟨{g}⟩) = {measure}");
            if args.brute_force {
                let maxlen = effective_enum_len(cli.maxlen).max(g.betting_length() as u32);
                let mut hits = 0usize;
                let mut total = 0usize;
                for t in enumerate_permutations(maxlen)? {
                    total += 1;
                    if t.extends(&g) {
                        hits += 1;
                    }
                }
                let freq = ExactRational::ratio(hits as i64, total as i64);
                println!("brute force: {hits}/{total} = {freq}");
                if freq != measure {
                    return Ok(false);
                }
            }
        }
        Command::DeriveLanguage(args) => {
            let maxlen = cli.maxlen.unwrap_or(3);
            let table = load_table(&args.table, maxlen, cli.seed)?;
            let prefix = derived_language_prefix(&table)?;
            let path = write_report(&out_dir, "language.txt", &prefix.to_string())?;
            println!("{prefix} → {}", path.display());
        }
        Command::Halfrange(args) => {
            let maxlen = cli.maxlen.unwrap_or(3);
            let table = load_table(&args.table, maxlen, cli.seed)?;
            let x: BinaryString = args.x.parse()?;
            let member = if args.poly {
                polyhrng_member(&table, &x, args.k as usize)?
            } else {
                halfrange_member(&table, &x, args.k as usize)?
            };
            println!(
                "{x} ∈ {}_{}: {member}",
                if args.poly { "POLYHRNG" } else { "HALFRANGE" },
                args.k
            );
        }
    }
    Ok(true)
}

fn run_game(
    game: SharedGame,
    table: &FinitePermutation,
    budget: usize,
    out_dir: &Path,
    json: bool,
) -> Result<(), PermLabError> {
    let (traj, log) = run_betting_game(game.as_ref(), table, budget)?;
    let (tname, tbody, lname, lbody) = if json {
        (
            "trajectory.json",
            trajectory_to_json(&traj),
            "querylog.json",
            querylog_to_json(&log),
        )
    } else {
        (
            "trajectory.csv",
            trajectory_to_csv(&traj),
            "querylog.csv",
            querylog_to_csv(&log),
        )
    };
    let tpath = write_report(out_dir, tname, &tbody)?;
    let lpath = write_report(out_dir, lname, &lbody)?;
    println!(
        "{}: initial {} sup {} → {}, {}",
        traj.strategy,
        traj.initial_capital,
        traj.sup_capital,
        tpath.display(),
        lpath.display()
    );
    Ok(())
}

/// Exit 0 on a clean run, 1 on a strategy violation or failed audit, 2 on
/// I/O and configuration errors.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                PermLabError::IllegalMove { .. }
                | PermLabError::DishonestBet { .. }
                | PermLabError::InvalidOracle(_)
                | PermLabError::Unsupported(_) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
