//! `qprove`: exact checks of the cube-root-of-unity identities and their
//! finite-field counterparts.

mod report;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qprove_core::combinatorics::calibrated_convention;
use qprove_core::gfq::{self, DimensionSequence, FieldCtx, Matrix};
use qprove_core::{Identity, VerificationResult};
use rayon::prelude::*;
use serde_json::{json, Value};

use report::RunReport;

/// Field orders above this need `--allow-large`.
const DESK_Q: u32 = 9;
/// Matrix sizes above this need `--allow-large`.
const DESK_N: usize = 6;
/// Exhaustive sweeps over more matrices than this need `--allow-large`.
const DESK_SWEEP: u64 = 1 << 20;

#[derive(Parser)]
#[command(name = "qprove", version, about = "Exact verification of q-series identities and subspace counts")]
struct Cli {
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, env = "QPROVE_THREADS")]
    threads: Option<usize>,
    /// Lift the desk-scale ceilings on m, q and n.
    #[arg(long, global = true)]
    allow_large: bool,
    /// Report zero elapsed time so JSON output is reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an identity for every parameter from 0 to --max.
    Verify {
        identity: String,
        #[arg(long)]
        max: i64,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Embed both sides of every comparison in the JSON report.
        #[arg(long)]
        emit_polys: bool,
    },
    /// Print the number of subspaces with the given dimension sequence.
    Profile {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<usize>,
    },
    /// Print the number of invariant flags with the given quotient dimensions.
    Flags {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',')]
        parts: Vec<usize>,
    },
    /// Check the (m,m,m) profile formula on matrices in M_3m(F_q).
    Conj5(SweepArgs),
    /// Check the (m,m) profile formula on matrices in M_2m(F_q).
    Eqmm(SweepArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["exhaustive", "trials"]))]
struct SweepArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    m: usize,
    /// Every matrix of the given size.
    #[arg(long)]
    exhaustive: bool,
    /// This many seeded random matrices.
    #[arg(long, requires = "seed")]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// A failure that is the caller's fault; reported with exit code 2.
struct UsageError(String);

impl<E: Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = Result<T, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let start = Instant::now();
    let elapsed = || if cli.no_timing { 0 } else { start.elapsed().as_millis() as u64 };
    match &cli.command {
        Command::Verify {
            identity,
            max,
            json,
            emit_polys,
        } => {
            let id: Identity = identity.parse()?;
            if *max < 0 {
                return Err(UsageError(format!("--max must be non-negative, got {max}")));
            }
            if *max > id.desk_limit() && !cli.allow_large {
                return Err(UsageError(format!(
                    "--max {max} exceeds the desk limit {} for {id}; pass --allow-large",
                    id.desk_limit()
                )));
            }
            let results = qprove_core::verify_range(id.name(), *max)?;
            let mut report = RunReport::new(format!("verify {id} --max {max}"), results);
            report.extras = note_extras(&report.results);
            if id == Identity::Extension {
                let c = calibrated_convention().map_or("none".to_string(), |c| c.to_string());
                report.extras.insert("calibrated_convention".into(), json!(c));
            }
            report.elapsed_millis = elapsed();
            print_results(&report);
            finish(&report, json.as_deref(), *emit_polys)
        }
        Command::Profile { matrix, lambda } => {
            let t = load_matrix(matrix, cli.allow_large)?;
            let seq = DimensionSequence::new(lambda.clone());
            println!("{}", gfq::sigma_count(&t, &seq)?);
            Ok(true)
        }
        Command::Flags { matrix, parts } => {
            let t = load_matrix(matrix, cli.allow_large)?;
            println!("{}", gfq::flag_count(&t, parts)?);
            Ok(true)
        }
        Command::Conj5(args) => sweep(cli, "conj5", 3, args, gfq::verify_conj5, elapsed),
        Command::Eqmm(args) => sweep(cli, "eqmm", 2, args, gfq::verify_eq_mm, elapsed),
    }
}

fn load_matrix(path: &Path, allow_large: bool) -> CliResult<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let ceiling = if allow_large { gfq::FIELD_CEILING } else { DESK_Q };
    let t = Matrix::parse_with_ceiling(&text, ceiling).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    if t.rows() > DESK_N && !allow_large {
        return Err(UsageError(format!(
            "matrix size {} exceeds the desk limit {DESK_N}; pass --allow-large",
            t.rows()
        )));
    }
    Ok(t)
}

fn sweep(
    cli: &Cli,
    name: &str,
    blocks: usize,
    args: &SweepArgs,
    check: fn(&Matrix, usize) -> Result<VerificationResult, gfq::GfError>,
    elapsed: impl Fn() -> u64,
) -> CliResult<bool> {
    let n = blocks * args.m;
    let ceiling = if cli.allow_large { gfq::FIELD_CEILING } else { DESK_Q };
    let ctx = FieldCtx::with_ceiling(args.q, ceiling)?;
    if n > DESK_N && !cli.allow_large {
        return Err(UsageError(format!(
            "matrix size {n} exceeds the desk limit {DESK_N}; pass --allow-large"
        )));
    }
    let (matrices, command, seed) = if args.exhaustive {
        let total = gfq::matrix_space_size(args.q, n)
            .filter(|&t| t <= DESK_SWEEP || cli.allow_large)
            .ok_or_else(|| UsageError(format!("M_{n}(F_{}) is too large to sweep; use --trials", args.q)))?;
        let ms: Vec<Matrix> = (0..total).into_par_iter().map(|i| Matrix::from_index(&ctx, n, i)).collect();
        (ms, format!("{name} --q {} --m {} --exhaustive", args.q, args.m), None)
    } else {
        let trials = args.trials.expect("clap enforces the mode group");
        let seed = args.seed.expect("clap enforces --seed with --trials");
        let ms = gfq::seeded_matrices(&ctx, n, trials, seed);
        (ms, format!("{name} --q {} --m {} --trials {trials} --seed {seed}", args.q, args.m), Some(seed))
    };
    let results: Vec<VerificationResult> = matrices
        .par_iter()
        .map(|t| check(t, args.m))
        .collect::<Result<_, _>>()?;
    let mut report = RunReport::new(command, results);
    report.seed = seed;
    report.extras.insert("matrices".into(), json!(report.results.len()));
    let mut ratios: BTreeMap<String, u64> = BTreeMap::new();
    for r in &report.results {
        if let Some(v) = r.notes.get("sigma_over_rhs") {
            *ratios.entry(v.clone()).or_default() += 1;
        }
    }
    for (k, v) in &ratios {
        report.extras.insert(format!("sigma_over_rhs={k}"), json!(v));
    }
    report.elapsed_millis = elapsed();

    println!(
        "{name} q={} m={}: {} of {} matrices verified",
        args.q,
        args.m,
        report.verified_count(),
        report.results.len()
    );
    for (k, v) in &ratios {
        println!("  sigma/rhs = {k}: {v} matrices");
    }
    if let Some(r) = report.results.iter().find(|r| !r.is_verified()) {
        println!("  first failure: [{}]", r.notes.get("matrix").map_or("", String::as_str));
        if let Some((label, w)) = r.witness() {
            println!("    {label}: {w}");
        }
    }
    finish(&report, args.json.as_deref(), false)
}

/// Pulls scalar diagnostics out of the result notes as `note@params`.
fn note_extras(results: &[VerificationResult]) -> BTreeMap<String, Value> {
    let mut extras = BTreeMap::new();
    for r in results {
        for (k, v) in &r.notes {
            if k == "calibration" {
                continue;
            }
            let value = v.parse::<i64>().map_or_else(|_| json!(v), |n| json!(n));
            let mut key = format!("{k}@{}", r.params_label());
            if let Some(c) = r.notes.get("convention").filter(|_| k != "convention") {
                key.push_str(&format!(" [{c}]"));
            } else if k == "convention" {
                continue;
            }
            extras.insert(key, value);
        }
    }
    extras
}

fn print_results(report: &RunReport) {
    for r in &report.results {
        match r.notes.get("convention") {
            Some(c) => println!("{r} ({c})"),
            None => println!("{r}"),
        }
        if let Some((label, w)) = r.witness() {
            println!("  {label}: {w}");
        }
    }
    println!(
        "{} of {} results verified",
        report.verified_count(),
        report.results.len()
    );
}

fn finish(report: &RunReport, json_path: Option<&Path>, include_sides: bool) -> CliResult<bool> {
    if let Some(path) = json_path {
        let mut text = serde_json::to_string_pretty(&report.to_json(include_sides))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    }
    Ok(report.success())
}
