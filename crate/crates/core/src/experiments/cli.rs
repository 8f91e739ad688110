//! Argument parsing and dispatch for the `zeno` binary.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure inside a
//! solver, 3 optimization did not converge (output is still written).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::files::{read_json, to_json, write_json};
use super::{
    meta_path, mixed, oracle_query, run_optimize, run_verify, sweep, write_csv, CsvMeta, MixedSpec,
    OracleMode, ProblemFile, SweepSpec, VERSION,
};
use crate::channel::MeasurementSequence;
use crate::error::{Error, Result};
use crate::optimizer::{OptimizerConfig, Restriction};

/// Caps the worker threads used for restarts, sweep cells and trials.
pub const THREADS_ENV: &str = "ZENO_THREADS";

pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Optimize and verify measurement-only state transfer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize the transfer fidelity for a problem file.
    Optimize(OptimizeArgs),
    /// Check the optimality conditions of a given sequence.
    Verify(VerifyArgs),
    /// Compare N-level optima with the two-level oracle.
    Sweep(SweepArgs),
    /// Restricted vs unrestricted optima for random mixed states.
    Mixed(MixedArgs),
    /// Print the two-level optimal value.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    pub restarts: usize,
    /// Base seed; restart r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = OptimizerConfig::default().grad_tol)]
    pub tol_grad: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().step_init)]
    pub step_init: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().armijo_c)]
    pub armijo_c: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().armijo_shrink)]
    pub armijo_shrink: f64,
}

impl TuningArgs {
    pub fn config(&self, restriction: Restriction) -> OptimizerConfig {
        OptimizerConfig {
            max_iters: self.max_iters,
            grad_tol: self.tol_grad,
            restarts: self.restarts,
            base_seed: self.seed,
            step_init: self.step_init,
            armijo_c: self.armijo_c,
            armijo_shrink: self.armijo_shrink,
            restriction,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// none, block or embedded2.
    #[arg(long, default_value = "none")]
    pub restrict: Restriction,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time (makes the output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub sequence: PathBuf,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Fill the `seconds` column (makes the output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct MixedArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,
    #[arg(long, value_enum, default_value_t = OracleMode::Formula)]
    pub mode: OracleMode,
    #[arg(long, default_value_t = 180)]
    pub resolution: usize,
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // Fails only if a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Mixed(args) => cmd_mixed(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", to_json(value)?);
            Ok(())
        }
    }
}

fn load_problem(path: &Path) -> Result<ProblemFile> {
    read_json(path).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Json(inner) => Error::invalid(format!("{}: malformed JSON: {inner}", path.display())),
        Error::Io(inner) => Error::invalid(format!("{}: {inner}", path.display())),
        other => other,
    }
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<i32> {
    let file = load_problem(&args.problem)?;
    let config = args.tuning.config(args.restrict);
    let result = run_optimize(&file, &config, args.timing)?;
    emit(args.out.as_deref(), &result)?;
    let converged = result.per_restart.iter().filter(|r| r.converged).count();
    eprintln!(
        "best objective {:.12} ({converged}/{} restarts converged)",
        result.best_objective,
        result.per_restart.len()
    );
    Ok(if converged == 0 { EXIT_NOT_CONVERGED } else { 0 })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let file = load_problem(&args.problem)?;
    let seq: MeasurementSequence = read_json(&args.sequence).map_err(|e| with_path(e, &args.sequence))?;
    let report = run_verify(&file, &seq)?;
    emit(args.out.as_deref(), &report)?;
    eprintln!(
        "objective {:.12}, chain residual {:.3e}",
        report.objective, report.report.chain_residual
    );
    Ok(0)
}

fn write_meta<T: Serialize>(csv: &Path, command: &str, spec: &T) -> Result<()> {
    write_json(&meta_path(csv), &CsvMeta { version: VERSION, command, spec })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let spec = SweepSpec {
        ns: args.n.clone(),
        ms: args.m.clone(),
        overlap: args.overlap,
        config: args.tuning.config(Restriction::None),
        timing: args.timing,
    };
    let rows = sweep(&spec)?;
    write_csv(&args.out, &rows)?;
    write_meta(&args.out, "sweep", &spec)?;
    let worst = rows.iter().map(|r| r.gap.abs()).fold(0.0, f64::max);
    eprintln!("{} cells, max |gap| {worst:.3e}", rows.len());
    let stuck = rows.iter().any(|r| r.restarts_converged == 0);
    Ok(if stuck { EXIT_NOT_CONVERGED } else { 0 })
}

pub fn cmd_mixed(args: &MixedArgs) -> Result<i32> {
    let spec = MixedSpec {
        n: args.n,
        m: args.m,
        trials: args.trials,
        base_seed: args.tuning.seed,
        config: args.tuning.config(Restriction::None),
    };
    let report = mixed(&spec)?;
    write_csv(&args.out, &report.rows)?;
    write_meta(&args.out, "mixed", &spec)?;
    println!("max |j_full - j_restricted| = {:e}", report.max_abs_gap);
    Ok(if report.unconverged_trials > 0 { EXIT_NOT_CONVERGED } else { 0 })
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<i32> {
    let report = oracle_query(args.m, args.overlap, args.mode, args.resolution)?;
    emit(None, &report)?;
    Ok(0)
}
