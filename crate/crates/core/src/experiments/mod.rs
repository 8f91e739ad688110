//! Experiment runners behind the `zeno` command line tool.
//!
//! Everything here returns plain data; [`cli`] decides where it goes.

pub mod cli;
pub mod files;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::channel::{objective, ControlProblem, DensityMatrix, MeasurementSequence, UnitaryMatrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::optimality::{chain_report, subspace_leakage, tau_structure};
use crate::optimizer::{optimize, OptimizerConfig, Restriction};
use crate::oracle::{gamma_from_overlap, grid_search_value, optimal_value};

pub use files::{ProblemFile, ResultFile, StateSpec, VerifyFile, VERSION};

pub fn run_optimize(file: &ProblemFile, config: &OptimizerConfig, timing: bool) -> Result<ResultFile> {
    let problem = file.to_problem()?;
    let result = optimize(&problem, config)?;
    Ok(ResultFile::new(file.clone(), config.clone(), result, timing))
}

/// Reports how close `seq` is to satisfying the optimality conditions.
pub fn run_verify(file: &ProblemFile, seq: &MeasurementSequence) -> Result<VerifyFile> {
    let problem = file.to_problem()?;
    check_dim(problem.dim, seq.dim())?;
    if seq.len() != problem.m {
        return Err(Error::invalid(format!(
            "problem expects {} measurements, sequence has {}",
            problem.m,
            seq.len()
        )));
    }
    let report = chain_report(seq, &problem)?;
    let (tau, leakage) = if problem.dim >= 3 {
        (
            (1..=problem.m).map(|k| tau_structure(seq, &problem, k)).collect::<Result<_>>()?,
            seq.unitaries().iter().map(subspace_leakage).collect::<Result<_>>()?,
        )
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(VerifyFile {
        version: VERSION.to_owned(),
        problem: file.clone(),
        objective: objective(seq, &problem)?,
        report,
        tau,
        leakage,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub overlap: f64,
    pub config: OptimizerConfig,
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub overlap: f64,
    pub j_best: f64,
    pub j_oracle: f64,
    /// `j_best − j_oracle`, signed.
    pub gap: f64,
    pub max_chain_residual: f64,
    /// Empty for n = 2.
    pub max_leakage: Option<f64>,
    pub restarts_converged: usize,
    pub seconds: Option<f64>,
}

/// Unrestricted optimization against the two-level oracle for every (n, m).
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if !(0.0..1.0).contains(&spec.overlap) {
        return Err(Error::invalid(format!("overlap {} outside [0, 1)", spec.overlap)));
    }
    if let Some(&n) = spec.ns.iter().find(|&&n| n < 2) {
        return Err(Error::invalid(format!("n must be at least 2, got {n}")));
    }
    spec.config.validate()?;
    let gamma = gamma_from_overlap(spec.overlap)?;
    let cells: Vec<(usize, usize)> =
        spec.ns.iter().flat_map(|&n| spec.ms.iter().map(move |&m| (n, m))).collect();
    cells
        .into_par_iter()
        .map(|(n, m)| {
            let start = Instant::now();
            let problem = ControlProblem::with_overlap(n, m, spec.overlap)?;
            let result = optimize(&problem, &spec.config)?;
            let j_oracle = optimal_value(m, gamma)?;
            Ok(SweepRow {
                n,
                m,
                overlap: spec.overlap,
                j_best: result.best_objective,
                j_oracle,
                gap: result.best_objective - j_oracle,
                max_chain_residual: result.report.chain_residual,
                max_leakage: result.max_leakage(),
                restarts_converged: result.restarts_converged(),
                seconds: spec.timing.then(|| start.elapsed().as_secs_f64()),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedSpec {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub config: OptimizerConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedTrialRow {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "joined")]
    pub spectrum_initial: Vec<f64>,
    #[serde(serialize_with = "joined")]
    pub spectrum_target: Vec<f64>,
    pub j_full: f64,
    pub j_restricted: f64,
    pub gap: f64,
    pub seed: u64,
}

fn joined<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let parts: Vec<String> = values.iter().map(f64::to_string).collect();
    s.serialize_str(&parts.join(";"))
}

#[derive(Clone, Debug)]
pub struct MixedReport {
    pub rows: Vec<MixedTrialRow>,
    pub max_abs_gap: f64,
    /// Trials where either optimization had no converged restart.
    pub unconverged_trials: usize,
}

/// Random state of rank ≤ 2 supported in span{|1⟩, |2⟩}, with its spectrum
/// in descending order.
pub fn random_supported_state<R: Rng>(n: usize, rng: &mut R) -> Result<(DensityMatrix, Vec<f64>)> {
    if n < 2 {
        return Err(Error::invalid("need at least two levels"));
    }
    let p: f64 = rng.random_range(0.5..=1.0);
    let spectrum = vec![p, 1.0 - p];
    let v = UnitaryMatrix::haar(2, rng);
    let block = ComplexMatrix::from_real_diag(&spectrum).conjugate_by(v.matrix());
    let rho = DensityMatrix::new(ComplexMatrix::direct_sum(&block, &ComplexMatrix::zeros(n - 2)))?;
    Ok((rho, spectrum))
}

/// Best objective with and without the `U(2) ⊕ I` restriction, using the
/// same restart seeds.
pub fn mixed_trial(problem: &ControlProblem, config: &OptimizerConfig) -> Result<(f64, f64, bool)> {
    let full = optimize(problem, &OptimizerConfig { restriction: Restriction::None, ..config.clone() })?;
    let restricted =
        optimize(problem, &OptimizerConfig { restriction: Restriction::Embedded2, ..config.clone() })?;
    let converged = full.restarts_converged() > 0 && restricted.restarts_converged() > 0;
    Ok((full.best_objective, restricted.best_objective, converged))
}

/// Trial `t` draws its states and restart seeds from `base_seed + t`.
pub fn mixed(spec: &MixedSpec) -> Result<MixedReport> {
    if spec.n < 3 {
        return Err(Error::invalid(format!("mixed trials need n ≥ 3, got {}", spec.n)));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    spec.config.validate()?;
    let results: Vec<(MixedTrialRow, bool)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let seed = spec.base_seed.wrapping_add(t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rho, spectrum_initial) = random_supported_state(spec.n, &mut rng)?;
            let (theta, spectrum_target) = random_supported_state(spec.n, &mut rng)?;
            let problem = ControlProblem::new(spec.m, rho, theta)?;
            let config = OptimizerConfig { base_seed: seed, ..spec.config.clone() };
            let (j_full, j_restricted, converged) = mixed_trial(&problem, &config)?;
            let row = MixedTrialRow {
                n: spec.n,
                m: spec.m,
                spectrum_initial,
                spectrum_target,
                j_full,
                j_restricted,
                gap: j_full - j_restricted,
                seed,
            };
            Ok((row, converged))
        })
        .collect::<Result<_>>()?;
    let max_abs_gap = results.iter().map(|(r, _)| r.gap.abs()).fold(0.0, f64::max);
    let unconverged_trials = results.iter().filter(|(_, c)| !c).count();
    Ok(MixedReport { rows: results.into_iter().map(|(r, _)| r).collect(), max_abs_gap, unconverged_trials })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Formula,
    Grid,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub j_star: f64,
    pub gamma: f64,
    pub mode: OracleMode,
    /// Only meaningful for grid mode.
    pub resolution: Option<usize>,
    pub version: String,
}

pub fn oracle_query(m: usize, overlap: f64, mode: OracleMode, resolution: usize) -> Result<OracleReport> {
    let gamma = gamma_from_overlap(overlap)?;
    let (j_star, resolution) = match mode {
        OracleMode::Formula => (optimal_value(m, gamma)?, None),
        OracleMode::Grid => (grid_search_value(m, gamma, resolution)?, Some(resolution)),
    };
    Ok(OracleReport { j_star, gamma, mode, resolution, version: VERSION.to_owned() })
}

/// Writes `rows` as CSV with a header row in field order.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV files cannot carry provenance, so it goes into `<csv>.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
pub struct CsvMeta<'a, T: Serialize> {
    pub version: &'a str,
    pub command: &'a str,
    pub spec: &'a T,
}
