//! On-disk formats: problem, sequence, result and verification files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::{basis_pure_state, ControlProblem, DensityMatrix, MeasurementSequence};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::optimality::{StationarityReport, TauStructureReport};
use crate::optimizer::{OptimizationResult, OptimizerConfig, RestartSummary};

/// Build identifier embedded in every output.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// A state as written in a problem file. Basis indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Basis { index: usize },
    Pure { vector: Vec<[f64; 2]> },
    Mixed { matrix: ComplexMatrix },
}

impl StateSpec {
    pub fn to_density(&self, n: usize) -> Result<DensityMatrix> {
        match self {
            StateSpec::Basis { index } => basis_pure_state(n, *index),
            StateSpec::Pure { vector } => {
                if vector.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: vector.len() });
                }
                let psi: Vec<C64> = vector.iter().map(|&[re, im]| C64::new(re, im)).collect();
                DensityMatrix::pure(&psi)
            }
            StateSpec::Mixed { matrix } => {
                if matrix.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: matrix.dim() });
                }
                DensityMatrix::new(matrix.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub initial: StateSpec,
    pub target: StateSpec,
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<ControlProblem> {
        if self.n < 2 {
            return Err(Error::invalid(format!("n must be at least 2, got {}", self.n)));
        }
        ControlProblem::new(self.m, self.initial.to_density(self.n)?, self.target.to_density(self.n)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultFile {
    pub version: String,
    pub problem: ProblemFile,
    pub config: OptimizerConfig,
    pub best_objective: f64,
    pub best_sequence: MeasurementSequence,
    pub per_restart: Vec<RestartSummary>,
    pub report: StationarityReport,
    pub leakage: Vec<f64>,
    /// Only recorded on request, so that reruns stay byte-identical.
    pub wall_time: Option<f64>,
}

impl ResultFile {
    pub fn new(problem: ProblemFile, config: OptimizerConfig, result: OptimizationResult, timing: bool) -> Self {
        Self {
            version: VERSION.to_owned(),
            problem,
            config,
            best_objective: result.best_objective,
            best_sequence: result.best_sequence,
            per_restart: result.per_restart,
            report: result.report,
            leakage: result.leakage,
            wall_time: timing.then_some(result.wall_time),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyFile {
    pub version: String,
    pub problem: ProblemFile,
    pub objective: f64,
    pub report: StationarityReport,
    /// One entry per cut `k = 1 … m`; empty for N = 2.
    pub tau: Vec<TauStructureReport>,
    /// One entry per unitary; empty for N = 2.
    pub leakage: Vec<f64>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(Error::from)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
