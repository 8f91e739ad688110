//! Gradient ascent of the transfer objective over sequences of unitaries.
//!
//! Every iteration moves all measurement bases at once, `U_k ← exp(−t·D_k) U_k`,
//! where `D` is a Polak–Ribière conjugate direction built from the Riemannian
//! gradient `X_k = C_k − C_{k−1}`, and picks the step `t` by Armijo
//! backtracking on the true objective. Restarts begin from Haar-random
//! sequences and run independently; the best one wins.
//!
//! Restricted modes keep every iterate inside a subgroup by projecting `X_k`
//! onto its Lie algebra before exponentiating:
//!
//! - [`Restriction::Block`]: U(2) ⊕ U(N−2)
//! - [`Restriction::Embedded2`]: U(2) ⊕ I

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ControlProblem, MeasurementSequence, UnitaryMatrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{expm_skew, orthonormalize_columns, ComplexMatrix, ZERO};
use crate::optimality::{chain_report, subspace_leakage, Ladder, StationarityReport};

/// States must be supported on the leading two levels within this tolerance
/// for the restricted modes.
pub const SUPPORT_TOL: f64 = 1e-10;

const MAX_STEP: f64 = 1e4;
const MIN_STEP: f64 = 1e-20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restriction {
    #[default]
    None,
    Block,
    Embedded2,
}

impl Restriction {
    pub const ALL: [Restriction; 3] = [Restriction::None, Restriction::Block, Restriction::Embedded2];

    /// Zeroes the entries of `x` outside the subgroup's Lie algebra.
    fn project(self, x: &mut ComplexMatrix) {
        if self == Restriction::None {
            return;
        }
        let n = x.dim();
        for i in 0..n {
            for j in 0..n {
                let cross = (i < 2) != (j < 2);
                let trailing = i >= 2 && j >= 2;
                if cross || (trailing && self == Restriction::Embedded2) {
                    x[(i, j)] = ZERO;
                }
            }
        }
    }

    fn sample<R: rand::Rng>(self, n: usize, rng: &mut R) -> UnitaryMatrix {
        if self == Restriction::None || n <= 2 {
            return UnitaryMatrix::haar(n, rng);
        }
        let head = UnitaryMatrix::haar(2, rng);
        let tail = match self {
            Restriction::Block => UnitaryMatrix::haar(n - 2, rng),
            _ => UnitaryMatrix::identity(n - 2),
        };
        UnitaryMatrix::direct_sum(&head, &tail)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Restriction::None => "none",
            Restriction::Block => "block",
            Restriction::Embedded2 => "embedded2",
        })
    }
}

impl FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Restriction::None),
            "block" => Ok(Restriction::Block),
            "embedded2" => Ok(Restriction::Embedded2),
            other => Err(Error::invalid(format!("unknown restriction {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Convergence threshold on `max_k ‖X_k‖_F`.
    pub grad_tol: f64,
    pub restarts: usize,
    pub base_seed: u64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub restriction: Restriction,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-9,
            restarts: 16,
            base_seed: 0,
            step_init: 0.5,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            restriction: Restriction::None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::invalid("max_iters and restarts must be positive"));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("step_init", self.step_init),
            ("armijo_c", self.armijo_c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(Error::invalid(format!(
                "armijo_shrink must lie in (0, 1), got {}",
                self.armijo_shrink
            )));
        }
        Ok(())
    }

    fn check_problem(&self, problem: &ControlProblem) -> Result<()> {
        self.validate()?;
        if self.restriction != Restriction::None && !problem.supported_in_leading_pair(SUPPORT_TOL) {
            return Err(Error::invalid(format!(
                "restriction {} needs both states supported in span{{|1⟩, |2⟩}}",
                self.restriction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub objective: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RestartOutcome {
    pub summary: RestartSummary,
    pub sequence: MeasurementSequence,
}

/// Snapshot handed to the observer of [`run_restart`] before each step.
pub struct IterationEvent<'a> {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// Step size the line search starts from.
    pub step: f64,
    pub unitaries: &'a [UnitaryMatrix],
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub best_objective: f64,
    pub best_sequence: MeasurementSequence,
    pub per_restart: Vec<RestartSummary>,
    pub report: StationarityReport,
    /// Per-unitary leakage of the best sequence; empty for N = 2.
    pub leakage: Vec<f64>,
    pub wall_time: f64,
}

impl OptimizationResult {
    pub fn restarts_converged(&self) -> usize {
        self.per_restart.iter().filter(|r| r.converged).count()
    }

    pub fn max_leakage(&self) -> Option<f64> {
        self.leakage.iter().copied().reduce(f64::max)
    }
}

fn max_norm(xs: &[ComplexMatrix]) -> f64 {
    xs.iter().map(|x| x.frobenius_norm()).fold(0.0, f64::max)
}

fn sum_sq(xs: &[ComplexMatrix]) -> f64 {
    xs.iter().map(|x| x.frobenius_norm().powi(2)).sum()
}

/// Real Frobenius inner product summed over the sequence.
fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.entries().iter().zip(y.entries()).map(|(p, q)| (p.conj() * q).re).sum::<f64>())
        .sum()
}

fn projected_gradient(ladder: &Ladder, restriction: Restriction) -> Vec<ComplexMatrix> {
    let mut xs = ladder.gradient();
    for x in &mut xs {
        restriction.project(x);
    }
    xs
}

/// `U_k ← exp(−step·X_k) U_k`.
fn update(us: &[UnitaryMatrix], xs: &[ComplexMatrix], step: f64) -> Result<Vec<UnitaryMatrix>> {
    us.iter()
        .zip(xs)
        .map(|(u, x)| {
            let rot = expm_skew(&x.scale_real(-step))?;
            // Unitarity drift shows up in J at the same order, so clean up every step.
            let next = orthonormalize_columns(&(&rot * u.matrix()))
                .ok_or_else(|| Error::invalid("iterate lost rank during re-orthonormalization"))?;
            Ok(UnitaryMatrix::from_trusted(next))
        })
        .collect()
}

/// One simultaneous unrestricted ascent step of size `step`.
pub fn ascent_step(
    seq: &MeasurementSequence,
    problem: &ControlProblem,
    step: f64,
) -> Result<(MeasurementSequence, f64)> {
    check_dim(problem.dim, seq.dim())?;
    let rho = problem.initial.matrix();
    let theta = problem.target.matrix();
    let ladder = Ladder::new(seq.unitaries(), rho, theta);
    let next = update(seq.unitaries(), &ladder.gradient(), step)?;
    let j = Ladder::new(&next, rho, theta).objective();
    Ok((MeasurementSequence::new(seq.dim(), next)?, j))
}

/// Runs one restart from the Haar-random sequence drawn with `seed`.
pub fn run_restart(
    problem: &ControlProblem,
    config: &OptimizerConfig,
    seed: u64,
    mut observer: impl FnMut(&IterationEvent<'_>),
) -> Result<RestartOutcome> {
    config.check_problem(problem)?;
    let n = problem.dim;
    let rho = problem.initial.matrix();
    let theta = problem.target.matrix();
    let restriction = config.restriction;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut us: Vec<UnitaryMatrix> = (0..problem.m).map(|_| restriction.sample(n, &mut rng)).collect();
    let ladder = Ladder::new(&us, rho, theta);
    let mut j = ladder.objective();
    let mut xs = projected_gradient(&ladder, restriction);
    let mut dir = xs.clone();
    let mut step = config.step_init;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < config.max_iters {
        let gnorm = max_norm(&xs);
        observer(&IterationEvent { iteration: iterations, objective: j, grad_norm: gnorm, step, unitaries: &us });
        if gnorm < config.grad_tol {
            converged = true;
            break;
        }
        let g2 = sum_sq(&xs);
        let slope = inner(&dir, &xs);
        // Below this the objective cannot resolve an ascent step.
        let noise = 64.0 * f64::EPSILON * j.abs().max(1.0);
        loop {
            let trial = update(&us, &dir, step)?;
            let trial_ladder = Ladder::new(&trial, rho, theta);
            let jt = trial_ladder.objective();
            let trial_xs = projected_gradient(&trial_ladder, restriction);
            let gain = if step * slope >= noise {
                jt - j
            } else if jt >= j - noise {
                // dJ/dt along the line is <D, X(t)>, which stays resolvable
                // long after differences of J do; integrate it instead.
                0.5 * step * (slope + inner(&dir, &trial_xs))
            } else {
                f64::NEG_INFINITY
            };
            let mut accepted = None;
            let mut next_step = step;
            if gain >= config.armijo_c * step * slope {
                accepted = Some(trial_xs);
                // Gain relative to the linear prediction; along a concave
                // quadratic it is 1 − t/(2 t_opt), so aim the next search at t_opt.
                let ratio = gain / (step * slope);
                next_step = if ratio < 1.0 {
                    (step / (2.0 * (1.0 - ratio))).min(step / config.armijo_shrink)
                } else {
                    step / config.armijo_shrink
                };
            }
            if let Some(trial_xs) = accepted {
                // Polak–Ribière+ with directions carried over unchanged in
                // the left-trivialized frame.
                let beta = (inner(&trial_xs, &trial_xs) - inner(&trial_xs, &xs)) / g2;
                dir = if beta > 0.0 {
                    trial_xs.iter().zip(&dir).map(|(x, d)| x + &d.scale_real(beta)).collect()
                } else {
                    trial_xs.clone()
                };
                if inner(&dir, &trial_xs) <= 0.0 {
                    dir = trial_xs.clone();
                }
                us = trial;
                j = jt;
                xs = trial_xs;
                iterations += 1;
                step = next_step.clamp(MIN_STEP, MAX_STEP);
                break;
            }
            step *= config.armijo_shrink;
            if step < MIN_STEP {
                if dir == xs {
                    break 'outer;
                }
                dir = xs.clone();
                step = config.step_init;
                continue 'outer;
            }
        }
    }
    if !converged && iterations == config.max_iters && max_norm(&xs) < config.grad_tol {
        converged = true;
    }

    Ok(RestartOutcome {
        summary: RestartSummary {
            seed,
            objective: j,
            iterations,
            final_grad_norm: max_norm(&xs),
            converged,
        },
        sequence: MeasurementSequence::new(n, us)?,
    })
}

/// Multi-restart maximization of the objective.
///
/// Restart `r` uses seed `base_seed + r`. Restarts may run on any number of
/// threads; the aggregation is ordered by restart index, and ties go to the
/// lower index.
pub fn optimize(problem: &ControlProblem, config: &OptimizerConfig) -> Result<OptimizationResult> {
    config.check_problem(problem)?;
    let start = Instant::now();
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, config, config.base_seed.wrapping_add(r as u64), |_| {}))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.summary.objective > outcomes[best].summary.objective {
            best = i;
        }
    }
    let best_sequence = outcomes[best].sequence.clone();
    let report = chain_report(&best_sequence, problem)?;
    let leakage = if problem.dim >= 3 {
        best_sequence.unitaries().iter().map(subspace_leakage).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(OptimizationResult {
        best_objective: outcomes[best].summary.objective,
        best_sequence,
        per_restart: outcomes.into_iter().map(|o| o.summary).collect(),
        report,
        leakage,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionComparison {
    pub j_full: f64,
    pub j_block: f64,
    pub j_embedded: f64,
    pub gap_full_vs_embedded: f64,
    #[serde(skip)]
    pub runs: Vec<OptimizationResult>,
}

/// Optimizes under every restriction with identical seeds.
pub fn compare_restricted(
    problem: &ControlProblem,
    config: &OptimizerConfig,
) -> Result<RestrictionComparison> {
    for (name, s) in [("initial", &problem.initial), ("target", &problem.target)] {
        if (s.purity() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("{name} state must be pure")));
        }
    }
    let runs = Restriction::ALL
        .iter()
        .map(|&restriction| optimize(problem, &OptimizerConfig { restriction, ..config.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let (j_full, j_block, j_embedded) =
        (runs[0].best_objective, runs[1].best_objective, runs[2].best_objective);
    Ok(RestrictionComparison {
        j_full,
        j_block,
        j_embedded,
        gap_full_vs_embedded: j_full - j_embedded,
        runs,
    })
}
