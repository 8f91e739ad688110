//! Stationarity and structure diagnostics for measurement sequences.
//!
//! With forward states `F_k = M(U_k)⋯M(U_1) ρ` and backward states
//! `B_k = M(U_{k+1})⋯M(U_m) θ`, the objective is `Tr(F_k B_k)` at every cut.
//! Perturbing `U_k → e^{εA} U_k` with `A` anti-Hermitian gives
//!
//! ```text
//! dJ/dε = Tr(A · X_k),   X_k = C_k − C_{k−1},   C_k = [F_k, B_k]
//! ```
//!
//! so a sequence is stationary exactly when all commutators `C_0 … C_m` are
//! equal. For `ρ = |1⟩⟨1|`, `θ = |2⟩⟨2|` that common value has the canonical
//! form `[[0, c], [−c*, 0]] ⊕ O`.

use serde::Serialize;

use crate::channel::{
    backward_ladder, forward_ladder, ControlProblem, MeasurementSequence, UnitaryMatrix,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{commutator, hermitian_eig, ComplexMatrix, C64, ZERO};

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    /// `C_k = [F_k, B_k]` for `k = 0 … m`.
    pub chain: Vec<ComplexMatrix>,
    /// `max_k ‖C_k − C_{k−1}‖_F`; zero for an empty sequence.
    pub chain_residual: f64,
    /// `‖X_k‖_F` for `k = 1 … m`.
    pub gradient_norms: Vec<f64>,
    /// Largest Frobenius mass of any `C_k` outside its leading 2×2 block.
    pub canonical_offblock: f64,
    /// Entry (1, 2) of `C_m`.
    pub c_value: C64,
    pub objective: f64,
}

impl StationarityReport {
    /// Applies the phase gauge `diag(e^{iψ}, 1, …, 1)` to every `C_k` so that
    /// `c` becomes real and non-negative. Norm-based fields are unchanged.
    pub fn gauge_fixed(&self) -> StationarityReport {
        let n = self.chain.first().map_or(0, |c| c.dim());
        let psi = if self.c_value.norm() > 0.0 { -self.c_value.arg() } else { 0.0 };
        let phase = C64::from_polar(1.0, psi);
        let fix = |c: &ComplexMatrix| {
            ComplexMatrix::from_fn(n, |i, j| {
                let mut z = c[(i, j)];
                if i == 0 {
                    z *= phase;
                }
                if j == 0 {
                    z *= phase.conj();
                }
                z
            })
        };
        StationarityReport {
            chain: self.chain.iter().map(fix).collect(),
            c_value: C64::new(self.c_value.norm(), 0.0),
            ..self.clone()
        }
    }

    pub fn max_gradient_norm(&self) -> f64 {
        self.gradient_norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Forward states, backward states, and commutators for a raw unitary list.
pub(crate) struct Ladder {
    pub forward: Vec<ComplexMatrix>,
    pub backward: Vec<ComplexMatrix>,
    pub chain: Vec<ComplexMatrix>,
}

impl Ladder {
    pub fn new(us: &[UnitaryMatrix], rho: &ComplexMatrix, theta: &ComplexMatrix) -> Self {
        let forward = forward_ladder(us, rho);
        let backward = backward_ladder(us, theta);
        let chain = forward
            .iter()
            .zip(&backward)
            .map(|(f, b)| &(f * b) - &(b * f))
            .collect();
        Self { forward, backward, chain }
    }

    pub fn objective(&self) -> f64 {
        let m = self.forward.len() - 1;
        self.forward[m].trace_product(&self.backward[m]).re
    }

    /// `X_k = C_k − C_{k−1}` for `k = 1 … m`.
    pub fn gradient(&self) -> Vec<ComplexMatrix> {
        self.chain.windows(2).map(|w| &w[1] - &w[0]).collect()
    }
}

fn check_sequence(seq: &MeasurementSequence, problem: &ControlProblem) -> Result<()> {
    check_dim(problem.dim, seq.dim())
}

pub fn chain_report(seq: &MeasurementSequence, problem: &ControlProblem) -> Result<StationarityReport> {
    check_sequence(seq, problem)?;
    let ladder = Ladder::new(seq.unitaries(), problem.initial.matrix(), problem.target.matrix());
    let gradient_norms: Vec<f64> = ladder.gradient().iter().map(|x| x.frobenius_norm()).collect();
    let chain_residual = gradient_norms.iter().copied().fold(0.0, f64::max);
    let block = 2.min(problem.dim);
    let canonical_offblock = ladder
        .chain
        .iter()
        .map(|c| c.mass_outside_leading_block(block))
        .fold(0.0, f64::max);
    let last = ladder.chain.last().expect("chain has m + 1 entries");
    let c_value = if problem.dim >= 2 { last[(0, 1)] } else { ZERO };
    Ok(StationarityReport {
        objective: ladder.objective(),
        chain: ladder.chain,
        chain_residual,
        gradient_norms,
        canonical_offblock,
        c_value,
    })
}

/// Riemannian gradient `X_1 … X_m`: moving `U_k → e^{εA} U_k` changes the
/// objective at rate `Tr(A X_k)`.
pub fn gradient(seq: &MeasurementSequence, problem: &ControlProblem) -> Result<Vec<ComplexMatrix>> {
    check_sequence(seq, problem)?;
    if seq.is_empty() {
        return Err(Error::invalid("gradient needs at least one measurement"));
    }
    let ladder = Ladder::new(seq.unitaries(), problem.initial.matrix(), problem.target.matrix());
    Ok(ladder.gradient())
}

/// How far `B_k` is from the form `D(2) ⊕ d·I^{N−2}`.
#[derive(Clone, Debug, Serialize)]
pub struct TauStructureReport {
    pub k: usize,
    pub block2: ComplexMatrix,
    /// Mean of the trailing `N − 2` diagonal entries.
    pub d_estimate: f64,
    /// `‖B_k − (block2 ⊕ d·I)‖_F` after diagonalizing the trailing block.
    pub deviation: f64,
}

pub fn tau_structure(
    seq: &MeasurementSequence,
    problem: &ControlProblem,
    k: usize,
) -> Result<TauStructureReport> {
    check_sequence(seq, problem)?;
    let n = problem.dim;
    if n < 3 {
        return Err(Error::invalid("backward-state structure needs N ≥ 3"));
    }
    if k == 0 || k > seq.len() {
        return Err(Error::invalid(format!("cut index {k} outside 1..={}", seq.len())));
    }
    let b = &backward_ladder(seq.unitaries(), problem.target.matrix())[k];

    // Rotating within the trailing block is a symmetry, so diagonalize it.
    let w = hermitian_eig(&b.trailing_block(2))?.eigenvectors;
    let g = ComplexMatrix::direct_sum(&ComplexMatrix::identity(2), &w);
    let rotated = &(&g.adjoint() * b) * &g;

    let block2 = rotated.leading_block(2);
    let d_estimate = (2..n).map(|i| rotated[(i, i)].re).sum::<f64>() / (n - 2) as f64;
    let model = ComplexMatrix::direct_sum(
        &block2,
        &ComplexMatrix::identity(n - 2).scale_real(d_estimate),
    );
    Ok(TauStructureReport { k, block2, d_estimate, deviation: rotated.distance(&model) })
}

/// `Σ_i ‖Π P_i Π̄‖_F²` with `P_i = U|i⟩⟨i|U†` and `Π` the projector onto
/// span{|1⟩, |2⟩}. Zero iff every projector lies inside the span or inside
/// its complement, i.e. the measurement decomposes as U(2) ⊕ U(N−2) up to
/// column order and phases.
pub fn subspace_leakage(u: &UnitaryMatrix) -> Result<f64> {
    let n = u.dim();
    if n < 3 {
        return Err(Error::invalid("leakage is defined for N ≥ 3"));
    }
    let m = u.matrix();
    Ok((0..n)
        .map(|i| {
            let inside: f64 = (0..2).map(|r| m[(r, i)].norm_sqr()).sum();
            let outside: f64 = (2..n).map(|r| m[(r, i)].norm_sqr()).sum();
            inside * outside
        })
        .sum())
}

/// `‖s‖`, the coupling of `C_0 = [ρ, M(U_1)⋯M(U_m) θ]` between the leading
/// two levels and the rest. Requires pure `ρ`, `θ` supported on the leading
/// two levels.
pub fn offblock_coupling(seq: &MeasurementSequence, problem: &ControlProblem) -> Result<f64> {
    check_sequence(seq, problem)?;
    for (name, s) in [("initial", &problem.initial), ("target", &problem.target)] {
        if (s.purity() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("{name} state must be pure")));
        }
        if !s.supported_in_leading_pair(1e-10) {
            return Err(Error::invalid(format!("{name} state must live in span{{|1⟩, |2⟩}}")));
        }
    }
    if problem.dim <= 2 {
        return Ok(0.0);
    }
    let b0 = &backward_ladder(seq.unitaries(), problem.target.matrix())[0];
    let c0 = commutator(problem.initial.matrix(), b0)?;
    // C_0 is anti-Hermitian, so s and −s† carry equal mass.
    Ok(c0.mass_outside_leading_block(2) / std::f64::consts::SQRT_2)
}
