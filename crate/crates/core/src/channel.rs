//! States, non-selective projective measurements, and the transfer objective.
//!
//! A measurement in the orthonormal basis given by the columns of `U` acts as
//!
//! ```text
//! M(U) ρ = Σ_i U|i⟩⟨i|U† ρ U|i⟩⟨i|U†
//! ```
//!
//! which is evaluated in three steps: rotate into the measurement frame
//! (`U† ρ U`), drop the off-diagonal coherences, rotate back. A sequence
//! `U_1 … U_m` maps `ρ` to `ρ^m = M(U_m)⋯M(U_1) ρ` and the objective is the
//! overlap `J = Tr(ρ^m θ)` with the target `θ`.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eig, random_unitary, ComplexMatrix, C64, ONE, ZERO};

/// Hermiticity and trace tolerance for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-10;
/// Lowest eigenvalue accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;
/// Bound on `‖U†U − I‖_F` for [`UnitaryMatrix`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates `mat`; states outside tolerance are rejected, never repaired.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermitian_residual();
        if herm > STATE_TOL {
            return Err(Error::invalid(format!("state is not Hermitian (‖ρ − ρ†‖ = {herm:e})")));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::invalid(format!("state trace is {tr}, expected 1")));
        }
        let eig = hermitian_eig(&mat)?;
        let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if min < PSD_FLOOR {
            return Err(Error::invalid(format!(
                "state is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self(mat))
    }

    /// Wraps a matrix known to be a state, e.g. the image of a state under a
    /// measurement channel.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        Self(mat)
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::invalid("empty state vector"));
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("state vector has squared norm {norm2}, expected 1")));
        }
        Ok(Self(ComplexMatrix::outer(psi)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// `Tr(ρ σ)`.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        self.0.trace_product(&other.0).re
    }

    /// True if every entry outside the leading 2×2 block is below `tol`.
    pub fn supported_in_leading_pair(&self, tol: f64) -> bool {
        self.0.mass_outside_leading_block(2.min(self.dim())) <= tol
    }
}

/// Basis state `|index⟩⟨index|` (zero-based index).
pub fn basis_pure_state(dim: usize, index: usize) -> Result<DensityMatrix> {
    if index >= dim {
        return Err(Error::invalid(format!("basis index {index} out of range for dimension {dim}")));
    }
    let mut psi = vec![ZERO; dim];
    psi[index] = ONE;
    DensityMatrix::pure(&psi)
}

/// `(α|1⟩ + β|2⟩)(α*⟨1| + β*⟨2|)` embedded in dimension `dim ≥ 2`.
pub fn superposition_pure_state(dim: usize, alpha: C64, beta: C64) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::invalid("superposition needs dimension ≥ 2"));
    }
    let norm2 = alpha.norm_sqr() + beta.norm_sqr();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("|α|² + |β|² = {norm2}, expected 1")));
    }
    let mut psi = vec![ZERO; dim];
    psi[0] = alpha;
    psi[1] = beta;
    DensityMatrix::pure(&psi)
}

/// Measurement basis rotation; the projectors are `U|i⟩⟨i|U†`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let res = mat.unitarity_residual();
        if res >= UNITARY_TOL {
            return Err(Error::invalid(format!("matrix is not unitary (‖U†U − I‖ = {res:e})")));
        }
        Ok(Self(mat))
    }

    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        Self(mat)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    /// Haar-random unitary.
    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self(random_unitary(dim, rng))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Block-diagonal `a ⊕ b`.
    pub fn direct_sum(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Self {
        Self(ComplexMatrix::direct_sum(&a.0, &b.0))
    }

    /// `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Ok(Self(self.0.matmul(&other.0)?))
    }
}

/// `U_s = e^{iψ₁} ⊕ e^{iψ₂} ⊕ U_arb`, the symmetry that leaves the objective
/// unchanged for states supported on (and diagonal in) the first two levels.
pub fn construct_gauge(psi1: f64, psi2: f64, u_arb: &UnitaryMatrix) -> UnitaryMatrix {
    let phases = ComplexMatrix::from_diag(&[C64::from_polar(1.0, psi1), C64::from_polar(1.0, psi2)]);
    UnitaryMatrix(ComplexMatrix::direct_sum(&phases, u_arb.matrix()))
}

/// Ordered measurement bases `U_1 … U_m` acting on dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSequence {
    dim: usize,
    unitaries: Vec<UnitaryMatrix>,
}

impl MeasurementSequence {
    pub fn new(dim: usize, unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        for u in &unitaries {
            check_dim(dim, u.dim())?;
        }
        Ok(Self { dim, unitaries })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, unitaries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    /// `{U_s · U_k}` for every k.
    pub fn left_multiplied(&self, gauge: &UnitaryMatrix) -> Result<MeasurementSequence> {
        check_dim(self.dim, gauge.dim())?;
        let unitaries = self
            .unitaries
            .iter()
            .map(|u| UnitaryMatrix(gauge.matrix() * u.matrix()))
            .collect();
        Ok(Self { dim: self.dim, unitaries })
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    n: usize,
    unitaries: Vec<ComplexMatrix>,
}

impl Serialize for MeasurementSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceFile {
            n: self.dim,
            unitaries: self.unitaries.iter().map(|u| u.0.clone()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = SequenceFile::deserialize(deserializer)?;
        let unitaries = file
            .unitaries
            .into_iter()
            .map(UnitaryMatrix::new)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        MeasurementSequence::new(file.n, unitaries).map_err(serde::de::Error::custom)
    }
}

/// Transfer task: steer `initial` toward `target` with at most `m`
/// measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlProblem {
    pub dim: usize,
    pub m: usize,
    pub initial: DensityMatrix,
    pub target: DensityMatrix,
}

impl ControlProblem {
    pub fn new(m: usize, initial: DensityMatrix, target: DensityMatrix) -> Result<Self> {
        check_dim(initial.dim(), target.dim())?;
        Ok(Self { dim: initial.dim(), m, initial, target })
    }

    /// `|1⟩ → |2⟩` in dimension `dim`.
    pub fn orthogonal(dim: usize, m: usize) -> Result<Self> {
        Self::new(m, basis_pure_state(dim, 0)?, basis_pure_state(dim, 1)?)
    }

    /// `|1⟩ → √f|1⟩ + √(1−f)|2⟩` where `f` is the initial overlap.
    pub fn with_overlap(dim: usize, m: usize, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::invalid(format!("overlap {overlap} outside [0, 1]")));
        }
        let target = superposition_pure_state(
            dim,
            C64::new(overlap.sqrt(), 0.0),
            C64::new((1.0 - overlap).sqrt(), 0.0),
        )?;
        Self::new(m, basis_pure_state(dim, 0)?, target)
    }

    /// True if both states live in span{|1⟩, |2⟩}.
    pub fn supported_in_leading_pair(&self, tol: f64) -> bool {
        self.initial.supported_in_leading_pair(tol) && self.target.supported_in_leading_pair(tol)
    }
}

/// `M(U) A` for an arbitrary operator `A`.
pub fn measurement_map(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    let n = u.dim();
    let y = a * u;
    let d: Vec<C64> = (0..n).map(|i| (0..n).map(|r| u[(r, i)].conj() * y[(r, i)]).sum()).collect();
    ComplexMatrix::from_fn(n, |r, c| (0..n).map(|i| u[(r, i)] * d[i] * u[(c, i)].conj()).sum())
}

/// `M(U) A` for Hermitian `A`; the output is Hermitian bit-for-bit.
pub(crate) fn measure_hermitian(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    let n = u.dim();
    let y = a * u;
    let d: Vec<f64> =
        (0..n).map(|i| (0..n).map(|r| u[(r, i)].conj() * y[(r, i)]).sum::<C64>().re).collect();
    let mut out = ComplexMatrix::zeros(n);
    for r in 0..n {
        for c in r..n {
            let z: C64 = (0..n).map(|i| u[(r, i)] * (d[i] * u[(c, i)].conj())).sum();
            if r == c {
                out[(r, r)] = C64::new(z.re, 0.0);
            } else {
                out[(r, c)] = z;
                out[(c, r)] = z.conj();
            }
        }
    }
    out
}

pub fn apply_measurement(u: &UnitaryMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(rho.dim(), u.dim())?;
    Ok(DensityMatrix(measure_hermitian(u.matrix(), rho.matrix())))
}

/// `ρ^m = M(U_m)⋯M(U_1) ρ`.
pub fn propagate(seq: &MeasurementSequence, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(seq.dim(), rho.dim())?;
    let mut state = rho.matrix().clone();
    for u in seq.unitaries() {
        state = measure_hermitian(u.matrix(), &state);
    }
    Ok(DensityMatrix(state))
}

/// `F_0 … F_m` with `F_0 = ρ` and `F_k = M(U_k) F_{k−1}`.
pub fn forward_states(seq: &MeasurementSequence, rho: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
    check_dim(seq.dim(), rho.dim())?;
    Ok(forward_ladder(seq.unitaries(), rho.matrix()).into_iter().map(DensityMatrix).collect())
}

/// `B_0 … B_m` (element `k` is `B_k`) with `B_m = θ` and
/// `B_{k−1} = M(U_k) B_k`.
///
/// Each `M(U)` is self-adjoint under `⟨A, B⟩ = Tr(A B)`, so
/// `Tr(F_k B_k) = J` at every cut `k`.
pub fn backward_states(seq: &MeasurementSequence, theta: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
    check_dim(seq.dim(), theta.dim())?;
    Ok(backward_ladder(seq.unitaries(), theta.matrix()).into_iter().map(DensityMatrix).collect())
}

pub(crate) fn forward_ladder(us: &[UnitaryMatrix], rho: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(us.len() + 1);
    out.push(rho.clone());
    for u in us {
        let next = measure_hermitian(u.matrix(), out.last().unwrap());
        out.push(next);
    }
    out
}

pub(crate) fn backward_ladder(us: &[UnitaryMatrix], theta: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let m = us.len();
    let mut out = vec![ComplexMatrix::zeros(0); m + 1];
    out[m] = theta.clone();
    for k in (1..=m).rev() {
        out[k - 1] = measure_hermitian(us[k - 1].matrix(), &out[k]);
    }
    out
}

/// `J = Tr(ρ^m θ)`.
///
/// The raw trace is returned; roundoff may place it a few ulps outside
/// `[0, 1]`.
pub fn objective(seq: &MeasurementSequence, problem: &ControlProblem) -> Result<f64> {
    check_dim(problem.dim, seq.dim())?;
    let last = propagate(seq, &problem.initial)?;
    let j = last.overlap(&problem.target);
    debug_assert!((-1e-9..=1.0 + 1e-9).contains(&j), "objective {j} out of range");
    Ok(j)
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}
