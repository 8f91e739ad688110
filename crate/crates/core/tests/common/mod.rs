#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeno_subspace::channel::{objective, ControlProblem, DensityMatrix, MeasurementSequence, UnitaryMatrix};
use zeno_subspace::linalg::{expm_skew, ComplexMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Full-rank random state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(n, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(w.scale_real(1.0 / tr).hermitian_part()).unwrap()
}

pub fn random_pure<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let u = UnitaryMatrix::haar(n, rng);
    DensityMatrix::pure(&u.matrix().column(0)).unwrap()
}

pub fn random_sequence<R: Rng>(n: usize, m: usize, rng: &mut R) -> MeasurementSequence {
    MeasurementSequence::new(n, (0..m).map(|_| UnitaryMatrix::haar(n, rng)).collect()).unwrap()
}

pub fn random_anti_hermitian<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng);
    (&g - &g.adjoint()).scale_real(0.5)
}

/// Objective after replacing `U_k` (1-based) by `exp(εA) U_k`.
pub fn perturbed_objective(
    seq: &MeasurementSequence,
    problem: &ControlProblem,
    k: usize,
    a: &ComplexMatrix,
    eps: f64,
) -> f64 {
    let mut us = seq.unitaries().to_vec();
    let rot = expm_skew(&a.scale_real(eps)).unwrap();
    us[k - 1] = UnitaryMatrix::new(&rot * us[k - 1].matrix()).unwrap();
    objective(&MeasurementSequence::new(seq.dim(), us).unwrap(), problem).unwrap()
}
