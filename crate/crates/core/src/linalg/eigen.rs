//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Tolerances for [`hermitian_eig_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    /// Maximum `‖A − A†‖_F / max(1, ‖A‖_F)` accepted as Hermitian input.
    pub hermitian_tol: f64,
    /// Stop once the off-diagonal Frobenius mass is at most `rel_tol · ‖A‖_F`.
    pub rel_tol: f64,
    pub max_sweeps: usize,
    /// Off-diagonal entries smaller than this are left alone.
    pub skip_below: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { hermitian_tol: 1e-10, rel_tol: 1e-14, max_sweeps: 100, skip_below: 1e-300 }
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| C64::new(l, 0.0))
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        })
    }
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with(a, &EigenConfig::default())
}

pub fn hermitian_eig_with(a: &ComplexMatrix, cfg: &EigenConfig) -> Result<HermitianEigen> {
    let n = a.dim();
    let norm = a.frobenius_norm();
    let herm = a.hermitian_residual();
    if herm > cfg.hermitian_tol * norm.max(1.0) {
        return Err(Error::invalid(format!("matrix is not Hermitian (‖A − A†‖ = {herm:e})")));
    }

    let mut w = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let target = cfg.rel_tol * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_mass(&w);
        if off <= target {
            break;
        }
        if sweeps == cfg.max_sweeps {
            return Err(Error::NoConvergence { sweeps, residual: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q, cfg.skip_below);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in first-occurrence column order.
    order.sort_by(|&i, &j| w[(i, i)].re.total_cmp(&w[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| w[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

fn off_diagonal_mass(w: &ComplexMatrix) -> f64 {
    let n = w.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += w[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `w[p][q]` with a unitary plane rotation `G`, updating
/// `w ← G† w G` and `v ← v G`.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, skip_below: f64) {
    let apq = w[(p, q)];
    let g = apq.norm();
    if g < skip_below {
        return;
    }
    // Phase e^{iφ} makes the pivot real; then a real Jacobi rotation finishes.
    let phase = apq / g;
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G restricted to (p, q): [[c, s], [−s e^{−iφ}, c e^{−iφ}]].
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = w.dim();
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = wkp * g_pp + wkq * g_qp;
        w[(k, q)] = wkp * g_pq + wkq * g_qq;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = g_pp.conj() * wpk + g_qp.conj() * wqk;
        w[(q, k)] = g_pq.conj() * wpk + g_qq.conj() * wqk;
    }
    w[(p, q)] = ZERO;
    w[(q, p)] = ZERO;
    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    debug_assert!((g_pp * g_pp.conj() + g_qp * g_qp.conj() - ONE).norm() < 1e-12);
}
