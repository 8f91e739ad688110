//! Haar-distributed random unitaries.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, C64, ZERO};

/// Samples a unitary from the Haar measure on U(dim).
///
/// A Ginibre matrix (i.i.d. standard complex Gaussian entries) is
/// orthonormalized column by column. Gram–Schmidt leaves every `R_ii` real and
/// positive, which is exactly the phase convention that makes the Q factor
/// Haar distributed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ComplexMatrix::from_fn(dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        // Rank deficiency has probability zero; resample if it happens anyway.
        if let Some(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

/// Modified Gram–Schmidt on the columns, two passes for stability. Returns
/// `None` if the columns are numerically dependent.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.dim();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let proj: C64 = q.iter().zip(v.iter()).map(|(qi, vi)| qi.conj() * vi).sum();
                if proj != ZERO {
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }
    Some(ComplexMatrix::from_fn(n, |i, j| cols[j][i]))
}
