//! Exponential map for anti-Hermitian generators.

use super::{hermitian_eig_with, ComplexMatrix, EigenConfig, C64, I};
use crate::error::{Error, Result};

/// `exp(a)` for anti-Hermitian `a`, computed from the eigendecomposition of
/// the Hermitian matrix `i·a = V Λ V†` as `V · diag(e^{−iλ}) · V†`.
pub fn expm_skew(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_skew_with(a, &EigenConfig::default())
}

pub fn expm_skew_with(a: &ComplexMatrix, cfg: &EigenConfig) -> Result<ComplexMatrix> {
    let skew = a.anti_hermitian_residual();
    if skew > cfg.hermitian_tol * a.frobenius_norm().max(1.0) {
        return Err(Error::invalid(format!(
            "generator is not anti-Hermitian (‖A + A†‖ = {skew:e})"
        )));
    }
    let eig = hermitian_eig_with(&a.scale(I), cfg)?;
    Ok(eig.map_eigenvalues(|l| C64::from_polar(1.0, -l)))
}
