//! Independent two-level ground truth.
//!
//! For a qubit, a non-selective measurement along the Bloch axis `n` maps the
//! Bloch vector `r` to `(r·n) n`. Transfer from `ẑ` to a target at polar
//! angle `γ` therefore reduces to a chain of projections, and the optimum over
//! `m` measurements is reached by spacing the axes evenly in the plane of the
//! two states:
//!
//! ```text
//! J*(m, γ) = (1 + cos^{m+1}(γ / (m+1))) / 2
//! ```
//!
//! [`grid_search_value`] checks that closed form by exhaustive search over
//! axes on the whole sphere; nothing in here touches the N-level optimizer.

use rayon::prelude::*;

use crate::channel::{DensityMatrix, MeasurementSequence, UnitaryMatrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || r.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("Bloch vector ({x}, {y}, {z}) outside the unit ball")));
        }
        Ok(r)
    }

    /// Unit vector at the given polar and azimuthal angles.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self { x: sp * ca, y: sp * sa, z: cp }
    }

    pub const fn north() -> Self {
        Self { x: 0.0, y: 0.0, z: 1.0 }
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn scaled(&self, s: f64) -> Self {
        Self { x: s * self.x, y: s * self.y, z: s * self.z }
    }

    /// `(I + r·σ) / 2`; level `|1⟩` sits at the north pole.
    pub fn to_density(&self) -> DensityMatrix {
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new((1.0 + self.z) / 2.0, 0.0), C64::new(self.x / 2.0, -self.y / 2.0)],
            vec![C64::new(self.x / 2.0, self.y / 2.0), C64::new((1.0 - self.z) / 2.0, 0.0)],
        ])
        .expect("finite entries");
        DensityMatrix::from_trusted(m)
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        check_dim(2, rho.dim())?;
        let m = rho.matrix();
        let off = m[(1, 0)];
        Self::new(2.0 * off.re, 2.0 * off.im, (m[(0, 0)] - m[(1, 1)]).re)
    }

    /// Measurement basis whose first column is the state at `+self`.
    pub fn measurement_basis(&self) -> Result<UnitaryMatrix> {
        if (self.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("measurement axis must be a unit vector"));
        }
        let polar = self.z.clamp(-1.0, 1.0).acos();
        let azimuth = self.y.atan2(self.x);
        let (s, c) = (polar / 2.0).sin_cos();
        let phase = C64::from_polar(1.0, azimuth);
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(c, 0.0), -phase.conj() * s],
            vec![phase * s, C64::new(c, 0.0)],
        ])?;
        UnitaryMatrix::new(m)
    }
}

/// Non-selective measurement along `axis`: `(r·axis) axis`.
pub fn project(r: &BlochVector, axis: &BlochVector) -> Result<BlochVector> {
    if (axis.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("measurement axis has norm {}", axis.norm())));
    }
    Ok(axis.scaled(r.dot(axis)))
}

/// Bloch angle between `|1⟩` and a pure state with `|⟨ψ|1⟩|² = overlap`.
pub fn gamma_from_overlap(overlap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::invalid(format!("overlap {overlap} outside [0, 1]")));
    }
    Ok(2.0 * overlap.sqrt().acos())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=std::f64::consts::PI).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::invalid(format!("Bloch angle {gamma} outside [0, π]")))
    }
}

/// Target Bloch vector `(sin γ, 0, cos γ)`.
pub fn target_axis(gamma: f64) -> BlochVector {
    BlochVector::from_angles(gamma, 0.0)
}

/// Closed-form two-level optimum with `m` measurements.
pub fn optimal_value(m: usize, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let gaps = (m + 1) as f64;
    Ok((1.0 + (gamma / gaps).cos().powi(m as i32 + 1)) / 2.0)
}

/// Largest objective reachable with measurement axes restricted to a
/// `resolution`-step polar/azimuthal grid on the sphere.
///
/// With `r_0 = ẑ` and `r_k = (r_{k−1}·n_k) n_k`, the final overlap is
/// `(1 + (ẑ·n_1)(n_1·n_2)⋯(n_m·n_θ)) / 2`. The maximum of that chain product
/// over all grid tuples is found exactly by dynamic programming over the axis
/// grid, tracking the largest and smallest partial product ending at each
/// axis. Antipodal axes give the same measurement, so one hemisphere of the
/// grid covers every distinct axis.
pub fn grid_search_value(m: usize, gamma: f64, resolution: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if m > 3 {
        return Err(Error::invalid(format!("grid search supports m ≤ 3, got {m}")));
    }
    if resolution < 90 {
        return Err(Error::invalid(format!("grid resolution must be ≥ 90, got {resolution}")));
    }
    let target = target_axis(gamma);
    let start = BlochVector::north();
    if m == 0 {
        return Ok((1.0 + start.dot(&target)) / 2.0);
    }

    Ok((1.0 + chain_maximum(&hemisphere_grid(resolution), &start, &target, m)) / 2.0)
}

/// `max (start·n_1)(n_1·n_2)⋯(n_m·target)` over `n_k ∈ axes`, `m ≥ 1`.
fn chain_maximum(axes: &[BlochVector], start: &BlochVector, target: &BlochVector, m: usize) -> f64 {
    let mut hi: Vec<f64> = axes.iter().map(|a| start.dot(a)).collect();
    let mut lo = hi.clone();
    for _ in 1..m {
        let (next_hi, next_lo): (Vec<f64>, Vec<f64>) = axes
            .par_iter()
            .map(|b| {
                let mut best = f64::NEG_INFINITY;
                let mut worst = f64::INFINITY;
                for ((a, &h), &l) in axes.iter().zip(&hi).zip(&lo) {
                    let d = a.dot(b);
                    let (p, q) = (h * d, l * d);
                    best = best.max(p.max(q));
                    worst = worst.min(p.min(q));
                }
                (best, worst)
            })
            .unzip();
        hi = next_hi;
        lo = next_lo;
    }
    axes.iter()
        .zip(hi.iter().zip(&lo))
        .map(|(a, (&h, &l))| {
            let d = a.dot(target);
            (h * d).max(l * d)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid axes with `z > 0`, the equator half with azimuth in `[0, π)`, and the
/// north pole. Polar step and azimuthal step are both `π / resolution`.
pub(crate) fn hemisphere_grid(resolution: usize) -> Vec<BlochVector> {
    let step = std::f64::consts::PI / resolution as f64;
    let mut axes = vec![BlochVector::north()];
    for p in 1..=resolution / 2 {
        let q_max = if 2 * p == resolution { resolution } else { 2 * resolution };
        for q in 0..q_max {
            axes.push(BlochVector::from_angles(p as f64 * step, q as f64 * step));
        }
    }
    axes
}

/// Evenly spaced in-plane bases at polar angles `k·γ/(m+1)`, `k = 1…m`.
pub fn equal_angle_sequence(m: usize, gamma: f64) -> Result<MeasurementSequence> {
    check_gamma(gamma)?;
    if m == 0 {
        return Err(Error::invalid("equal-angle sequence needs m ≥ 1"));
    }
    let gap = gamma / (m + 1) as f64;
    let unitaries = (1..=m)
        .map(|k| BlochVector::from_angles(k as f64 * gap, 0.0).measurement_basis())
        .collect::<Result<Vec<_>>>()?;
    MeasurementSequence::new(2, unitaries)
}

/// Objective of a sequence of axes by projection composition.
pub fn chain_objective(axes: &[BlochVector], target: &BlochVector) -> Result<f64> {
    let mut r = BlochVector::north();
    for a in axes {
        r = project(&r, a)?;
    }
    Ok((1.0 + r.dot(target)) / 2.0)
}
