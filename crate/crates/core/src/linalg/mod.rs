//! Dense complex linear algebra on small square matrices.
//!
//! Everything here works on [`ComplexMatrix`], a row-major `dim × dim` array of
//! `Complex64`. The sizes this crate cares about are tiny (N ≤ 16), so the
//! routines favour clarity and accuracy over blocking or SIMD.

mod eigen;
mod expm;
mod haar;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

pub use eigen::{hermitian_eig, hermitian_eig_with, EigenConfig, HermitianEigen};
pub use expm::{expm_skew, expm_skew_with};
pub use haar::{orthonormalize_columns, random_unitary};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from a row-major entry vector of length `dim²`.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim * dim, data.len())?;
        let m = Self { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            data.extend(row);
        }
        Self::from_vec(dim, data)
    }

    /// Real-valued matrix from row-major entries. Panics if `entries.len()` is
    /// not a perfect square.
    pub fn from_real(entries: &[f64]) -> Self {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, entries.len(), "entry count is not a square");
        Self { dim, data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Rank-one outer product `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Block-diagonal direct sum `a ⊕ b`.
    pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        let (na, nb) = (a.dim, b.dim);
        let mut m = Self::zeros(na + nb);
        for i in 0..na {
            for j in 0..na {
                m[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                m[(na + i, na + j)] = b[(i, j)];
            }
        }
        m
    }

    /// Leading `k × k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        assert!(k <= self.dim);
        Self::from_fn(k, |i, j| self[(i, j)])
    }

    /// Trailing block starting at row/column `start`.
    pub fn trailing_block(&self, start: usize) -> Self {
        assert!(start <= self.dim);
        Self::from_fn(self.dim - start, |i, j| self[(start + i, start + j)])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }

    /// Checked matrix product.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.dim, other.dim)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(brow) {
                    *d += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖A − A†‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖A + A†‖_F`.
    pub fn anti_hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] + self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖A†A − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut g = ZERO;
                for k in 0..n {
                    g += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    g -= ONE;
                }
                acc += g.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius mass of the entries outside the leading `k × k` block.
    pub fn mass_outside_leading_block(&self, k: usize) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i >= k || j >= k {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Conjugation `u · self · u†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> ComplexMatrix {
        &(u * self) * &u.adjoint()
    }
}

/// Checked matrix product.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// `[a, b] = a·b − b·a`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(a.dim, b.dim)?;
    Ok(&a.mul_unchecked(b) - &b.mul_unchecked(a))
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator impls panic on dimension mismatch, like slicing does; use the
// checked `matmul`/`commutator` functions for untrusted input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// JSON encoding: array of rows, each entry a `[re, im]` pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> ComplexMatrix {
        ComplexMatrix::from_real(&[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn identity_is_neutral() {
        let a = ComplexMatrix::from_fn(3, |i, j| C64::new(i as f64, j as f64 - 1.0));
        assert_eq!(&ComplexMatrix::identity(3) * &a, a);
    }

    #[test]
    fn swap_is_an_involution() {
        assert_eq!(&swap() * &swap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn unitary_times_inverse() {
        let t = 0.3f64;
        let u = ComplexMatrix::from_rows(vec![
            vec![C64::new(t.cos(), 0.0), C64::new(0.0, t.sin())],
            vec![C64::new(0.0, t.sin()), C64::new(t.cos(), 0.0)],
        ])
        .unwrap();
        let prod = u.matmul(&u.adjoint()).unwrap();
        assert!(prod.distance(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn matmul_rejects_mismatched_dims() {
        let err = ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, found: 3 })));
        assert!(commutator(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let sym = ComplexMatrix::from_real(&[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(sym.adjoint(), sym);

        let a = ComplexMatrix::from_rows(vec![vec![ZERO, I], vec![ZERO, ZERO]]).unwrap();
        let expected = ComplexMatrix::from_rows(vec![vec![ZERO, ZERO], vec![-I, ZERO]]).unwrap();
        assert_eq!(a.adjoint(), expected);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn commutator_examples() {
        let a = ComplexMatrix::from_fn(3, |i, j| C64::new((i * j) as f64, i as f64));
        assert_eq!(commutator(&a, &a).unwrap().frobenius_norm(), 0.0);

        let p = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let q = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(commutator(&p, &q).unwrap().frobenius_norm(), 0.0);

        // σx σz − σz σx = −2iσy = [[0,−2],[2,0]]
        let sz = ComplexMatrix::from_real(&[1.0, 0.0, 0.0, -1.0]);
        let c = commutator(&swap(), &sz).unwrap();
        assert_eq!(c, ComplexMatrix::from_real(&[0.0, -2.0, 2.0, 0.0]));
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(ComplexMatrix::from_vec(1, vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::from_vec(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn json_encoding_is_rows_of_pairs() {
        let a = ComplexMatrix::from_rows(vec![vec![ONE, I], vec![ZERO, C64::new(-0.5, 2.0)]]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[[[1.0,0.0],[0.0,1.0]],[[0.0,0.0],[-0.5,2.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<ComplexMatrix>("[[[1.0,0.0]],[[0.0,0.0]]]").is_err());
    }
}
