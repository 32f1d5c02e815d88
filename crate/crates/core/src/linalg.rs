//! Dense complex matrices for small Hilbert spaces (dimension 2^N, N <= 8).
//!
//! Storage is row-major. Products are written as plain loops; at these sizes
//! the overhead of a BLAS call would dominate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance below which a matrix is accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim], hermitian: true }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. The Hermitian flag is computed.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        let mut m = Self { dim, entries, hermitian: false };
        m.hermitian = m.hermitian_deviation() < HERMITIAN_TOL;
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        let mut m = Self { dim, entries, hermitian: false };
        m.hermitian = m.hermitian_deviation() < HERMITIAN_TOL;
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    /// Whether the Hermitian flag was verified at construction.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
        self.hermitian = false;
    }

    /// Recomputes the Hermitian flag after in-place edits.
    pub fn refresh_flag(&mut self) {
        self.hermitian = self.hermitian_deviation() < HERMITIAN_TOL;
    }

    /// max |M - M^dagger| relative to max |M| (absolute when M = 0).
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let a = self.entries[i * n + j];
                scale = scale.max(a.norm());
                dev = dev.max((a - self.entries[j * n + i].conj()).norm());
            }
        }
        if scale > 0.0 {
            dev / scale
        } else {
            dev
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out.hermitian = self.hermitian;
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        matmul_into(&self.entries, &other.entries, &mut out, n);
        let mut m = Self { dim: n, entries: out, hermitian: false };
        m.refresh_flag();
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        let mut m = Self { dim: self.dim, entries, hermitian: false };
        m.hermitian = self.hermitian && other.hermitian;
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut m = Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
            hermitian: false,
        };
        m.refresh_flag();
        m
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut entries = vec![ZERO; n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.entries[i * na + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        entries[(i * nb + k) * n + j * nb + l] = a * other.entries[k * nb + l];
                    }
                }
            }
        }
        Self { dim: n, entries, hermitian: self.hermitian && other.hermitian }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascend; column `k`
    /// of the returned matrix is the eigenvector for eigenvalue `k`.
    pub fn eigh(&self) -> (Vec<f64>, OperatorMatrix) {
        eigh_dense(&self.to_nalgebra())
    }
}

/// Eigen-decomposition of a Hermitian nalgebra matrix with ascending eigenvalues.
pub(crate) fn eigh_dense(m: &DMatrix<Complex64>) -> (Vec<f64>, OperatorMatrix) {
    let n = m.nrows();
    // Symmetrize to remove rounding asymmetry before the Hermitian solver.
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = OperatorMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `out = a * b` for row-major n x n matrices.
#[inline]
pub(crate) fn matmul_into(a: &[Complex64], b: &[Complex64], out: &mut [Complex64], n: usize) {
    out.iter_mut().for_each(|x| *x = ZERO);
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
}

/// Single-site Pauli operators in the convention sigma_z = diag(+1, -1), with
/// basis index 0 the excited state.
pub mod pauli {
    use super::*;

    pub fn sigma_x() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn sigma_z() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// Raising operator |e><g|.
    pub fn sigma_plus() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    /// Lowering operator |g><e|.
    pub fn sigma_minus() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])
    }

    /// Embeds a single-site operator at `site` of an `n`-site register.
    /// Site 0 is the most significant tensor factor.
    pub fn embed(op: &OperatorMatrix, site: usize, n: usize) -> OperatorMatrix {
        let id = OperatorMatrix::identity(2);
        let mut out = if site == 0 { op.clone() } else { id.clone() };
        for k in 1..n {
            out = out.kron(if k == site { op } else { &id });
        }
        out
    }
}
