//! Dense complex linear algebra.
//!
//! Everything above this module consumes [`CMatrix`], [`WaveVector`] and
//! [`Subspace`]. Matrices are row-major and small; nothing here tries to be
//! cache-clever beyond avoiding needless allocation in the Jacobi sweep.

mod jacobi;
mod subspace;

pub use jacobi::{hermitian_eigensolve, is_psd, Eigen};
pub use subspace::Subspace;

use std::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::json::MatrixJson", into = "crate::json::MatrixJson")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidLayout(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidLayout(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite(data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidLayout("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Stacks vectors as the columns of an `n × k` matrix.
    pub fn from_columns(columns: &[Vec<Complex>]) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidLayout("columns of unequal length".into()));
        }
        let mut data = vec![ZERO; n * k];
        for (j, col) in columns.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                data[i * k + j] = z;
            }
        }
        Self::new(n, k, data)
    }

    /// The rank-one matrix `v v*`.
    pub fn outer(v: &[Complex]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", rhs.rows),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `M* x` without materializing the adjoint.
    pub fn adjoint_mat_vec(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut out = vec![ZERO; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self[(i, j)].conj() * xi;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn trace(&self) -> Result<Complex> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// `tr(self · other)` computed without forming the product.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex> {
        let n = self.require_square()?;
        self.require_same_shape(other)?;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    /// True iff `‖M − M*‖_F ≤ tol·(1 + ‖M‖_F)`.
    pub fn is_hermitian(&self, tol: f64) -> Result<bool> {
        Ok(self.hermitian_residual()? <= tol * (1.0 + self.frobenius_norm()))
    }

    pub(crate) fn hermitian_residual(&self) -> Result<f64> {
        let n = self.require_square()?;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    pub(crate) fn require_hermitian(&self) -> Result<usize> {
        let n = self.require_square()?;
        let residual = self.hermitian_residual()?;
        if residual <= tol::HERMITIAN * (1.0 + self.frobenius_norm()) {
            Ok(n)
        } else {
            Err(Error::NotHermitian { residual })
        }
    }

    /// Real part of the quadratic form `x* M x`.
    pub(crate) fn quadratic_form(&self, x: &[Complex]) -> Result<f64> {
        let mx = self.mat_vec(x)?;
        Ok(dot(x, &mx).re)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    /// Panics on shape mismatch.
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.require_same_shape(rhs).expect("matrix addition");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    /// Panics on shape mismatch.
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.require_same_shape(rhs).expect("matrix subtraction");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `a* b`, conjugate-linear in the first argument.
pub fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotates `v` so the first component of (near-)maximal modulus is real positive.
pub(crate) fn fix_phase(v: &mut [Complex]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-10))
        .expect("a maximal component exists");
    let phase = v[lead].conj() / v[lead].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// A nonzero vector of `ℂⁿ`, read as a (possibly unnormalized) quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector {
    components: Vec<Complex>,
}

impl WaveVector {
    pub fn new(components: Vec<Complex>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidLayout("empty wave vector".into()));
        }
        if components.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite(components.len()));
        }
        if components.iter().all(|z| *z == ZERO) {
            return Err(Error::ZeroVector);
        }
        Ok(Self { components })
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        Self::new(components.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// The canonical basis vector `e_index` of `ℂⁿ`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut components = vec![ZERO; n];
        components[index] = ONE;
        Self { components }
    }

    pub fn components(&self) -> &[Complex] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::NORM
    }

    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm_sqr().sqrt();
        Self { components: self.components.iter().map(|z| z * s).collect() }
    }

    /// The pure-state density `ψψ*/‖ψ‖²`.
    pub fn projector(&self) -> CMatrix {
        CMatrix::outer(&self.components).scale(1.0 / self.norm_sqr())
    }
}
