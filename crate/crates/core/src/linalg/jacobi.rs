//! Cyclic complex Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation that annihilates
//! it. The combined unitary `G` acting on columns `p, q` is
//!
//! ```text
//!     G_pp = c           G_pq = s
//!     G_qp = -s e^{-iφ}  G_qq = c e^{-iφ}
//! ```
//!
//! with `a_pq = |a_pq| e^{iφ}`.

use super::{fix_phase, CMatrix, Complex};
use crate::error::{Error, Result};
use crate::tol;

/// Eigenvalues (ascending) and the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

pub fn hermitian_eigensolve(m: &CMatrix) -> Result<Eigen> {
    let n = m.require_hermitian()?;
    // Work on the exactly Hermitian part so rounding in the input cannot bias the result.
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = CMatrix::identity(n);
    let threshold = tol::JACOBI_OFFDIAG * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        if sweeps == tol::JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { max_sweeps: tol::JACOBI_MAX_SWEEPS });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, dst)] = z;
        }
    }
    Ok(Eigen { values, vectors, sweeps })
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    let eig = hermitian_eigensolve(m)?;
    Ok(eig.values.first().is_none_or(|&lo| lo >= -tol))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e_minus = phase.conj();
    let e_plus = phase;
    let n = a.rows();

    // A <- A G
    for k in 0..n {
        let xp = a[(k, p)];
        let xq = a[(k, q)];
        a[(k, p)] = xp * c - xq * e_minus * s;
        a[(k, q)] = xp * s + xq * e_minus * c;
    }
    // A <- G* A
    for k in 0..n {
        let xp = a[(p, k)];
        let xq = a[(q, k)];
        a[(p, k)] = xp * c - xq * e_plus * s;
        a[(q, k)] = xp * s + xq * e_plus * c;
    }
    a[(p, q)] = Complex::new(0.0, 0.0);
    a[(q, p)] = Complex::new(0.0, 0.0);
    a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
    // V <- V G
    for k in 0..n {
        let xp = v[(k, p)];
        let xq = v[(k, q)];
        v[(k, p)] = xp * c - xq * e_minus * s;
        v[(k, q)] = xp * s + xq * e_minus * c;
    }
}
