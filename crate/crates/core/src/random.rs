//! Random instance generators for tests, benchmarks and experiments.
//!
//! All generators take the RNG by reference so callers control seeding.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, Complex, Subspace, WaveVector};
use crate::spectral::{NumDecomposition, Part};
use crate::state::DensityMatrix;

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

/// `(G + G*)/2` for a complex Gaussian `G`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    (&g + &g.adjoint()).scale(0.5)
}

/// Haar-like unitary from Gram–Schmidt on a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        if let Ok(s) = Subspace::span(&gaussian_matrix(rng, n, n)) {
            return s.basis().clone();
        }
    }
}

/// `U diag(d) U*` with eigenvalues drawn from a small pool so that repeats
/// (degenerate eigenspaces) are common.
pub fn degenerate_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let pool: Vec<f64> = (0..n.div_ceil(2).max(1)).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut diag: Vec<f64> = (0..n).map(|_| pool[rng.random_range(0..pool.len())]).collect();
    // Force at least one repeat.
    if n >= 2 {
        diag[1] = diag[0];
    }
    let u = unitary(rng, n);
    let a = u.matmul(&CMatrix::from_diag(&diag)).unwrap().matmul(&u.adjoint()).unwrap();
    (&a + &a.adjoint()).scale(0.5)
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WaveVector {
    loop {
        let v: Vec<Complex> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if let Ok(w) = WaveVector::new(v) {
            return w.normalized();
        }
    }
}

/// Wishart-style density `M M* / tr(M M*)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let m = gaussian_matrix(rng, n, n);
    let mm = m.matmul(&m.adjoint()).unwrap();
    let t = mm.trace().unwrap().re;
    let rho = mm.scale(1.0 / t);
    DensityMatrix::new((&rho + &rho.adjoint()).scale(0.5)).expect("Wishart matrix is a density")
}

/// Random orthogonal decomposition: a random unitary's columns are split
/// into consecutive groups with random sizes and distinct identifiers.
pub fn decomposition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> NumDecomposition {
    let u = unitary(rng, n);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    sizes.shuffle(rng);
    let mut labels: Vec<f64> = (0..sizes.len()).map(|k| k as f64 - 1.5).collect();
    labels.shuffle(rng);
    let mut col = 0;
    let parts = sizes
        .iter()
        .zip(labels)
        .map(|(&s, lambda)| {
            let cols: Vec<Vec<Complex>> = (col..col + s).map(|j| u.column(j)).collect();
            col += s;
            Part::new(lambda, Subspace::span(&CMatrix::from_columns(&cols).unwrap()).unwrap())
        })
        .collect();
    NumDecomposition::new(parts).expect("columns of a unitary")
}

/// Decomposition whose parts are all proper subspaces (requires `n ≥ 2`).
pub fn proper_decomposition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> NumDecomposition {
    loop {
        let d = decomposition(rng, n);
        if d.parts().iter().all(|p| p.dim() < n) {
            return d;
        }
    }
}
