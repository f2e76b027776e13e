//! Instance generators and oracles shared by the integration tests.
#![allow(dead_code)]

use orthotree::random;
use orthotree::{
    CMatrix, Complex, ContextFamily, ContextPmf, DensityMatrix, ExperimentalContext, HermitianObservable,
    NumDecomposition, Part, Subspace,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_d λ_d V_d V_d*` computed entrywise, independent of the library's synthesis.
pub fn oracle_synthesize(d: &NumDecomposition) -> Vec<Complex> {
    let n = d.ambient_dim();
    let mut out = vec![Complex::new(0.0, 0.0); n * n];
    for part in d.parts() {
        let v = part.subspace.basis();
        for i in 0..n {
            for j in 0..n {
                for c in 0..v.cols() {
                    out[i * n + j] += v[(i, c)] * v[(j, c)].conj() * part.lambda;
                }
            }
        }
    }
    out
}

pub fn frobenius_distance(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal columns rearranged into contexts that share some subspaces:
/// each context optionally mixes two columns, then groups the columns at random.
pub fn sharing_family<R: Rng>(rng: &mut R, n: usize, k: usize) -> ContextFamily {
    let u = random::unitary(rng, n);
    let contexts = (0..k)
        .map(|c| {
            let mut cols: Vec<Vec<Complex>> = (0..n).map(|j| u.column(j)).collect();
            if n >= 2 && rng.random_bool(0.5) {
                let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
                if i != j {
                    let w = random::unitary(rng, 2);
                    let (a, b) = (cols[i].clone(), cols[j].clone());
                    cols[i] = a.iter().zip(&b).map(|(x, y)| w[(0, 0)] * x + w[(1, 0)] * y).collect();
                    cols[j] = a.iter().zip(&b).map(|(x, y)| w[(0, 1)] * x + w[(1, 1)] * y).collect();
                }
            }
            cols.shuffle(rng);
            let mut parts = Vec::new();
            let mut start = 0;
            while start < n {
                let size = rng.random_range(1..=n - start);
                let block = CMatrix::from_columns(&cols[start..start + size]).unwrap();
                parts.push(Part::new(parts.len() as f64, Subspace::span(&block).unwrap()));
                start += size;
            }
            (format!("c{c}"), NumDecomposition::new(parts).unwrap())
        })
        .collect();
    ContextFamily::new(contexts).unwrap()
}

/// Projectors onto the parts of a random decomposition, with a random subset dropped.
pub fn projector_family<R: Rng>(rng: &mut R, n: usize) -> Vec<CMatrix> {
    let d = random::decomposition(rng, n);
    let mut family: Vec<CMatrix> = d.parts().iter().map(|p| p.subspace.projector()).collect();
    if family.len() > 1 {
        let keep = rng.random_range(1..=family.len());
        family.shuffle(rng);
        family.truncate(keep);
    }
    family
}

pub fn random_pmf<R: Rng>(rng: &mut R, k: usize) -> ContextPmf {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    ContextPmf::new(raw.iter().map(|x| x / total).collect()).unwrap()
}

pub fn random_contexts<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<ExperimentalContext> {
    (0..k)
        .map(|c| {
            let m = if rng.random_bool(0.5) { random::degenerate_hermitian(rng, n) } else { random::hermitian(rng, n) };
            let obs = HermitianObservable::new(m).unwrap();
            let rho: DensityMatrix = random::density(rng, n);
            ExperimentalContext::new(format!("c{c}"), obs, rho).unwrap()
        })
        .collect()
}

/// Pearson statistic and its upper-tail p-value over the cells with positive probability.
pub fn chi_square(counts: &[usize], probs: &[f64], total: usize) -> (f64, f64) {
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        if p > 0.0 {
            let expected = p * total as f64;
            stat += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    let dof = (cells - 1).max(1) as f64;
    (stat, ChiSquared::new(dof).unwrap().sf(stat))
}
