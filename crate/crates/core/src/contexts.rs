//! Families of measurement contexts, their contextual probability measures,
//! Vorob'ev consistency auditing and projector-additivity checks.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex, WaveVector};
use crate::spectral::NumDecomposition;
use crate::state::{born_prob, trace_rule, DensityMatrix};
use crate::tol;

/// Largest number of cells per context for which cell-unions are enumerated.
pub const MAX_ENUMERATED_CELLS: usize = 20;

/// A finite family of orthogonal decompositions of the same `ℂⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextFamily {
    n: usize,
    contexts: Vec<(String, NumDecomposition)>,
}

impl ContextFamily {
    pub fn new(contexts: Vec<(String, NumDecomposition)>) -> Result<Self> {
        let n = contexts.first().ok_or(Error::EmptyContexts)?.1.ambient_dim();
        for (i, (id, d)) in contexts.iter().enumerate() {
            if d.ambient_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: d.ambient_dim() });
            }
            if contexts[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::DuplicateContext(id.clone()));
            }
        }
        Ok(Self { n, contexts })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[(String, NumDecomposition)] {
        &self.contexts
    }

    pub fn id(&self, index: usize) -> &str {
        &self.contexts[index].0
    }
}

/// One probability measure per context; each measure is the per-cell table
/// `P^D(L_d ∖ {0})`, with `P^D(R^D) = 0` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiProbabilitySpace {
    family: ContextFamily,
    measures: Vec<Vec<f64>>,
}

impl MultiProbabilitySpace {
    /// Hand-built measures, validated for shape, range and normalization.
    pub fn from_tables(family: ContextFamily, measures: Vec<Vec<f64>>) -> Result<Self> {
        if measures.len() != family.len() {
            return Err(Error::NotProbabilityMeasure(format!(
                "{} measures for {} contexts",
                measures.len(),
                family.len()
            )));
        }
        for ((id, d), probs) in family.contexts.iter().zip(&measures) {
            if probs.len() != d.len() {
                return Err(Error::NotProbabilityMeasure(format!(
                    "context {id:?}: {} probabilities for {} cells",
                    probs.len(),
                    d.len()
                )));
            }
            if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::NotProbabilityMeasure(format!("context {id:?}: probability {p}")));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > tol::TRACE {
                return Err(Error::NotProbabilityMeasure(format!("context {id:?}: total {total}")));
            }
        }
        Ok(Self { family, measures })
    }

    pub fn family(&self) -> &ContextFamily {
        &self.family
    }

    pub fn measure(&self, context: usize) -> &[f64] {
        &self.measures[context]
    }

    pub fn measures(&self) -> &[Vec<f64>] {
        &self.measures
    }
}

/// Trace-rule measures `P^D(L_d ∖ {0}) = tr(ρ Π_{L_d})` on every context.
pub fn from_density(family: &ContextFamily, rho: &DensityMatrix) -> Result<MultiProbabilitySpace> {
    if rho.dim() != family.n {
        return Err(Error::DimensionMismatch { expected: family.n, found: rho.dim() });
    }
    let measures = family
        .contexts
        .iter()
        .map(|(_, d)| d.parts().iter().map(|p| trace_rule(rho, &p.subspace)).collect())
        .collect::<Result<_>>()?;
    Ok(MultiProbabilitySpace { family: family.clone(), measures })
}

/// Born-rule measures `P^D(L_d ∖ {0}) = ψ*Π_{L_d}ψ` on every context.
pub fn from_wave_vector(family: &ContextFamily, psi: &WaveVector) -> Result<MultiProbabilitySpace> {
    if psi.dim() != family.n {
        return Err(Error::DimensionMismatch { expected: family.n, found: psi.dim() });
    }
    let measures = family
        .contexts
        .iter()
        .map(|(_, d)| d.parts().iter().map(|p| born_prob(psi, &p.subspace)).collect())
        .collect::<Result<_>>()?;
    Ok(MultiProbabilitySpace { family: family.clone(), measures })
}

/// Two contexts disagreeing on a shared subspace event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub context_a: String,
    pub cells_a: Vec<usize>,
    pub prob_a: f64,
    pub context_b: String,
    pub cells_b: Vec<usize>,
    pub prob_b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Matched pairs of cell-unions compared across contexts.
    pub shared_events: usize,
    pub violations: Vec<Violation>,
}

struct CellUnion {
    cells: Vec<usize>,
    dim: usize,
    projector: CMatrix,
    diag: Vec<f64>,
    prob: f64,
}

fn enumerate_unions(d: &NumDecomposition, probs: &[f64]) -> Result<Vec<CellUnion>> {
    let k = d.len();
    if k > MAX_ENUMERATED_CELLS {
        return Err(Error::InvalidDecomposition(format!(
            "{k} cells exceed the enumeration limit of {MAX_ENUMERATED_CELLS}"
        )));
    }
    let projectors: Vec<CMatrix> = d.parts().iter().map(|p| p.subspace.projector()).collect();
    let n = d.ambient_dim();
    let mut out = Vec::with_capacity((1usize << k) - 1);
    for mask in 1u64..(1u64 << k) {
        let cells: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let mut projector = CMatrix::zeros(n, n);
        for &i in &cells {
            projector = &projector + &projectors[i];
        }
        let diag = (0..n).map(|j| projector[(j, j)].re).collect();
        out.push(CellUnion {
            dim: cells.iter().map(|&i| d.parts()[i].dim()).sum(),
            prob: cells.iter().fold(0.0, |acc, &i| acc + probs[i]),
            cells,
            projector,
            diag,
        });
    }
    out.sort_by_key(|u| u.dim);
    Ok(out)
}

/// Exhaustive Vorob'ev consistency check.
///
/// Every cell-union of one context is compared with every cell-union of
/// another whose span is the same subspace (projector distance within
/// `tol::MATCH`); their probabilities must agree within `tol`.
pub fn check_consistency(mps: &MultiProbabilitySpace, tol: f64) -> Result<ConsistencyReport> {
    let unions = mps
        .family
        .contexts
        .iter()
        .zip(&mps.measures)
        .map(|((_, d), probs)| enumerate_unions(d, probs))
        .collect::<Result<Vec<_>>>()?;

    let k = unions.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let results: Vec<(usize, Vec<Violation>)> = pairs
        .par_iter()
        .map(|&(a, b)| compare_contexts(mps, (a, &unions[a]), (b, &unions[b]), tol))
        .collect();

    let shared_events = results.iter().map(|(s, _)| s).sum();
    let mut violations: Vec<Violation> = results.into_iter().flat_map(|(_, v)| v).collect();
    violations.sort_by(|x, y| {
        (&x.context_a, &x.cells_a, &x.context_b, &x.cells_b)
            .cmp(&(&y.context_a, &y.cells_a, &y.context_b, &y.cells_b))
    });
    Ok(ConsistencyReport { consistent: violations.is_empty(), shared_events, violations })
}

fn compare_contexts(
    mps: &MultiProbabilitySpace,
    (a, left): (usize, &[CellUnion]),
    (b, right): (usize, &[CellUnion]),
    tol: f64,
) -> (usize, Vec<Violation>) {
    let mut shared = 0;
    let mut out = Vec::new();
    for u in left {
        let start = right.partition_point(|v| v.dim < u.dim);
        for v in right[start..].iter().take_while(|v| v.dim == u.dim) {
            // The diagonal distance is a lower bound on the Frobenius distance.
            let diag_gap: f64 =
                u.diag.iter().zip(&v.diag).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if diag_gap > tol::MATCH
                || u.projector.distance(&v.projector).expect("same shape") > tol::MATCH
            {
                continue;
            }
            shared += 1;
            let delta = (u.prob - v.prob).abs();
            if delta > tol {
                out.push(Violation {
                    context_a: mps.family.id(a).to_owned(),
                    cells_a: u.cells.clone(),
                    prob_a: u.prob,
                    context_b: mps.family.id(b).to_owned(),
                    cells_b: v.cells.clone(),
                    prob_b: v.prob,
                    delta,
                });
            }
        }
    }
    (shared, out)
}

/// A map `Π ↦ μ(Π)` on orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumProbabilityDistribution {
    /// `μ(Π) = tr(ρΠ)`.
    Density(DensityMatrix),
    /// Explicit values on a finite set of projectors. The zero projector maps
    /// to 0 unless listed.
    Table(Vec<(CMatrix, f64)>),
}

impl QuantumProbabilityDistribution {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Density(rho) => Some(rho.dim()),
            Self::Table(rows) => rows.first().map(|(p, _)| p.rows()),
        }
    }

    pub fn mu(&self, projector: &CMatrix) -> Result<f64> {
        match self {
            Self::Density(rho) => Ok(rho.matrix().hs_inner(projector)?.re),
            Self::Table(rows) => {
                for (p, value) in rows {
                    if p.rows() == projector.rows() && p.distance(projector)? <= tol::MATCH {
                        return Ok(*value);
                    }
                }
                if projector.frobenius_norm() <= tol::MATCH {
                    Ok(0.0)
                } else {
                    Err(Error::ProjectorNotInTable)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityViolation {
    pub family: usize,
    /// `μ(Σ_k Π_k)`.
    pub mu_of_sum: f64,
    /// `Σ_k μ(Π_k)`.
    pub sum_of_mu: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub additive: bool,
    pub families_checked: usize,
    pub violations: Vec<AdditivityViolation>,
}

/// Checks `μ(Σ Π_k) = Σ μ(Π_k)` on each family of mutually orthogonal projectors.
pub fn check_additivity(
    mu: &QuantumProbabilityDistribution,
    families: &[Vec<CMatrix>],
    tol: f64,
) -> Result<AdditivityReport> {
    let mut violations = Vec::new();
    for (f, family) in families.iter().enumerate() {
        let Some(first) = family.first() else { continue };
        let n = first.require_square()?;
        for (j, pj) in family.iter().enumerate() {
            for (k, pk) in family.iter().enumerate().skip(j + 1) {
                if pj.matmul(pk)?.frobenius_norm() > tol::MATCH {
                    return Err(Error::NotOrthogonalFamily(j, k));
                }
            }
        }
        let mut sum = CMatrix::zeros(n, n);
        for p in family {
            sum = &sum + p;
        }
        let mu_of_sum = mu.mu(&sum)?;
        let sum_of_mu = family.iter().map(|p| mu.mu(p)).sum::<Result<f64>>()?;
        let delta = (mu_of_sum - sum_of_mu).abs();
        if delta > tol {
            violations.push(AdditivityViolation { family: f, mu_of_sum, sum_of_mu, delta });
        }
    }
    Ok(AdditivityReport {
        additive: violations.is_empty(),
        families_checked: families.len(),
        violations,
    })
}

/// Experimental: least-squares Hermitian `ρ` with `tr(ρΠ) ≈ μ(Π)` over a
/// table-backed distribution, using the Hilbert–Schmidt-orthonormal basis of
/// Hermitian matrices. Returns the fitted matrix and the residual norm; the
/// matrix is a density only if the table came from one, so callers should
/// validate it with [`DensityMatrix::new`].
pub fn fit_density(table: &[(CMatrix, f64)]) -> Result<(CMatrix, f64)> {
    let n = table.first().ok_or(Error::ProjectorNotInTable)?.0.require_square()?;
    let basis = hermitian_basis(n);
    let rows = table.len();
    let mut design = DMatrix::<f64>::zeros(rows, basis.len());
    let mut target = DVector::<f64>::zeros(rows);
    for (r, (p, value)) in table.iter().enumerate() {
        if p.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.rows() });
        }
        for (c, g) in basis.iter().enumerate() {
            design[(r, c)] = g.hs_inner(p)?.re;
        }
        target[r] = *value;
    }
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::InvalidDecomposition(e.to_string()))?;
    let residual = (&design * &coeffs - &target).norm();
    let mut rho = CMatrix::zeros(n, n);
    for (g, x) in basis.iter().zip(coeffs.iter()) {
        rho = &rho + &g.scale(*x);
    }
    Ok((rho, residual))
}

fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(j, j)] = Complex::new(1.0, 0.0);
        out.push(e);
        for k in j + 1..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(j, k)] = Complex::new(r, 0.0);
            sym[(k, j)] = Complex::new(r, 0.0);
            out.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(j, k)] = Complex::new(0.0, r);
            anti[(k, j)] = Complex::new(0.0, -r);
            out.push(anti);
        }
    }
    out
}
