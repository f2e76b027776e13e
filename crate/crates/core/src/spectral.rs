//! Hermitian observables, their numerically identified orthogonal
//! decompositions, and the ortho-measurable eigen-pairing function.
//!
//! The three representations are interchangeable:
//!
//! * [`HermitianObservable`]: a matrix `A = Σ_λ λ Π_{L_λ}`;
//! * [`NumDecomposition`]: the labelled family `(λ, L_λ)`;
//! * [`OrthoMeasurableFunction`]: the map `x ↦ λ` on `L_λ ∖ {0}` and `*`
//!   everywhere else, stored through its restricted graph.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensolve, CMatrix, Complex, Subspace};
use crate::ortho::OrthoPartition;
use crate::tol;

/// One labelled part `(λ, L_λ)` of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub lambda: f64,
    pub subspace: Subspace,
}

impl Part {
    pub fn new(lambda: f64, subspace: Subspace) -> Self {
        Self { lambda, subspace }
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}

/// A numerically identified orthogonal decomposition of `ℂⁿ`.
///
/// Parts are pairwise orthogonal, their dimensions sum to `n`, and the
/// identifiers are pairwise distinct. Part order is preserved and defines
/// the cell indices used by [`crate::ortho::OrthoEvent`].
#[derive(Debug, Clone, PartialEq)]
pub struct NumDecomposition {
    n: usize,
    parts: Vec<Part>,
}

impl NumDecomposition {
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        let n = parts
            .first()
            .map(|p| p.subspace.ambient_dim())
            .ok_or_else(|| Error::InvalidDecomposition("no parts".into()))?;
        if let Some(p) = parts.iter().find(|p| p.subspace.ambient_dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.subspace.ambient_dim() });
        }
        if let Some(p) = parts.iter().find(|p| !p.lambda.is_finite()) {
            return Err(Error::InvalidDecomposition(format!("identifier {} is not finite", p.lambda)));
        }
        for (i, a) in parts.iter().enumerate() {
            for (j, b) in parts.iter().enumerate().skip(i + 1) {
                if a.lambda == b.lambda {
                    return Err(Error::InvalidDecomposition(format!(
                        "identifier {} labels parts {i} and {j}",
                        a.lambda
                    )));
                }
                let overlap = a.subspace.overlap(&b.subspace)?;
                if overlap > tol::ORTHO {
                    return Err(Error::InvalidDecomposition(format!(
                        "parts {i} and {j} are not orthogonal (overlap {overlap:e})"
                    )));
                }
            }
        }
        let total: usize = parts.iter().map(Part::dim).sum();
        if total != n {
            return Err(Error::InvalidDecomposition(format!(
                "dimensions sum to {total}, expected {n}"
            )));
        }
        Ok(Self { n, parts })
    }

    /// Canonical basis decomposition `{(j, [e_j])}`.
    pub fn canonical(n: usize) -> Self {
        let parts = (0..n)
            .map(|j| Part::new(j as f64, Subspace::coordinate(n, &[j]).expect("valid index")))
            .collect();
        Self { n, parts }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn identifiers(&self) -> impl Iterator<Item = f64> + '_ {
        self.parts.iter().map(|p| p.lambda)
    }

    pub fn position(&self, lambda: f64) -> Option<usize> {
        self.parts.iter().position(|p| p.lambda == lambda)
    }

    /// `Σ_λ λ Π_{L_λ}`.
    pub fn synthesize(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for part in &self.parts {
            out = &out + &part.subspace.projector().scale(part.lambda);
        }
        out
    }

    /// Index of the part containing `x` (relative residual `tol`), if any.
    /// The zero vector lies in no part.
    pub fn locate(&self, x: &[Complex], tol: f64) -> Result<Option<usize>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        if x.iter().all(|z| *z == Complex::new(0.0, 0.0)) {
            return Ok(None);
        }
        for (i, part) in self.parts.iter().enumerate() {
            if part.subspace.contains(x, tol)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// `ℝ ∪ {*}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Real(f64),
    Star,
}

impl ExtendedReal {
    pub fn as_real(self) -> Option<f64> {
        match self {
            ExtendedReal::Real(x) => Some(x),
            ExtendedReal::Star => None,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Real(x) => write!(f, "{x}"),
            ExtendedReal::Star => f.write_str("*"),
        }
    }
}

/// A Hermitian matrix together with its clustered spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    matrix: CMatrix,
    decomposition: NumDecomposition,
    cluster_width: f64,
    chained: bool,
}

impl HermitianObservable {
    /// Decomposes with the default clustering width.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let width = tol::cluster_default(matrix.frobenius_norm());
        decompose(matrix, width)
    }

    /// Builds the observable `Σ λ Π_λ` of an existing decomposition,
    /// keeping the decomposition as given.
    pub fn from_decomposition(decomposition: NumDecomposition) -> Self {
        let matrix = decomposition.synthesize();
        let cluster_width = tol::cluster_default(matrix.frobenius_norm());
        Self { matrix, decomposition, cluster_width, chained: false }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn decomposition(&self) -> &NumDecomposition {
        &self.decomposition
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cluster_width(&self) -> f64 {
        self.cluster_width
    }

    /// Set when single-linkage merged a chain whose extreme raw eigenvalues
    /// are further apart than the clustering width.
    pub fn cluster_chained(&self) -> bool {
        self.chained
    }

    /// Distinct eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.decomposition.identifiers().collect();
        s.sort_by(f64::total_cmp);
        s
    }

    /// `f^A(x)`: the eigenvalue whose eigenspace contains `x`, or `*`.
    pub fn eigen_pairing(&self, x: &[Complex], member_tol: f64) -> Result<ExtendedReal> {
        Ok(match self.decomposition.locate(x, member_tol)? {
            Some(i) => ExtendedReal::Real(self.decomposition.parts[i].lambda),
            None => ExtendedReal::Star,
        })
    }

    pub fn to_function(&self) -> OrthoMeasurableFunction {
        OrthoMeasurableFunction { partition: OrthoPartition::new(self.decomposition.clone()) }
    }

    pub fn from_function(f: &OrthoMeasurableFunction) -> Self {
        Self::from_decomposition(f.decomposition().clone())
    }
}

/// Spectral decomposition with eigenvalue clustering.
///
/// Consecutive sorted eigenvalues no more than `cluster_width` apart are
/// merged (single linkage). Each cluster is labelled by the mean of its raw
/// eigenvalues and owns the span of their eigenvectors.
pub fn decompose(matrix: CMatrix, cluster_width: f64) -> Result<HermitianObservable> {
    let eig = hermitian_eigensolve(&matrix)?;
    let n = eig.values.len();

    let mut clusters: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || eig.values[i] - eig.values[i - 1] > cluster_width {
            clusters.push(start..i);
            start = i;
        }
    }

    let mut chained = false;
    let mut parts = Vec::with_capacity(clusters.len());
    for range in clusters {
        let raw = &eig.values[range.clone()];
        if raw[raw.len() - 1] - raw[0] > cluster_width {
            chained = true;
        }
        let lambda = raw.iter().sum::<f64>() / raw.len() as f64;
        let columns: Vec<Vec<Complex>> = range.map(|j| eig.vectors.column(j)).collect();
        let subspace = Subspace::span(&CMatrix::from_columns(&columns)?)?;
        parts.push(Part::new(lambda, subspace));
    }
    if chained {
        log::debug!("eigenvalue clustering chained beyond width {cluster_width:e}");
    }
    let decomposition = NumDecomposition::new(parts)?;
    Ok(HermitianObservable { matrix, decomposition, cluster_width, chained })
}

/// `decompose ∘ synthesize` inverse direction.
pub fn synthesize(decomposition: &NumDecomposition) -> CMatrix {
    decomposition.synthesize()
}

/// Basis-independent subspace equality.
pub fn subspace_equal(s: &Subspace, t: &Subspace, tol: f64) -> Result<bool> {
    s.equals(t, tol)
}

/// An ortho-measurable function `ℂⁿ → ℝ ∪ {*}`, held through its restricted
/// graph `Γ = ∪_λ (L_λ ∖ {0}) × {λ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMeasurableFunction {
    partition: OrthoPartition,
}

impl OrthoMeasurableFunction {
    /// Builds the function taking value `λ` on each `L ∖ {0}` of the graph.
    /// Values must be distinct and the subspaces an orthogonal decomposition.
    pub fn from_graph(graph: Vec<(Subspace, f64)>) -> Result<Self> {
        let parts = graph.into_iter().map(|(s, v)| Part::new(v, s)).collect();
        Ok(Self { partition: OrthoPartition::new(NumDecomposition::new(parts)?) })
    }

    pub fn graph(&self) -> impl Iterator<Item = (&Subspace, f64)> {
        self.decomposition().parts().iter().map(|p| (&p.subspace, p.lambda))
    }

    pub fn decomposition(&self) -> &NumDecomposition {
        self.partition.decomposition()
    }

    pub fn partition(&self) -> &OrthoPartition {
        &self.partition
    }

    pub fn evaluate(&self, x: &[Complex], member_tol: f64) -> Result<ExtendedReal> {
        let d = self.decomposition();
        Ok(match d.locate(x, member_tol)? {
            Some(i) => ExtendedReal::Real(d.parts()[i].lambda),
            None => ExtendedReal::Star,
        })
    }
}
