//! Quantum states as probability measures.
//!
//! A [`WaveVector`] gives Born-rule probabilities `ψ*Π_Lψ / ψ*ψ`; a
//! [`DensityMatrix`] gives trace-rule probabilities `tr(ρΠ_L)`. A density
//! matrix read on its own eigen-decomposition is an
//! [`OrthoProbabilityMeasure`] whose cell probabilities are `m_λ·λ`.

use crate::error::{Error, Result};
use crate::linalg::{dot, fix_phase, CMatrix, Subspace, WaveVector};
use crate::ortho::{Cell, OrthoEvent, OrthoPartition};
use crate::spectral::{decompose, HermitianObservable, NumDecomposition, Part};
use crate::tol;

/// Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    decomposition: NumDecomposition,
}

impl DensityMatrix {
    /// Validates `matrix`. Eigenvalues in `[-tol::PSD, 0)` are clamped to zero
    /// and the identifiers renormalized to unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let reject = |why: String| Error::NotDensityMatrix(why);
        matrix.require_square().map_err(|e| reject(e.to_string()))?;
        if !matrix.is_hermitian(tol::HERMITIAN)? {
            return Err(reject("not Hermitian".into()));
        }
        let obs = decompose(matrix.clone(), tol::cluster_default(matrix.frobenius_norm()))?;
        let parts = obs.decomposition().parts();
        let min = parts.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
        if min < -tol::PSD {
            return Err(reject(format!("eigenvalue {min:e} is negative")));
        }
        let trace: f64 = parts.iter().map(|p| p.lambda * p.dim() as f64).sum();
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(reject(format!("trace {trace} is not 1")));
        }
        let clamped: Vec<Part> =
            parts.iter().map(|p| Part::new(p.lambda.max(0.0), p.subspace.clone())).collect();
        let total: f64 = clamped.iter().map(|p| p.lambda * p.dim() as f64).sum();
        let parts = clamped
            .into_iter()
            .map(|p| Part::new(p.lambda / total, p.subspace))
            .collect();
        Ok(Self { matrix, decomposition: NumDecomposition::new(parts)? })
    }

    /// `Σ λ Π_λ` for a decomposition numerically identified by probability.
    pub fn from_decomposition(decomposition: NumDecomposition) -> Result<Self> {
        check_probability_labels(&decomposition).map_err(Error::NotDensityMatrix)?;
        Ok(Self { matrix: decomposition.synthesize(), decomposition })
    }

    /// `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let whole = Part::new(1.0 / n as f64, Subspace::whole(n));
        Self::from_decomposition(NumDecomposition::new(vec![whole]).expect("single part"))
            .expect("I/n is a density")
    }

    /// `ψψ*/‖ψ‖²`.
    pub fn pure(psi: &WaveVector) -> Self {
        Self::new(psi.projector()).expect("rank-one projector is a density")
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
}

fn check_probability_labels(d: &NumDecomposition) -> Result<(), String> {
    if let Some(p) = d.parts().iter().find(|p| p.lambda < 0.0) {
        return Err(format!("identifier {} is negative", p.lambda));
    }
    let total: f64 = d.parts().iter().map(|p| p.lambda * p.dim() as f64).sum();
    if (total - 1.0).abs() > tol::TRACE {
        return Err(format!("Σ m·λ = {total}, expected 1"));
    }
    Ok(())
}

/// Probability measure on `Σ^D` with `P(L_d ∖ {0}) = m_d λ_d` and `P(R^D) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoProbabilityMeasure {
    partition: OrthoPartition,
    cell_probs: Vec<f64>,
}

impl OrthoProbabilityMeasure {
    pub fn new(decomposition: NumDecomposition) -> Result<Self> {
        check_probability_labels(&decomposition).map_err(Error::NotProbabilityMeasure)?;
        let cell_probs = decomposition.parts().iter().map(|p| p.dim() as f64 * p.lambda).collect();
        Ok(Self { partition: OrthoPartition::new(decomposition), cell_probs })
    }

    pub fn partition(&self) -> &OrthoPartition {
        &self.partition
    }

    pub fn decomposition(&self) -> &NumDecomposition {
        self.partition.decomposition()
    }

    pub fn cell_probs(&self) -> &[f64] {
        &self.cell_probs
    }

    pub fn residual_prob(&self) -> f64 {
        0.0
    }

    pub fn probability(&self, event: &OrthoEvent) -> Result<f64> {
        if event.partition() != &self.partition {
            return Err(Error::PartitionMismatch);
        }
        Ok(event.cell_indices().into_iter().fold(0.0, |acc, i| acc + self.cell_probs[i]))
    }

    pub fn cell_probability(&self, cell: Cell) -> f64 {
        match cell {
            Cell::Subspace(i) => self.cell_probs[i],
            Cell::Residual => 0.0,
        }
    }
}

pub fn measure_from_density(rho: &DensityMatrix) -> OrthoProbabilityMeasure {
    OrthoProbabilityMeasure::new(rho.decomposition.clone()).expect("density labels are probabilities")
}

pub fn density_from_measure(measure: &OrthoProbabilityMeasure) -> DensityMatrix {
    DensityMatrix::from_decomposition(measure.decomposition().clone())
        .expect("measure labels are probabilities")
}

/// Either kind of state, borrowed.
#[derive(Debug, Clone, Copy)]
pub enum State<'a> {
    Wave(&'a WaveVector),
    Density(&'a DensityMatrix),
}

impl<'a> From<&'a WaveVector> for State<'a> {
    fn from(psi: &'a WaveVector) -> Self {
        State::Wave(psi)
    }
}

impl<'a> From<&'a DensityMatrix> for State<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        State::Density(rho)
    }
}

impl State<'_> {
    pub fn dim(&self) -> usize {
        match self {
            State::Wave(psi) => psi.dim(),
            State::Density(rho) => rho.dim(),
        }
    }

    /// Probability of `L ∖ {0}`: Born rule or trace rule.
    pub fn probability(&self, subspace: &Subspace) -> Result<f64> {
        match self {
            State::Wave(psi) => born_prob(psi, subspace),
            State::Density(rho) => trace_rule(rho, subspace),
        }
    }

    /// `ψ*Aψ/ψ*ψ` or `tr(ρA)`.
    fn quadratic_value(&self, a: &CMatrix) -> Result<f64> {
        match self {
            State::Wave(psi) => Ok(a.quadratic_form(psi.components())? / psi.norm_sqr()),
            State::Density(rho) => Ok(rho.matrix.hs_inner(a)?.re),
        }
    }
}

/// Snaps values within `band` of `[0, 1]` onto it.
fn clamp_probability(p: f64, band: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else if (-band..0.0).contains(&p) {
        Ok(0.0)
    } else if p > 1.0 && p <= 1.0 + band {
        Ok(1.0)
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

fn require_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Born rule `ψ*Π_Lψ`, divided by `ψ*ψ` when `ψ` is not normalized.
pub fn born_prob(psi: &WaveVector, subspace: &Subspace) -> Result<f64> {
    require_dim(subspace.ambient_dim(), psi.dim())?;
    let p = subspace.projected_norm_sqr(psi.components())? / psi.norm_sqr();
    clamp_probability(p, tol::PROB_CLAMP)
}

/// Trace rule `tr(ρ Π_L)`.
pub fn trace_rule(rho: &DensityMatrix, subspace: &Subspace) -> Result<f64> {
    require_dim(subspace.ambient_dim(), rho.dim())?;
    let p = rho.matrix.hs_inner(&subspace.projector())?.re;
    // Validation admits eigenvalues down to -PSD, so allow that much per dimension.
    clamp_probability(p, tol::PROB_CLAMP + rho.dim() as f64 * tol::PSD)
}

/// Step-function distribution of an observable in a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableCdf {
    /// `(λ, P(λ))`, ascending in `λ`.
    atoms: Vec<(f64, f64)>,
}

impl ObservableCdf {
    pub fn new(obs: &HermitianObservable, state: State<'_>) -> Result<Self> {
        require_dim(obs.dim(), state.dim())?;
        let mut atoms = obs
            .decomposition()
            .parts()
            .iter()
            .map(|p| Ok((p.lambda, state.probability(&p.subspace)?)))
            .collect::<Result<Vec<_>>>()?;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `F(r) = Σ_{λ ≤ r} P(λ)`.
    pub fn evaluate(&self, r: f64) -> f64 {
        self.atoms.iter().take_while(|(l, _)| *l <= r).fold(0.0, |acc, (_, p)| acc + p)
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(l, p)| l * p).sum()
    }
}

pub fn cdf(obs: &HermitianObservable, state: State<'_>, r: f64) -> Result<f64> {
    Ok(ObservableCdf::new(obs, state)?.evaluate(r))
}

/// `E[A] = Σ_λ λ P(λ)`, cross-checked against `ψ*Aψ` (or `tr(ρA)`).
pub fn expectation(obs: &HermitianObservable, state: State<'_>) -> Result<f64> {
    let spectral = ObservableCdf::new(obs, state)?.mean();
    let direct = state.quadratic_value(obs.matrix())?;
    // Cluster identifiers may sit up to one clustering width from the raw eigenvalues.
    let slack = 1e-10 * (1.0 + obs.matrix().frobenius_norm()) + obs.cluster_width();
    if (spectral - direct).abs() > slack {
        return Err(Error::ExpectationMismatch { spectral, direct });
    }
    Ok(spectral)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Pure(WaveVector),
    Mixed,
}

/// Pure iff the spectrum is `{0, 1}` (or `{1}` when `n = 1`) with a
/// one-dimensional unit eigenspace.
pub fn classify_state(rho: &DensityMatrix) -> StateKind {
    let width = tol::cluster_default(rho.matrix.frobenius_norm());
    let parts = rho.decomposition.parts();
    let binary = parts.iter().all(|p| p.lambda.abs() <= width || (p.lambda - 1.0).abs() <= width);
    let unit: Vec<&Part> = parts.iter().filter(|p| (p.lambda - 1.0).abs() <= width).collect();
    match (binary, unit.as_slice()) {
        (true, [one]) if one.dim() == 1 => {
            let mut phi = one.subspace.basis().column(0);
            fix_phase(&mut phi);
            StateKind::Pure(WaveVector::new(phi).expect("basis vector is nonzero"))
        }
        _ => StateKind::Mixed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub density: DensityMatrix,
    /// All pairs `|φ_j*φ_k| ≤ tol::ORTHO`.
    pub is_ortho: bool,
}

/// `ρ = Σ α_k φ_k φ_k*`. Unnormalized `φ_k` are normalized first.
pub fn mixture(weights: &[f64], states: &[WaveVector]) -> Result<Mixture> {
    if weights.is_empty() || weights.len() != states.len() {
        return Err(Error::WeightInvalid(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
        return Err(Error::WeightInvalid(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol::TRACE {
        return Err(Error::WeightInvalid(format!("weights sum to {total}")));
    }
    let n = states[0].dim();
    let phis: Vec<WaveVector> = states
        .iter()
        .map(|s| {
            require_dim(n, s.dim())?;
            Ok(s.normalized())
        })
        .collect::<Result<_>>()?;
    let mut rho = CMatrix::zeros(n, n);
    for (w, phi) in weights.iter().zip(&phis) {
        rho = &rho + &CMatrix::outer(phi.components()).scale(*w);
    }
    let mut is_ortho = true;
    for (j, a) in phis.iter().enumerate() {
        for b in &phis[j + 1..] {
            if dot(a.components(), b.components()).norm() > tol::ORTHO {
                is_ortho = false;
            }
        }
    }
    Ok(Mixture { density: DensityMatrix::new(rho)?, is_ortho })
}

/// Per-cell Born probabilities of `ψ` on every part of `d`.
pub fn born_table(psi: &WaveVector, d: &NumDecomposition) -> Result<Vec<f64>> {
    d.parts().iter().map(|p| born_prob(psi, &p.subspace)).collect()
}
