//! Default numerical tolerances.
//!
//! Matrix-level tolerances are relative to `1 + ‖·‖_F` of the operand
//! unless stated otherwise.

/// Hermiticity check.
pub const HERMITIAN: f64 = 1e-10;
/// Orthonormality of bases and cross-orthogonality of subspaces.
pub const ORTHO: f64 = 1e-10;
/// Eigen-decomposition residuals.
pub const EIGEN: f64 = 1e-9;
/// `|‖ψ‖² − 1|` for a wave vector to count as normalized.
pub const NORM: f64 = 1e-9;
/// Negative eigenvalues of a density matrix down to `-PSD` are clamped to 0.
pub const PSD: f64 = 1e-9;
/// `|tr ρ − 1|` and `|Σ q − 1|` acceptance.
pub const TRACE: f64 = 1e-9;
/// Relative residual for eigen-pairing membership.
pub const MEMBER: f64 = 1e-8;
/// Projector Frobenius distance for matching subspaces across contexts.
pub const MATCH: f64 = 1e-8;
/// Rounding band around `[0, 1]` that is silently clamped.
pub const PROB_CLAMP: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius norm is below this times `‖M‖_F`.
pub const JACOBI_OFFDIAG: f64 = 1e-13;
/// Jacobi sweep limit.
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Default eigenvalue clustering width for a matrix of Frobenius norm `frob`.
pub fn cluster_default(frob: f64) -> f64 {
    f64::max(1e-8, 1e-10 * frob)
}
