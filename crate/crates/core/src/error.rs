use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has {0} entries but at least one is not finite")]
    NonFinite(usize),

    #[error("invalid matrix layout: {0}")]
    InvalidLayout(String),

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("Jacobi eigensolver did not converge within {max_sweeps} sweeps")]
    NoConvergence { max_sweeps: usize },

    #[error("vector is zero")]
    ZeroVector,

    #[error("basis is not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("vectors are linearly dependent")]
    RankDeficient,

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("events belong to different partitions")]
    PartitionMismatch,

    #[error("cell index {index} out of range for partition with {cells} cells")]
    CellOutOfRange { index: usize, cells: usize },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("not an ortho-probability measure: {0}")]
    NotProbabilityMeasure(String),

    #[error("probability {0} is outside the admissible rounding band")]
    ProbabilityOutOfRange(f64),

    #[error("invalid mixture weights: {0}")]
    WeightInvalid(String),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("projector family is not mutually orthogonal (pair {0}, {1})")]
    NotOrthogonalFamily(usize, usize),

    #[error("projector is not in the table")]
    ProjectorNotInTable,

    #[error("expectation cross-check failed: spectral {spectral} vs quadratic form {direct}")]
    ExpectationMismatch { spectral: f64, direct: f64 },

    #[error("context list is empty")]
    EmptyContexts,

    #[error("duplicate context id {0:?}")]
    DuplicateContext(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
