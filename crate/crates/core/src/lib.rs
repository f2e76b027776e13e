//! Finite-dimensional quantum probability on ortho-algebras.
//!
//! Hermitian observables are identified with numerically labelled orthogonal
//! decompositions of `ℂⁿ` and with ortho-measurable functions; states induce
//! probability measures on the resulting ortho-algebras through the Born and
//! trace rules. On top of that sit multi-context consistency audits and
//! three-level quantum measurement trees with their probability metaspace.

pub mod contexts;
pub mod error;
pub mod json;
pub mod linalg;
pub mod ortho;
pub mod random;
pub mod spectral;
pub mod state;
pub mod tol;
pub mod tree;

pub use contexts::{
    check_additivity, check_consistency, fit_density, AdditivityReport, AdditivityViolation, ConsistencyReport,
    ContextFamily, MultiProbabilitySpace, QuantumProbabilityDistribution, Violation,
};
pub use error::{Error, Result};
pub use linalg::{hermitian_eigensolve, is_psd, CMatrix, Complex, Eigen, Subspace, WaveVector};
pub use ortho::{classify, preimage, Cell, ExtendedBorelSet, Interval, OrthoEvent, OrthoPartition};
pub use spectral::{
    decompose, subspace_equal, synthesize, ExtendedReal, HermitianObservable, NumDecomposition,
    OrthoMeasurableFunction, Part,
};
pub use state::{
    born_prob, born_table, cdf, classify_state, density_from_measure, expectation, measure_from_density, mixture,
    trace_rule, DensityMatrix, Mixture, ObservableCdf, OrthoProbabilityMeasure, State, StateKind,
};
pub use tree::{
    build_tree, reduce_to_metaspace, sample, tree_metaspace, ContextPmf, ExperimentalContext, MeasurementNode,
    MeasurementTree, MetaCell, MetaCellKind, Metaspace, Sample, SampleRun, TerminalNode,
};
