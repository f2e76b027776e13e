//! Three-level quantum measurement trees and their probability metaspace.
//!
//! The preparation node picks a context `c` with probability `q_c`; the
//! context's measurement node runs the trace-rule lottery
//! `P(E_λ) = tr(ρ_c Π_{E_λ})` over the eigenspaces of `A_c`; each terminal
//! node carries one eigenvalue `λ ∈ s^{A_c}`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ortho::{OrthoEvent, OrthoPartition};
use crate::spectral::HermitianObservable;
use crate::state::{trace_rule, DensityMatrix};
use crate::tol;

/// Name of the generator behind [`sample`], recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), stream per batch";
/// Samples drawn from one RNG stream.
pub const SAMPLE_BATCH: usize = 8192;

/// An observable paired with the state it is measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalContext {
    pub id: String,
    pub observable: HermitianObservable,
    pub state: DensityMatrix,
}

impl ExperimentalContext {
    pub fn new(id: impl Into<String>, observable: HermitianObservable, state: DensityMatrix) -> Result<Self> {
        if observable.dim() != state.dim() {
            return Err(Error::DimensionMismatch { expected: observable.dim(), found: state.dim() });
        }
        Ok(Self { id: id.into(), observable, state })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalNode {
    pub lambda: f64,
    pub multiplicity: usize,
    pub probability: f64,
    /// Whether a detector records the outcome. Carried for bookkeeping only;
    /// every terminal is treated as observed.
    pub observed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementNode {
    pub context_id: String,
    pub terminals: Vec<TerminalNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTree {
    contexts: Vec<ExperimentalContext>,
    nodes: Vec<MeasurementNode>,
}

impl MeasurementTree {
    pub fn contexts(&self) -> &[ExperimentalContext] {
        &self.contexts
    }

    /// Children of the preparation node, one per context.
    pub fn nodes(&self) -> &[MeasurementNode] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.contexts[0].observable.dim()
    }

    /// `q_c · P^{A_c,ρ_c}(E_λ)` for terminal `terminal` of context `context`.
    pub fn path_probability(&self, q: &ContextPmf, context: usize, terminal: usize) -> f64 {
        q.weights[context] * self.nodes[context].terminals[terminal].probability
    }
}

pub fn build_tree(contexts: Vec<ExperimentalContext>) -> Result<MeasurementTree> {
    let n = contexts.first().ok_or(Error::EmptyContexts)?.observable.dim();
    for (i, c) in contexts.iter().enumerate() {
        if c.observable.dim() != n || c.state.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.state.dim().max(c.observable.dim()) });
        }
        if contexts[..i].iter().any(|o| o.id == c.id) {
            return Err(Error::DuplicateContext(c.id.clone()));
        }
    }
    let nodes = contexts
        .iter()
        .map(|c| {
            let mut terminals = c
                .observable
                .decomposition()
                .parts()
                .iter()
                .map(|p| {
                    Ok(TerminalNode {
                        lambda: p.lambda,
                        multiplicity: p.dim(),
                        probability: trace_rule(&c.state, &p.subspace)?,
                        observed: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            terminals.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            let total: f64 = terminals.iter().map(|t| t.probability).sum();
            debug_assert!((total - 1.0).abs() <= tol::TRACE * n as f64, "lottery sums to {total}");
            Ok(MeasurementNode { context_id: c.id.clone(), terminals })
        })
        .collect::<Result<_>>()?;
    Ok(MeasurementTree { contexts, nodes })
}

/// Probability mass function over contexts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextPmf {
    weights: Vec<f64>,
}

impl ContextPmf {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPmf("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidPmf(format!("weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidPmf(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Self {
        Self { weights: vec![1.0 / k as f64; k] }
    }

    /// All mass on context `index` of `k`.
    pub fn point(k: usize, index: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, k: usize) -> Result<()> {
        if self.weights.len() == k {
            Ok(())
        } else {
            Err(Error::InvalidPmf(format!("{} weights for {k} contexts", self.weights.len())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub index: usize,
    pub context: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRun {
    pub rng: &'static str,
    pub seed: u64,
    pub batch_size: usize,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

/// Draws `count` (context, eigenvalue) outcomes.
///
/// Batch `b` uses stream `b` of a ChaCha8 generator seeded with `seed`, so the
/// output is identical however the batches are scheduled.
pub fn sample(tree: &MeasurementTree, q: &ContextPmf, seed: u64, count: usize) -> Result<SampleRun> {
    q.check_len(tree.nodes.len())?;
    let pick_context = WeightedIndex::new(&q.weights).map_err(|e| Error::InvalidPmf(e.to_string()))?;
    let lotteries = tree
        .nodes
        .iter()
        .map(|node| {
            WeightedIndex::new(node.terminals.iter().map(|t| t.probability))
                .map_err(|e| Error::InvalidPmf(format!("context {:?}: {e}", node.context_id)))
        })
        .collect::<Result<Vec<_>>>()?;

    let batches = count.div_ceil(SAMPLE_BATCH);
    let samples: Vec<Sample> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let start = b * SAMPLE_BATCH;
            let end = (start + SAMPLE_BATCH).min(count);
            let (pick_context, lotteries) = (&pick_context, &lotteries);
            (start..end)
                .map(move |index| {
                    let context = pick_context.sample(&mut rng);
                    let terminal = lotteries[context].sample(&mut rng);
                    Sample { index, context, lambda: tree.nodes[context].terminals[terminal].lambda }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleRun { rng: RNG_ALGORITHM, seed, batch_size: SAMPLE_BATCH, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetaCellKind {
    Eigenspace { lambda: f64, multiplicity: usize },
    Residual,
}

/// A cell `E × {c}` of the metaspace partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaCell {
    pub context: usize,
    pub context_id: String,
    #[serde(flatten)]
    pub kind: MetaCellKind,
    pub probability: f64,
}

/// The flattened probability space over `ℂⁿ × C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metaspace {
    q: ContextPmf,
    partitions: Vec<OrthoPartition>,
    cells: Vec<MetaCell>,
}

impl Metaspace {
    pub fn q(&self) -> &ContextPmf {
        &self.q
    }

    pub fn cells(&self) -> &[MetaCell] {
        &self.cells
    }

    /// The ortho-partition of context `context`, for building events.
    pub fn partition(&self, context: usize) -> &OrthoPartition {
        &self.partitions[context]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.probability).sum()
    }

    /// `P^M_q(E × {c})`, summed over the atoms of `E`.
    pub fn probability(&self, context: usize, event: &OrthoEvent) -> Result<f64> {
        let partition = self
            .partitions
            .get(context)
            .ok_or(Error::InvalidPmf(format!("no context {context}")))?;
        if event.partition() != partition {
            return Err(Error::PartitionMismatch);
        }
        let atoms = event.cell_indices();
        let decomposition = partition.decomposition();
        Ok(self
            .cells
            .iter()
            .filter(|c| c.context == context)
            .filter(|c| match c.kind {
                MetaCellKind::Eigenspace { lambda, .. } => {
                    decomposition.position(lambda).is_some_and(|i| atoms.contains(&i))
                }
                MetaCellKind::Residual => event.residual(),
            })
            .map(|c| c.probability)
            .fold(0.0, |acc, p| acc + p))
    }
}

/// Metaspace with `P(L_λ × {c}) = q_c tr(ρ_c Π_{L_λ})` and `P(R_c × {c}) = 0`.
pub fn reduce_to_metaspace(contexts: Vec<ExperimentalContext>, q: &ContextPmf) -> Result<Metaspace> {
    let tree = build_tree(contexts)?;
    tree_metaspace(&tree, q)
}

/// Metaspace of an existing tree; cell probabilities are the tree's path probabilities.
pub fn tree_metaspace(tree: &MeasurementTree, q: &ContextPmf) -> Result<Metaspace> {
    q.check_len(tree.nodes.len())?;
    let mut cells = Vec::new();
    for (c, node) in tree.nodes.iter().enumerate() {
        for (t, terminal) in node.terminals.iter().enumerate() {
            cells.push(MetaCell {
                context: c,
                context_id: node.context_id.clone(),
                kind: MetaCellKind::Eigenspace {
                    lambda: terminal.lambda,
                    multiplicity: terminal.multiplicity,
                },
                probability: tree.path_probability(q, c, t),
            });
        }
        cells.push(MetaCell {
            context: c,
            context_id: node.context_id.clone(),
            kind: MetaCellKind::Residual,
            probability: 0.0,
        });
    }
    let partitions = tree
        .contexts
        .iter()
        .map(|c| c.observable.to_function().partition().clone())
        .collect();
    Ok(Metaspace { q: q.clone(), partitions, cells })
}
