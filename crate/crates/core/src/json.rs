//! JSON interchange formats.
//!
//! Numbers are written by `serde_json`, which emits the shortest string that
//! round-trips to the same `f64`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contexts::{ContextFamily, MultiProbabilitySpace};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex, Subspace};
use crate::ortho::{ExtendedBorelSet, Interval, OrthoEvent, OrthoPartition};
use crate::spectral::{HermitianObservable, NumDecomposition, Part};
use crate::state::DensityMatrix;
use crate::tree::{ContextPmf, ExperimentalContext, MetaCell, Metaspace};

/// `{"n": rows, "entries": [[re, im], ...]}`, row-major.
///
/// The column count is `entries.len() / n`, so the same format carries
/// square matrices, `n × m` bases and column vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.n == 0 || !m.entries.len().is_multiple_of(m.n) {
            return Err(Error::InvalidLayout(format!("{} entries with n = {}", m.entries.len(), m.n)));
        }
        let cols = m.entries.len() / m.n;
        CMatrix::new(m.n, cols, m.entries.iter().map(|&[re, im]| Complex::new(re, im)).collect())
    }
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> Self {
        Self { n: m.rows(), entries: m.entries().iter().map(|z| [z.re, z.im]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartJson {
    pub lambda: f64,
    pub basis: CMatrix,
}

/// `{"n": int, "parts": [{"lambda": real, "basis": matrix}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub n: usize,
    pub parts: Vec<PartJson>,
}

impl From<&NumDecomposition> for DecompositionJson {
    fn from(d: &NumDecomposition) -> Self {
        Self {
            n: d.ambient_dim(),
            parts: d
                .parts()
                .iter()
                .map(|p| PartJson { lambda: p.lambda, basis: p.subspace.basis().clone() })
                .collect(),
        }
    }
}

impl DecompositionJson {
    /// Bases are re-orthonormalized, so printed (rounded) bases load cleanly.
    pub fn to_decomposition(&self) -> Result<NumDecomposition> {
        let parts = self
            .parts
            .iter()
            .map(|p| {
                if p.basis.rows() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, found: p.basis.rows() });
                }
                Ok(Part::new(p.lambda, Subspace::span(&p.basis)?))
            })
            .collect::<Result<Vec<_>>>()?;
        NumDecomposition::new(parts)
    }
}

/// `{"cells": [indices], "residual": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventJson {
    pub cells: Vec<usize>,
    pub residual: bool,
}

impl From<&OrthoEvent> for EventJson {
    fn from(e: &OrthoEvent) -> Self {
        Self { cells: e.cell_indices(), residual: e.residual() }
    }
}

impl EventJson {
    pub fn to_event(&self, partition: &OrthoPartition) -> Result<OrthoEvent> {
        OrthoEvent::from_cells(partition, &self.cells, self.residual)
    }
}

/// An interval endpoint: a number or one of the sentinels `"-inf"`, `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Number(f64),
    Sentinel(String),
}

impl Endpoint {
    fn value(&self) -> Result<f64> {
        match self {
            Endpoint::Number(x) => Ok(*x),
            Endpoint::Sentinel(s) => match s.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" | "+inf" => Ok(f64::INFINITY),
                other => Err(Error::Json(format!("bad interval endpoint {other:?}"))),
            },
        }
    }

    fn from_value(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            Endpoint::Sentinel("-inf".into())
        } else if x == f64::INFINITY {
            Endpoint::Sentinel("inf".into())
        } else {
            Endpoint::Number(x)
        }
    }
}

/// `{"intervals": [[lo, hi, lo_closed, hi_closed]], "star": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelJson {
    intervals: Vec<(Endpoint, Endpoint, bool, bool)>,
    star: bool,
}

impl From<&ExtendedBorelSet> for BorelJson {
    fn from(s: &ExtendedBorelSet) -> Self {
        Self {
            intervals: s
                .intervals()
                .iter()
                .map(|i| (Endpoint::from_value(i.lo), Endpoint::from_value(i.hi), i.lo_closed, i.hi_closed))
                .collect(),
            star: s.contains_star(),
        }
    }
}

impl BorelJson {
    pub fn to_set(&self) -> Result<ExtendedBorelSet> {
        let intervals = self
            .intervals
            .iter()
            .map(|(lo, hi, lc, hc)| Ok(Interval::new(lo.value()?, hi.value()?, *lc, *hc)))
            .collect::<Result<Vec<_>>>()?;
        ExtendedBorelSet::new(intervals, self.star)
    }
}

/// Matrix JSON plus `"validated": true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    #[serde(default)]
    pub validated: bool,
}

impl From<&DensityMatrix> for DensityJson {
    fn from(rho: &DensityMatrix) -> Self {
        Self { matrix: rho.matrix().clone().into(), validated: true }
    }
}

impl DensityJson {
    /// Validates regardless of the `validated` flag.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(CMatrix::try_from(self.matrix.clone())?)
    }
}

/// One context of a consistency-check input: a decomposition with an
/// optional id and an optional per-cell probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSpecJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub decomposition: DecompositionJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

/// `{"rho": matrix, "contexts": [decomposition]}`. Without `rho` every
/// context must carry its own `probs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyInputJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<DensityJson>,
    pub contexts: Vec<ContextSpecJson>,
}

impl ConsistencyInputJson {
    pub fn to_space(&self) -> Result<MultiProbabilitySpace> {
        let contexts = self
            .contexts
            .iter()
            .enumerate()
            .map(|(i, c)| Ok((c.id.clone().unwrap_or_else(|| format!("c{i}")), c.decomposition.to_decomposition()?)))
            .collect::<Result<Vec<_>>>()?;
        let family = ContextFamily::new(contexts)?;
        match &self.rho {
            Some(rho) => {
                if self.contexts.iter().any(|c| c.probs.is_some()) {
                    return Err(Error::Json("give either rho or per-context probs, not both".into()));
                }
                crate::contexts::from_density(&family, &rho.to_density()?)
            }
            None => {
                let tables = self
                    .contexts
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.probs.clone().ok_or_else(|| Error::Json(format!("context {i} has no probs"))))
                    .collect::<Result<Vec<_>>>()?;
                MultiProbabilitySpace::from_tables(family, tables)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalContextJson {
    pub id: String,
    pub observable: CMatrix,
    pub rho: DensityJson,
}

/// `{"contexts": [{"id", "observable", "rho"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextsFileJson {
    pub contexts: Vec<ExperimentalContextJson>,
}

impl ContextsFileJson {
    pub fn to_contexts(&self, cluster_width: Option<f64>) -> Result<Vec<ExperimentalContext>> {
        self.contexts
            .iter()
            .map(|c| {
                let observable = match cluster_width {
                    Some(w) => crate::spectral::decompose(c.observable.clone(), w)?,
                    None => HermitianObservable::new(c.observable.clone())?,
                };
                ExperimentalContext::new(c.id.clone(), observable, c.rho.to_density()?)
            })
            .collect()
    }
}

/// Context weights: `[q₀, q₁, ...]` in context order, `{"q": [...]}`, or an
/// object keyed by context id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PmfJson {
    List(Vec<f64>),
    Wrapped { q: Vec<f64> },
    ById(BTreeMap<String, f64>),
}

impl PmfJson {
    pub fn to_pmf(&self, ids: &[&str]) -> Result<ContextPmf> {
        match self {
            PmfJson::List(q) | PmfJson::Wrapped { q } => ContextPmf::new(q.clone()),
            PmfJson::ById(map) => {
                if let Some(unknown) = map.keys().find(|k| !ids.contains(&k.as_str())) {
                    return Err(Error::InvalidPmf(format!("unknown context {unknown:?}")));
                }
                let weights = ids
                    .iter()
                    .map(|id| map.get(*id).copied().ok_or_else(|| Error::InvalidPmf(format!("no weight for {id:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                ContextPmf::new(weights)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaspaceJson<'a> {
    pub q: &'a [f64],
    pub total: f64,
    pub cells: &'a [MetaCell],
}

impl<'a> From<&'a Metaspace> for MetaspaceJson<'a> {
    fn from(m: &'a Metaspace) -> Self {
        Self { q: m.q().weights(), total: m.total(), cells: m.cells() }
    }
}

pub fn from_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_string_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::hermitian(&mut rng, 4);
        let text = serde_json::to_string(&a).unwrap();
        let back: CMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn matrix_format() {
        let sz: CMatrix = from_str(r#"{"n": 2, "entries": [[1,0],[0,0],[0,0],[-1,0]]}"#).unwrap();
        assert_eq!(sz, CMatrix::from_diag(&[1.0, -1.0]));
        let v: CMatrix = from_str(r#"{"n": 3, "entries": [[1,0],[0,0],[0,1]]}"#).unwrap();
        assert_eq!((v.rows(), v.cols()), (3, 1));
        assert!(from_str::<CMatrix>(r#"{"n": 2, "entries": [[1,0],[0,0],[0,0]]}"#).is_err());
        assert!(from_str::<CMatrix>(r#"{"n": 0, "entries": []}"#).is_err());
    }

    #[test]
    fn decomposition_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random::decomposition(&mut rng, 5);
        let text = to_string_pretty(&DecompositionJson::from(&d)).unwrap();
        let back = from_str::<DecompositionJson>(&text).unwrap().to_decomposition().unwrap();
        assert!(back.synthesize().distance(&d.synthesize()).unwrap() < 1e-12);
    }

    #[test]
    fn borel_sentinels() {
        let s: BorelJson = from_str(r#"{"intervals": [["-inf", 0, false, true], [2, "inf", true, false]], "star": true}"#).unwrap();
        let set = s.to_set().unwrap();
        assert!(set.contains_real(-1e300) && set.contains_real(0.0) && !set.contains_real(1.0));
        assert!(set.contains_real(2.0) && set.contains_star());
        let text = serde_json::to_string(&BorelJson::from(&set)).unwrap();
        assert!(text.contains("\"-inf\"") && text.contains("\"inf\""));
        assert_eq!(from_str::<BorelJson>(&text).unwrap().to_set().unwrap(), set);
        assert!(from_str::<BorelJson>(r#"{"intervals": [["nope", 0, true, true]], "star": false}"#)
            .unwrap()
            .to_set()
            .is_err());
    }

    #[test]
    fn density_format() {
        let rho = DensityMatrix::maximally_mixed(2);
        let text = serde_json::to_string(&DensityJson::from(&rho)).unwrap();
        assert!(text.contains("\"validated\":true"));
        assert_eq!(from_str::<DensityJson>(&text).unwrap().to_density().unwrap(), rho);
        let bad: DensityJson = from_str(r#"{"n": 1, "entries": [[2,0]], "validated": true}"#).unwrap();
        assert!(matches!(bad.to_density(), Err(Error::NotDensityMatrix(_))));
    }

    #[test]
    fn pmf_forms() {
        let ids = ["z", "x"];
        let list: PmfJson = from_str("[0.25, 0.75]").unwrap();
        let wrapped: PmfJson = from_str(r#"{"q": [0.25, 0.75]}"#).unwrap();
        let by_id: PmfJson = from_str(r#"{"x": 0.75, "z": 0.25}"#).unwrap();
        for p in [list, wrapped, by_id] {
            assert_eq!(p.to_pmf(&ids).unwrap().weights(), &[0.25, 0.75]);
        }
        let unknown: PmfJson = from_str(r#"{"y": 1.0}"#).unwrap();
        assert!(matches!(unknown.to_pmf(&ids), Err(Error::InvalidPmf(_))));
    }
}
