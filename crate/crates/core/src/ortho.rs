//! Ortho-partitions, the finite ortho-algebra `Σ^D` they generate, and the
//! codomain σ-algebra on `ℝ ∪ {*}`.
//!
//! Every element of `Σ^D` is a union of partition cells, so an
//! [`OrthoEvent`] is just a bitmask over the subspace cells plus one bit for
//! the residual set `R^D`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use bitvec::vec::BitVec;

use crate::error::{Error, Result};
use crate::linalg::Complex;
use crate::spectral::{NumDecomposition, OrthoMeasurableFunction};

/// The partition of `ℂⁿ` into the punctured parts `L_d ∖ {0}` and the
/// residual set. Cheap to clone.
#[derive(Debug, Clone)]
pub struct OrthoPartition {
    decomposition: Arc<NumDecomposition>,
}

impl PartialEq for OrthoPartition {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.decomposition, &other.decomposition)
            || self.decomposition == other.decomposition
    }
}

impl OrthoPartition {
    pub fn new(decomposition: NumDecomposition) -> Self {
        Self { decomposition: Arc::new(decomposition) }
    }

    pub fn decomposition(&self) -> &NumDecomposition {
        &self.decomposition
    }

    /// Number of subspace cells (the residual cell is not counted).
    pub fn cells(&self) -> usize {
        self.decomposition.len()
    }

    pub fn classify(&self, x: &[Complex], member_tol: f64) -> Result<Cell> {
        Ok(match self.decomposition.locate(x, member_tol)? {
            Some(i) => Cell::Subspace(i),
            None => Cell::Residual,
        })
    }
}

/// A partition cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Subspace(usize),
    Residual,
}

/// Free-function form of [`OrthoPartition::classify`].
pub fn classify(partition: &OrthoPartition, x: &[Complex], member_tol: f64) -> Result<Cell> {
    partition.classify(x, member_tol)
}

/// An element of `Σ^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoEvent {
    partition: OrthoPartition,
    cells: BitVec,
    residual: bool,
}

impl OrthoEvent {
    pub fn empty(partition: &OrthoPartition) -> Self {
        Self {
            partition: partition.clone(),
            cells: BitVec::repeat(false, partition.cells()),
            residual: false,
        }
    }

    /// `ℂⁿ` itself.
    pub fn full(partition: &OrthoPartition) -> Self {
        Self {
            partition: partition.clone(),
            cells: BitVec::repeat(true, partition.cells()),
            residual: true,
        }
    }

    pub fn from_cells(partition: &OrthoPartition, cells: &[usize], residual: bool) -> Result<Self> {
        let mut ev = Self::empty(partition);
        for &i in cells {
            if i >= partition.cells() {
                return Err(Error::CellOutOfRange { index: i, cells: partition.cells() });
            }
            ev.cells.set(i, true);
        }
        ev.residual = residual;
        Ok(ev)
    }

    pub fn from_mask(partition: &OrthoPartition, mask: u64, residual: bool) -> Result<Self> {
        let k = partition.cells();
        if k < 64 && mask >> k != 0 {
            return Err(Error::CellOutOfRange { index: 63 - mask.leading_zeros() as usize, cells: k });
        }
        let cells: Vec<usize> = (0..k.min(64)).filter(|&i| mask >> i & 1 == 1).collect();
        Self::from_cells(partition, &cells, residual)
    }

    pub fn partition(&self) -> &OrthoPartition {
        &self.partition
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        match cell {
            Cell::Subspace(i) => self.cells.get(i).is_some_and(|b| *b),
            Cell::Residual => self.residual,
        }
    }

    pub fn residual(&self) -> bool {
        self.residual
    }

    /// Indices of the subspace cells in the event, ascending.
    pub fn cell_indices(&self) -> Vec<usize> {
        self.cells.iter_ones().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.not_any() && !self.residual
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.partition == other.partition {
            Ok(())
        } else {
            Err(Error::PartitionMismatch)
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            partition: self.partition.clone(),
            cells: self.cells.clone() | &other.cells,
            residual: self.residual || other.residual,
        })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            partition: self.partition.clone(),
            cells: self.cells.clone() & &other.cells,
            residual: self.residual && other.residual,
        })
    }

    pub fn complement(&self) -> Self {
        Self {
            partition: self.partition.clone(),
            cells: !self.cells.clone(),
            residual: !self.residual,
        }
    }
}

/// `f⁻¹(S) = ∪_{λ ∈ S} (L_λ ∖ {0})`, plus the residual set when `* ∈ S`.
pub fn preimage(f: &OrthoMeasurableFunction, set: &ExtendedBorelSet) -> OrthoEvent {
    let p = f.partition();
    let mut ev = OrthoEvent::empty(p);
    for (i, part) in p.decomposition().parts().iter().enumerate() {
        if set.contains_real(part.lambda) {
            ev.cells.set(i, true);
        }
    }
    ev.residual = set.star;
    ev
}

/// A real interval with open/closed ends; infinite ends are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    /// `(-∞, r]`.
    pub fn at_most(r: f64) -> Self {
        Self::new(f64::NEG_INFINITY, r, false, true)
    }

    /// `[r, ∞)`.
    pub fn at_least(r: f64) -> Self {
        Self::new(r, f64::INFINITY, true, false)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = match cmp(self.lo, other.lo) {
            Ordering::Greater => (self.lo, self.lo_closed),
            Ordering::Less => (other.lo, other.lo_closed),
            Ordering::Equal => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match cmp(self.hi, other.hi) {
            Ordering::Less => (self.hi, self.hi_closed),
            Ordering::Greater => (other.hi, other.hi_closed),
            Ordering::Equal => (self.hi, self.hi_closed && other.hi_closed),
        };
        Self::new(lo, hi, lo_closed, hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A member of `σ(ℬ ∪ {*})` restricted to finite unions of intervals:
/// either `B` or `B ∪ {*}`.
///
/// Kept normalized: intervals are nonempty, sorted, pairwise disjoint and
/// never adjacent, so structural equality is set equality.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBorelSet {
    intervals: Vec<Interval>,
    star: bool,
}

impl ExtendedBorelSet {
    pub fn new(intervals: Vec<Interval>, star: bool) -> Result<Self> {
        if intervals.iter().any(|i| i.lo.is_nan() || i.hi.is_nan()) {
            return Err(Error::InvalidLayout("NaN interval endpoint".into()));
        }
        Ok(Self { intervals: normalize(intervals), star })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new(), star: false }
    }

    /// `ℝ ∪ {*}`.
    pub fn everything() -> Self {
        Self { intervals: vec![Interval::real_line()], star: true }
    }

    pub fn star_only() -> Self {
        Self { intervals: Vec::new(), star: true }
    }

    pub fn interval(i: Interval) -> Self {
        Self { intervals: normalize(vec![i]), star: false }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains_star(&self) -> bool {
        self.star
    }

    pub fn contains_real(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && !self.star
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self { intervals: normalize(all), star: self.star || other.star }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                out.push(a.intersect(b));
            }
        }
        Self { intervals: normalize(out), star: self.star && other.star }
    }

    /// Complement in `ℝ ∪ {*}`.
    pub fn complement(&self) -> Self {
        let mut gaps = Vec::with_capacity(self.intervals.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for i in &self.intervals {
            gaps.push(Interval::new(lo, i.lo, lo_closed, !i.lo_closed));
            lo = i.hi;
            lo_closed = !i.hi_closed;
        }
        gaps.push(Interval::new(lo, f64::INFINITY, lo_closed, false));
        Self { intervals: normalize(gaps), star: !self.star }
    }
}

impl fmt::Display for ExtendedBorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces: Vec<String> = self.intervals.iter().map(ToString::to_string).collect();
        if self.star {
            pieces.push("{*}".into());
        }
        if pieces.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&pieces.join(" ∪ "))
        }
    }
}

// Endpoints are never NaN, and -0.0 must compare equal to 0.0.
fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("endpoints are not NaN")
}

fn normalize(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|i| !i.is_empty());
    intervals.sort_by(|a, b| cmp(a.lo, b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for next in intervals {
        if let Some(cur) = out.last_mut() {
            let touches = next.lo < cur.hi || (next.lo == cur.hi && (cur.hi_closed || next.lo_closed));
            if touches {
                match cmp(next.hi, cur.hi) {
                    Ordering::Greater => {
                        cur.hi = next.hi;
                        cur.hi_closed = next.hi_closed;
                    }
                    Ordering::Equal => cur.hi_closed |= next.hi_closed,
                    Ordering::Less => {}
                }
                continue;
            }
        }
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, Subspace};
    use crate::random;
    use crate::spectral::{HermitianObservable, Part};
    use crate::tol;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(v: &[f64]) -> Vec<Complex> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    fn sz_partition() -> OrthoPartition {
        HermitianObservable::new(CMatrix::from_diag(&[1.0, -1.0])).unwrap().to_function().partition().clone()
    }

    #[test]
    fn classify_examples() {
        let p = sz_partition();
        // Cells are ordered by ascending eigenvalue: 0 ↔ −1 ↔ [e₂], 1 ↔ +1 ↔ [e₁].
        assert_eq!(p.classify(&re(&[1.0, 0.0]), tol::MEMBER).unwrap(), Cell::Subspace(1));
        assert_eq!(p.classify(&re(&[1.0, 1.0]), tol::MEMBER).unwrap(), Cell::Residual);
        assert_eq!(p.classify(&re(&[0.0, 0.0]), tol::MEMBER).unwrap(), Cell::Residual);
        assert!(p.classify(&re(&[1.0, 0.0, 0.0]), tol::MEMBER).is_err());
    }

    #[test]
    fn event_lattice_examples() {
        let p = sz_partition();
        let empty = OrthoEvent::empty(&p);
        assert_eq!(empty.complement(), OrthoEvent::full(&p));

        let l1 = OrthoEvent::from_cells(&p, &[0], false).unwrap();
        let l2 = OrthoEvent::from_cells(&p, &[1], false).unwrap();
        assert_eq!(l1.union(&l2).unwrap().intersect(&l1).unwrap(), l1);

        let residual = OrthoEvent::from_cells(&p, &[], true).unwrap();
        assert_eq!(residual.complement(), OrthoEvent::from_cells(&p, &[0, 1], false).unwrap());
        assert!(OrthoEvent::from_cells(&p, &[2], false).is_err());
    }

    #[test]
    fn events_from_different_partitions_do_not_mix() {
        let p = sz_partition();
        let q = OrthoPartition::new(NumDecomposition::canonical(3));
        let a = OrthoEvent::full(&p);
        let b = OrthoEvent::full(&q);
        assert_eq!(a.union(&b), Err(Error::PartitionMismatch));
        // Structurally equal partitions built separately are compatible.
        let p2 = sz_partition();
        assert!(a.intersect(&OrthoEvent::empty(&p2)).is_ok());
    }

    #[test]
    fn preimage_examples() {
        let f = HermitianObservable::new(CMatrix::from_diag(&[1.0, -1.0])).unwrap().to_function();
        let nonneg = ExtendedBorelSet::interval(Interval::at_least(0.0));
        assert_eq!(preimage(&f, &nonneg).cell_indices(), vec![1]);
        assert!(!preimage(&f, &nonneg).residual());
        assert_eq!(preimage(&f, &ExtendedBorelSet::everything()), OrthoEvent::full(f.partition()));
        assert!(preimage(&f, &ExtendedBorelSet::empty()).is_empty());
    }

    #[test]
    fn borel_examples() {
        let unit = ExtendedBorelSet::interval(Interval::closed(0.0, 1.0));
        let expected = ExtendedBorelSet::new(
            vec![
                Interval::new(f64::NEG_INFINITY, 0.0, false, false),
                Interval::new(1.0, f64::INFINITY, false, false),
            ],
            true,
        )
        .unwrap();
        assert_eq!(unit.complement(), expected);
        assert_eq!(ExtendedBorelSet::everything().complement(), ExtendedBorelSet::empty());

        let a = ExtendedBorelSet::interval(Interval::closed(0.0, 1.0));
        let b = ExtendedBorelSet::interval(Interval::closed(1.0, 2.0));
        assert_eq!(a.union(&b), ExtendedBorelSet::interval(Interval::closed(0.0, 2.0)));
        // [0,1) ∪ (1,2] keeps the hole.
        let c = ExtendedBorelSet::interval(Interval::new(0.0, 1.0, true, false));
        let d = ExtendedBorelSet::interval(Interval::new(1.0, 2.0, false, true));
        assert_eq!(c.union(&d).intervals().len(), 2);
        assert!(!c.union(&d).contains_real(1.0));
        assert_eq!(a.intersect(&b), ExtendedBorelSet::interval(Interval::point(1.0)));
    }

    #[test]
    fn generic_vectors_land_in_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = OrthoPartition::new(random::proper_decomposition(&mut rng, 4));
        let mut boundary = 0;
        for _ in 0..1000 {
            let v = random::unit_vector(&mut rng, 4);
            if p.classify(v.components(), tol::MEMBER).unwrap() != Cell::Residual {
                boundary += 1;
            }
        }
        if boundary > 0 {
            log::warn!("{boundary} generic vectors classified into a subspace cell");
        }
    }

    #[test]
    fn classify_agrees_with_eigen_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = HermitianObservable::new(random::degenerate_hermitian(&mut rng, 5)).unwrap();
        let f = obs.to_function();
        let p = f.partition();
        let mut probes: Vec<Vec<Complex>> =
            obs.decomposition().parts().iter().map(|part| part.subspace.basis().column(0)).collect();
        probes.push(random::unit_vector(&mut rng, 5).components().to_vec());
        probes.push(vec![Complex::new(0.0, 0.0); 5]);
        for x in probes {
            let cell = p.classify(&x, tol::MEMBER).unwrap();
            let value = obs.eigen_pairing(&x, tol::MEMBER).unwrap();
            match (cell, value) {
                (Cell::Subspace(i), crate::spectral::ExtendedReal::Real(l)) => {
                    assert_eq!(obs.decomposition().parts()[i].lambda, l)
                }
                (Cell::Residual, crate::spectral::ExtendedReal::Star) => {}
                other => panic!("disagreement: {other:?}"),
            }
        }
    }

    fn arb_endpoint() -> impl Strategy<Value = f64> {
        prop_oneof![
            8 => (-6i32..=6).prop_map(|k| k as f64 * 0.5),
            1 => Just(f64::NEG_INFINITY),
            1 => Just(f64::INFINITY),
        ]
    }

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (arb_endpoint(), arb_endpoint(), any::<bool>(), any::<bool>())
            .prop_map(|(a, b, lc, hc)| Interval::new(a.min(b), a.max(b), lc, hc))
    }

    fn arb_set() -> impl Strategy<Value = ExtendedBorelSet> {
        (prop::collection::vec(arb_interval(), 0..4), any::<bool>())
            .prop_map(|(iv, star)| ExtendedBorelSet::new(iv, star).unwrap())
    }

    fn arb_event(p: OrthoPartition) -> impl Strategy<Value = OrthoEvent> {
        let k = p.cells();
        (prop::collection::vec(any::<bool>(), k), any::<bool>()).prop_map(move |(bits, r)| {
            let cells: Vec<usize> = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
            OrthoEvent::from_cells(&p, &cells, r).unwrap()
        })
    }

    fn fixed_function() -> OrthoMeasurableFunction {
        // Identifiers sit on the half-integer grid used by the interval strategy.
        let parts = vec![
            Part::new(-1.0, Subspace::coordinate(5, &[0]).unwrap()),
            Part::new(0.5, Subspace::coordinate(5, &[1, 2]).unwrap()),
            Part::new(1.0, Subspace::coordinate(5, &[3]).unwrap()),
            Part::new(2.5, Subspace::coordinate(5, &[4]).unwrap()),
        ];
        HermitianObservable::from_decomposition(NumDecomposition::new(parts).unwrap()).to_function()
    }

    proptest! {
        #[test]
        fn de_morgan_on_events(
            (a, b) in {
                let p = OrthoPartition::new(NumDecomposition::canonical(6));
                (arb_event(p.clone()), arb_event(p))
            }
        ) {
            let lhs = a.union(&b).unwrap().complement();
            let rhs = a.complement().intersect(&b.complement()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let lhs = a.intersect(&b).unwrap().complement();
            let rhs = a.complement().union(&b.complement()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.complement().complement(), a);
        }

        #[test]
        fn preimage_is_a_boolean_homomorphism(s in arb_set(), t in arb_set()) {
            let f = fixed_function();
            prop_assert_eq!(
                preimage(&f, &s.union(&t)),
                preimage(&f, &s).union(&preimage(&f, &t)).unwrap()
            );
            prop_assert_eq!(
                preimage(&f, &s.intersect(&t)),
                preimage(&f, &s).intersect(&preimage(&f, &t)).unwrap()
            );
            prop_assert_eq!(preimage(&f, &s.complement()), preimage(&f, &s).complement());
        }

        #[test]
        fn borel_ops_match_pointwise_semantics(s in arb_set(), t in arb_set(), k in -14i32..=14) {
            let x = k as f64 * 0.25;
            prop_assert_eq!(s.union(&t).contains_real(x), s.contains_real(x) || t.contains_real(x));
            prop_assert_eq!(s.intersect(&t).contains_real(x), s.contains_real(x) && t.contains_real(x));
            prop_assert_eq!(s.complement().contains_real(x), !s.contains_real(x));
            prop_assert_eq!(s.complement().contains_star(), !s.contains_star());
            prop_assert_eq!(s.complement().complement(), s);
        }
    }
}
