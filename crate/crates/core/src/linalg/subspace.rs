use super::{dot, norm, CMatrix, Complex, ZERO};
use crate::error::{Error, Result};
use crate::tol;

/// A nonzero linear subspace of `ℂⁿ`, held as an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal within `tol::ORTHO`.
    pub fn new(basis: CMatrix) -> Result<Self> {
        let m = basis.cols();
        if m > basis.rows() {
            return Err(Error::InvalidLayout(format!(
                "{m} basis vectors in dimension {}",
                basis.rows()
            )));
        }
        let gram = basis.adjoint().matmul(&basis)?;
        let defect = gram.distance(&CMatrix::identity(m))?;
        if defect > tol::ORTHO * (1.0 + (m as f64).sqrt()) {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self { basis })
    }

    /// Span of the columns of `vectors`, orthonormalized by modified Gram–Schmidt
    /// with one reorthogonalization pass.
    pub fn span(vectors: &CMatrix) -> Result<Self> {
        let n = vectors.rows();
        let mut out: Vec<Vec<Complex>> = Vec::with_capacity(vectors.cols());
        for j in 0..vectors.cols() {
            let mut v = vectors.column(j);
            let original = norm(&v);
            if original == 0.0 {
                return Err(Error::RankDeficient);
            }
            for _ in 0..2 {
                for u in &out {
                    let proj = dot(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= proj * ui;
                    }
                }
            }
            let len = norm(&v);
            if len <= 1e-10 * original {
                return Err(Error::RankDeficient);
            }
            v.iter_mut().for_each(|z| *z /= len);
            out.push(v);
        }
        if out.len() > n {
            return Err(Error::RankDeficient);
        }
        Ok(Self { basis: CMatrix::from_columns(&out)? })
    }

    /// The line `[v]`.
    pub fn line(v: &[Complex]) -> Result<Self> {
        Self::span(&CMatrix::from_columns(&[v.to_vec()])?)
    }

    /// All of `ℂⁿ`.
    pub fn whole(n: usize) -> Self {
        Self { basis: CMatrix::identity(n) }
    }

    /// Span of the canonical basis vectors with the given indices.
    pub fn coordinate(n: usize, indices: &[usize]) -> Result<Self> {
        let cols: Vec<Vec<Complex>> = indices
            .iter()
            .map(|&i| {
                let mut e = vec![ZERO; n];
                e[i] = Complex::new(1.0, 0.0);
                e
            })
            .collect();
        Self::new(CMatrix::from_columns(&cols)?)
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// `Π_L = B B*`.
    pub fn projector(&self) -> CMatrix {
        self.basis
            .matmul(&self.basis.adjoint())
            .expect("basis shapes are compatible")
    }

    /// `Π_L x` computed as `B (B* x)`.
    pub fn project(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        let coeffs = self.basis.adjoint_mat_vec(x)?;
        self.basis.mat_vec(&coeffs)
    }

    /// `‖Π_L x‖²`.
    pub fn projected_norm_sqr(&self, x: &[Complex]) -> Result<f64> {
        Ok(self.basis.adjoint_mat_vec(x)?.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `‖Π_L x − x‖ ≤ tol·‖x‖`.
    pub fn contains(&self, x: &[Complex], tol: f64) -> Result<bool> {
        let px = self.project(x)?;
        let diff: f64 = px.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        Ok(diff <= tol * norm(x))
    }

    /// `‖Π_S − Π_T‖_F`.
    pub fn projector_distance(&self, other: &Self) -> Result<f64> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        self.projector().distance(&other.projector())
    }

    /// Basis-independent equality: `‖Π_S − Π_T‖_F ≤ tol`.
    pub fn equals(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.projector_distance(other)? <= tol)
    }

    /// `‖S* T‖_F`, zero iff the subspaces are orthogonal.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        Ok(self.basis.adjoint().matmul(&other.basis)?.frobenius_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn projector_examples() {
        let e1 = Subspace::line(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(e1.projector(), CMatrix::from_diag(&[1.0, 0.0]));

        let diag = Subspace::line(&[c(1.0), c(1.0)]).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(diag.projector().distance(&expected).unwrap() < 1e-15);

        assert_eq!(Subspace::whole(3).projector(), CMatrix::identity(3));
    }

    #[test]
    fn projector_is_idempotent_and_self_adjoint() {
        let s = Subspace::span(
            &CMatrix::from_rows(vec![
                vec![Complex::new(1.0, 1.0), c(0.0)],
                vec![c(2.0), Complex::new(0.0, -1.0)],
                vec![c(0.5), c(3.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let p = s.projector();
        let pp = p.matmul(&p).unwrap();
        assert!(pp.distance(&p).unwrap() < tol::ORTHO);
        assert!(p.adjoint().distance(&p).unwrap() < tol::ORTHO);
        assert!((p.trace().unwrap().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn span_rejects_dependent_vectors() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0]]).unwrap();
        assert_eq!(Subspace::span(&m), Err(Error::RankDeficient));
        let zero = CMatrix::zeros(2, 1);
        assert_eq!(Subspace::span(&zero), Err(Error::RankDeficient));
    }

    #[test]
    fn new_rejects_non_orthonormal() {
        let m = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(Subspace::new(m), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn equality_examples() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        let e1_scaled = Subspace::line(&[c(2.0), c(0.0)]).unwrap();
        let e2 = Subspace::coordinate(2, &[1]).unwrap();
        assert!(e1.equals(&e1_scaled, 1e-12).unwrap());
        assert!(!e1.equals(&e2, 1e-12).unwrap());

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plane = Subspace::coordinate(3, &[0, 1]).unwrap();
        let rotated =
            Subspace::new(CMatrix::from_real_rows(&[&[r, r], &[r, -r], &[0.0, 0.0]]).unwrap()).unwrap();
        assert!(plane.equals(&rotated, 1e-12).unwrap());

        let other = Subspace::coordinate(3, &[0]).unwrap();
        assert!(matches!(e1.equals(&other, 1e-12), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn containment() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        assert!(e1.contains(&[c(3.0), c(0.0)], 1e-12).unwrap());
        assert!(!e1.contains(&[c(1.0), c(1.0)], 1e-12).unwrap());
    }
}
