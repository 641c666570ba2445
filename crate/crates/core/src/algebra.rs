//! Finite-dimensional *-subalgebras of the ambient matrix algebra, stored as
//! Hilbert-Schmidt orthonormal bases.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{check_dims, ComplexMatrix, C64};

/// Default tolerance for span membership and commutator defects.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Incrementally built HS-orthonormal family. Residuals are measured relative
/// to the candidate's Frobenius norm.
#[derive(Clone, Debug)]
pub(crate) struct OrthoSpan {
    dim: usize,
    tol: f64,
    vecs: Vec<ComplexMatrix>,
}

impl OrthoSpan {
    pub(crate) fn new(dim: usize, tol: f64) -> Self {
        Self { dim, tol, vecs: Vec::new() }
    }

    pub(crate) fn len(&self) -> usize {
        self.vecs.len()
    }

    pub(crate) fn vectors(&self) -> &[ComplexMatrix] {
        &self.vecs
    }

    fn residual(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut r = m.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &self.vecs {
                let c = hs(b, &r);
                r = &r - &b.scale(c);
            }
        }
        r
    }

    /// Adds `m` when it is independent of the current span. Returns whether
    /// the span grew.
    pub(crate) fn insert(&mut self, m: &ComplexMatrix) -> Result<bool> {
        assert_eq!(m.dim(), self.dim);
        let norm = m.frobenius_norm();
        if norm == 0.0 {
            return Ok(false);
        }
        let r = self.residual(m);
        let rel = r.frobenius_norm() / norm;
        if rel <= self.tol {
            return Ok(false);
        }
        if rel < 10.0 * self.tol {
            return Err(Error::ToleranceCollapse { residual: rel, tol: self.tol, upper: 10.0 * self.tol });
        }
        let rn = r.frobenius_norm();
        self.vecs.push(r.scale_real(1.0 / rn));
        Ok(true)
    }

    /// Frobenius norm of the component of `m` orthogonal to the span.
    pub(crate) fn distance(&self, m: &ComplexMatrix) -> f64 {
        self.residual(m).frobenius_norm()
    }

    pub(crate) fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for b in &self.vecs {
            out += &b.scale(hs(b, m));
        }
        out
    }

    /// Mutual containment of spans, using the membership rule of
    /// [`FiniteStarAlgebra::contains`].
    pub(crate) fn same_span(&self, other: &OrthoSpan) -> bool {
        self.len() == other.len()
            && other.vecs.iter().all(|v| self.distance(v) <= self.tol)
            && self.vecs.iter().all(|v| other.distance(v) <= other.tol)
    }
}

fn hs(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum()
}

/// A unital *-subalgebra of `M_n(C)`.
#[derive(Clone, Debug)]
pub struct FiniteStarAlgebra {
    span: OrthoSpan,
}

impl FiniteStarAlgebra {
    /// Smallest *-algebra containing `gens` and the identity.
    ///
    /// The span of all words in `gens ∪ gens* ∪ {1}` is grown by left
    /// multiplication with the generators until no new direction appears.
    pub fn generate_closure(dim: usize, gens: &[ComplexMatrix], tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        for g in gens {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: g.dim() });
            }
        }
        let mut letters: Vec<ComplexMatrix> = Vec::new();
        for g in gens {
            let norm = g.frobenius_norm();
            if norm == 0.0 {
                continue;
            }
            letters.push(g.scale_real(1.0 / norm));
            letters.push(g.adjoint().scale_real(1.0 / norm));
        }
        let mut span = OrthoSpan::new(dim, tol);
        span.insert(&ComplexMatrix::identity(dim))?;
        for l in &letters {
            span.insert(l)?;
        }
        let mut next = 0;
        while next < span.len() {
            let b = span.vectors()[next].clone();
            for l in &letters {
                span.insert(&(l * &b))?;
            }
            next += 1;
        }
        Ok(Self { span })
    }

    /// Algebra spanned by exactly these matrices; the caller asserts closure.
    /// Used when reading serialized algebras and verified by [`Self::closure_defect`].
    pub fn from_spanning_set(dim: usize, mats: &[ComplexMatrix], tol: f64) -> Result<Self> {
        let mut span = OrthoSpan::new(dim, tol);
        span.insert(&ComplexMatrix::identity(dim))?;
        for m in mats {
            check_dims(m, &ComplexMatrix::identity(dim))?;
            span.insert(m)?;
        }
        Ok(Self { span })
    }

    /// All diagonal `n x n` matrices.
    pub fn diagonal(dim: usize, tol: f64) -> Self {
        let units: Vec<_> = (0..dim).map(|i| ComplexMatrix::unit(dim, i, i)).collect();
        Self::from_spanning_set(dim, &units, tol).expect("matrix units are orthonormal")
    }

    /// The full matrix algebra `M_n`.
    pub fn full(dim: usize, tol: f64) -> Self {
        let mut units = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                units.push(ComplexMatrix::unit(dim, i, j));
            }
        }
        Self::from_spanning_set(dim, &units, tol).expect("matrix units are orthonormal")
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.dim
    }

    /// Linear dimension of the algebra.
    pub fn dimension(&self) -> usize {
        self.span.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        self.span.vectors()
    }

    pub fn tol(&self) -> f64 {
        self.span.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.span.tol = tol;
        self
    }

    /// Membership test. The defect is the Frobenius norm of the part of `m`
    /// orthogonal to the algebra; membership holds iff it is at most
    /// `tol * max(1, ||m||)`.
    pub fn contains(&self, m: &ComplexMatrix) -> Result<(bool, f64)> {
        if m.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { left: self.ambient_dim(), right: m.dim() });
        }
        let defect = self.span.distance(m);
        let limit = self.tol() * m.spectral_norm().max(1.0);
        Ok((defect <= limit, defect))
    }

    /// Membership defect divided by `max(1, ||m||)`, comparable against `tol`.
    pub fn relative_defect(&self, m: &ComplexMatrix) -> f64 {
        self.span.distance(m) / m.spectral_norm().max(1.0)
    }

    /// Orthogonal (HS) projection onto the algebra.
    pub fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.span.project(m)
    }

    pub fn same_span(&self, other: &Self) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.span.same_span(&other.span)
    }

    /// Whether every basis element of `self` lies in `other`.
    pub fn is_subalgebra_of(&self, other: &Self) -> bool {
        self.basis().iter().all(|b| other.relative_defect(b) <= other.tol())
    }

    /// Largest commutator norm over basis pairs.
    pub fn commutativity_defect(&self) -> f64 {
        let b = self.basis();
        let mut worst = 0.0_f64;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                worst = worst.max(b[i].commutator(&b[j]).spectral_norm());
            }
        }
        worst
    }

    pub fn is_commutative(&self) -> bool {
        self.commutativity_defect() <= self.tol()
    }

    /// Worst violation of the structural invariants: orthonormality, closure
    /// under adjoint and closure under products.
    pub fn closure_defect(&self) -> f64 {
        let b = self.basis();
        let mut worst = 0.0_f64;
        for i in 0..b.len() {
            worst = worst.max(self.relative_defect(&b[i].adjoint()));
            for j in 0..b.len() {
                let g = hs(&b[i], &b[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(expect, 0.0)).norm());
                worst = worst.max(self.relative_defect(&(&b[i] * &b[j])));
            }
        }
        worst
    }

    /// Commutant `A'`: the null space of `X -> [b, X]` over all basis `b`.
    ///
    /// Computed from the Hermitian Gram operator `sum_b C_b* C_b` on
    /// `C^{n^2}`; eigenvalues below `tol * lambda_max` count as null.
    pub fn commutant(&self) -> Result<Self> {
        let n = self.ambient_dim();
        let nn = n * n;
        let mut gram = nalgebra::DMatrix::<C64>::zeros(nn, nn);
        for b in self.basis() {
            // column c of the superoperator is vec([b, E_c])
            let mut sup = nalgebra::DMatrix::<C64>::zeros(nn, nn);
            for c in 0..nn {
                let mut e = vec![C64::new(0.0, 0.0); nn];
                e[c] = C64::new(1.0, 0.0);
                let x = ComplexMatrix::from_column_major(n, &e);
                let comm = b.commutator(&x);
                for (r, z) in comm.as_slice().iter().enumerate() {
                    sup[(r, c)] = *z;
                }
            }
            gram += sup.adjoint() * &sup;
        }
        let gram = ComplexMatrix::from_inner(gram);
        let eig = gram.herm_eig()?;
        let top = eig.values.iter().copied().fold(0.0_f64, f64::max);
        let mut null = Vec::new();
        for (k, &v) in eig.values.iter().enumerate() {
            if v <= self.tol() * top.max(f64::MIN_POSITIVE) {
                let col: Vec<C64> = (0..nn).map(|r| eig.vectors.get(r, k)).collect();
                null.push(ComplexMatrix::from_column_major(n, &col));
            }
        }
        Self::from_spanning_set(n, &null, self.tol())
    }

    /// Bicommutant `A''`, the commutant of the commutant.
    pub fn bicommutant(&self) -> Result<Self> {
        self.commutant()?.commutant()
    }
}

impl Serialize for FiniteStarAlgebra {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.basis().serialize(s)
    }
}

impl FiniteStarAlgebra {
    /// Reads a JSON list of matrices and closes it into an algebra.
    pub fn from_json(text: &str, tol: f64) -> Result<Self> {
        let mats: Vec<ComplexMatrix> = serde_json::from_str(text)?;
        let dim = mats
            .first()
            .map(|m| m.dim())
            .ok_or_else(|| Error::InvalidArgument("algebra JSON must list at least one matrix".into()))?;
        Self::generate_closure(dim, &mats, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = DEFAULT_TOL;

    fn shift2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn closure_examples() {
        let a = FiniteStarAlgebra::generate_closure(3, &[ComplexMatrix::diag(&[1.0, 2.0, 3.0])], TOL).unwrap();
        assert_eq!(a.dimension(), 3);
        assert!(a.same_span(&FiniteStarAlgebra::diagonal(3, TOL)));

        let a = FiniteStarAlgebra::generate_closure(4, &[], TOL).unwrap();
        assert_eq!(a.dimension(), 1);
        assert!(a.contains(&ComplexMatrix::identity(4)).unwrap().0);

        let a = FiniteStarAlgebra::generate_closure(2, &[shift2()], TOL).unwrap();
        assert_eq!(a.dimension(), 4);
        assert!(a.closure_defect() < 1e-12);
    }

    #[test]
    fn closure_rejects_mismatched_generators() {
        let r = FiniteStarAlgebra::generate_closure(3, &[ComplexMatrix::identity(2)], TOL);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ambiguous_residual_is_reported() {
        let mut span = OrthoSpan::new(2, TOL);
        span.insert(&ComplexMatrix::diag(&[1.0, 0.0])).unwrap();
        let nearly = ComplexMatrix::from_real_rows(&[&[1.0, 3e-9], &[0.0, 0.0]]).unwrap();
        assert!(matches!(span.insert(&nearly), Err(Error::ToleranceCollapse { .. })));
        let dependent = ComplexMatrix::from_real_rows(&[&[1.0, 1e-12], &[0.0, 0.0]]).unwrap();
        assert!(!span.insert(&dependent).unwrap());
    }

    #[test]
    fn contains_examples() {
        let d = FiniteStarAlgebra::diagonal(2, TOL);
        let (inside, defect) = d.contains(&ComplexMatrix::diag(&[7.0, -1.0])).unwrap();
        assert!(inside && defect < 1e-14);
        let (inside, defect) = d.contains(&shift2()).unwrap();
        assert!(!inside);
        assert!((defect - 1.0).abs() < 1e-14);

        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let abs_a = (&a.adjoint() * &a).psd_sqrt().unwrap();
        let a0 = FiniteStarAlgebra::generate_closure(2, &[abs_a], TOL).unwrap();
        let (inside, defect) = a0.contains(&(&a * &a.adjoint())).unwrap();
        assert!(inside && defect < 1e-13);

        assert!(matches!(d.contains(&ComplexMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn commutants() {
        let d = FiniteStarAlgebra::diagonal(3, TOL);
        assert!(d.commutant().unwrap().same_span(&d));
        let full = FiniteStarAlgebra::full(3, TOL);
        assert_eq!(full.commutant().unwrap().dimension(), 1);
        let scalars = FiniteStarAlgebra::generate_closure(2, &[], TOL).unwrap();
        assert_eq!(scalars.commutant().unwrap().dimension(), 4);
        // span{1, diag(0,1,1)} has commutant C ⊕ M_2 and bicommutant itself
        let p = FiniteStarAlgebra::generate_closure(3, &[ComplexMatrix::diag(&[0.0, 1.0, 1.0])], TOL).unwrap();
        assert_eq!(p.commutant().unwrap().dimension(), 5);
        assert!(p.bicommutant().unwrap().same_span(&p));
    }

    #[test]
    fn json_round_trip_preserves_span() {
        let a = FiniteStarAlgebra::generate_closure(3, &[ComplexMatrix::diag(&[1.0, 1.0, 2.0])], TOL).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let b = FiniteStarAlgebra::from_json(&text, TOL).unwrap();
        assert!(a.same_span(&b));
    }
}
