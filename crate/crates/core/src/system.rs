//! The pair (A, U): a coefficient candidate algebra together with a partial
//! isometry, and the maps `δ(x) = UxU*`, `δ_*(x) = U*xU`.

use std::borrow::Cow;

use crate::algebra::FiniteStarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{check_dims, ComplexMatrix};

#[derive(Clone, Debug)]
pub struct IsometrySystem {
    algebra: FiniteStarAlgebra,
    u: ComplexMatrix,
    u_star: ComplexMatrix,
    /// `U^k` for `k = 0..=depth`
    powers: Vec<ComplexMatrix>,
    /// `U^{*k}` for `k = 0..=depth`
    star_powers: Vec<ComplexMatrix>,
    /// `U^{*k} U^k`
    initial_projections: Vec<ComplexMatrix>,
    /// `U^k U^{*k}`
    final_projections: Vec<ComplexMatrix>,
}

impl IsometrySystem {
    /// Builds the system with projections cached up to the ambient dimension.
    pub fn new(algebra: FiniteStarAlgebra, u: ComplexMatrix) -> Result<Self> {
        let depth = u.dim() + 1;
        Self::with_depth(algebra, u, depth)
    }

    pub fn with_depth(algebra: FiniteStarAlgebra, u: ComplexMatrix, depth: usize) -> Result<Self> {
        if algebra.ambient_dim() != u.dim() {
            return Err(Error::DimensionMismatch { left: algebra.ambient_dim(), right: u.dim() });
        }
        let report = u.is_partial_isometry(algebra.tol());
        if !report.pass {
            return Err(Error::NotPartialIsometry(Box::new(report)));
        }
        let u_star = u.adjoint();
        let mut powers = vec![ComplexMatrix::identity(u.dim())];
        let mut star_powers = vec![ComplexMatrix::identity(u.dim())];
        for k in 1..=depth {
            powers.push(&powers[k - 1] * &u);
            star_powers.push(&star_powers[k - 1] * &u_star);
        }
        let initial_projections = (0..=depth).map(|k| &star_powers[k] * &powers[k]).collect();
        let final_projections = (0..=depth).map(|k| &powers[k] * &star_powers[k]).collect();
        Ok(Self { algebra, u, u_star, powers, star_powers, initial_projections, final_projections })
    }

    /// Same `U`, different algebra.
    pub fn with_algebra(&self, algebra: FiniteStarAlgebra) -> Result<Self> {
        Self::with_depth(algebra, self.u.clone(), self.depth())
    }

    pub fn algebra(&self) -> &FiniteStarAlgebra {
        &self.algebra
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn u_star(&self) -> &ComplexMatrix {
        &self.u_star
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn tol(&self) -> f64 {
        self.algebra.tol()
    }

    pub fn depth(&self) -> usize {
        self.powers.len() - 1
    }

    /// `U^k`
    pub fn u_pow(&self, k: usize) -> Cow<'_, ComplexMatrix> {
        match self.powers.get(k) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(self.u.pow(k as u32)),
        }
    }

    /// `U^{*k}`
    pub fn u_star_pow(&self, k: usize) -> Cow<'_, ComplexMatrix> {
        match self.star_powers.get(k) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(self.u_star.pow(k as u32)),
        }
    }

    /// `U^{*k} U^k`
    pub fn initial_projection(&self, k: usize) -> Cow<'_, ComplexMatrix> {
        match self.initial_projections.get(k) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(self.u_star_pow(k).as_ref() * self.u_pow(k).as_ref()),
        }
    }

    /// `U^k U^{*k} = δ^k(1)`
    pub fn final_projection(&self, k: usize) -> Cow<'_, ComplexMatrix> {
        match self.final_projections.get(k) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(self.u_pow(k).as_ref() * self.u_star_pow(k).as_ref()),
        }
    }

    pub fn delta(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dims(&self.u, m)?;
        Ok(&(&self.u * m) * &self.u_star)
    }

    pub fn delta_star(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dims(&self.u, m)?;
        Ok(&(&self.u_star * m) * &self.u)
    }

    /// `δ^n(m) = U^n m U^{*n}`; `δ^0` is the identity map.
    pub fn delta_pow(&self, m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
        check_dims(&self.u, m)?;
        Ok(&(self.u_pow(n).as_ref() * m) * self.u_star_pow(n).as_ref())
    }

    /// `δ_*^n(m) = U^{*n} m U^n`.
    pub fn delta_star_pow(&self, m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
        check_dims(&self.u, m)?;
        Ok(&(self.u_star_pow(n).as_ref() * m) * self.u_pow(n).as_ref())
    }
}

/// Which of the two maps a tower or chain is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Delta,
    DeltaStar,
}

impl IsometrySystem {
    pub fn apply(&self, dir: Direction, m: &ComplexMatrix) -> ComplexMatrix {
        match dir {
            Direction::Delta => &(&self.u * m) * &self.u_star,
            Direction::DeltaStar => &(&self.u_star * m) * &self.u,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_TOL;

    fn shift2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn delta_examples() {
        let sys = IsometrySystem::new(FiniteStarAlgebra::diagonal(2, DEFAULT_TOL), shift2()).unwrap();
        let (p, q) = (2.5, -4.0);
        let d = sys.delta(&ComplexMatrix::diag(&[p, q])).unwrap();
        assert_eq!(d, ComplexMatrix::diag(&[q, 0.0]));
        let i = ComplexMatrix::identity(2);
        assert_eq!(sys.delta(&i).unwrap(), sys.u() * sys.u_star());
        assert_eq!(sys.delta_star(&i).unwrap(), sys.u_star() * sys.u());
        assert_eq!(sys.delta_pow(&i, 0).unwrap(), i);
        assert!(matches!(sys.delta(&ComplexMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_partial_isometry() {
        let r = IsometrySystem::new(FiniteStarAlgebra::diagonal(2, DEFAULT_TOL), ComplexMatrix::diag(&[1.0, 0.5]));
        assert!(matches!(r, Err(Error::NotPartialIsometry(_))));
    }

    #[test]
    fn powers_beyond_cache() {
        let sys = IsometrySystem::with_depth(FiniteStarAlgebra::diagonal(2, DEFAULT_TOL), shift2(), 1).unwrap();
        assert!(sys.u_pow(5).is_zero());
        assert_eq!(sys.final_projection(3).into_owned(), ComplexMatrix::zeros(2));
        assert_eq!(sys.initial_projection(0).into_owned(), ComplexMatrix::identity(2));
    }
}
