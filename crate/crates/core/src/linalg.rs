//! Dense complex square matrices: the ambient representation of every
//! operator on the finite-dimensional Hilbert space.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::report::ConditionReport;

pub type C64 = Complex64;

/// Relative threshold below which eigenvalues of a PSD input are clamped to 0.
pub const PSD_CLAMP: f64 = 1e-10;
/// Relative tolerance for the self-adjointness precondition of [`ComplexMatrix::herm_eig`].
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

/// Spectral decomposition `M = V diag(values) V*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from complex rows; fails unless the rows form a square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix must have at least one row".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { left: n, right: bad.len() });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn diag_complex(values: &[C64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    /// Matrix unit `e_{ij}`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == i && c == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        assert!(m.is_square() && m.nrows() >= 1, "matrix must be square and non-empty");
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    /// Column-major view of the entries, used as a vector in `C^{n^2}`.
    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn from_column_major(dim: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self(DMatrix::from_column_slice(dim, dim, data))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Largest singular value, taken as the square root of the top eigenvalue
    /// of `M*M`.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let gram = self.0.adjoint() * &self.0;
        let gram = hermitian_part(&gram);
        let top = gram.symmetric_eigenvalues().iter().copied().fold(0.0_f64, f64::max);
        top.max(0.0).sqrt()
    }

    /// Hilbert-Schmidt inner product `tr(A* B)`.
    pub fn hs_inner(&self, other: &Self) -> Result<C64> {
        check_dims(self, other)?;
        Ok(self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        (self - &self.adjoint()).spectral_norm()
    }

    pub fn herm_eig(&self) -> Result<HermEig> {
        let scale = self.spectral_norm();
        let defect = self.self_adjoint_defect();
        if defect > SELF_ADJOINT_TOL * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::NotSelfAdjoint { defect });
        }
        let eig = hermitian_part(&self.0).symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Self::from_fn(self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermEig { values, vectors })
    }

    /// Positive square root of a PSD matrix. Eigenvalues above
    /// `-1e-10 * ||M||` are clamped to zero; lower ones are an error.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let eig = self.herm_eig()?;
        let scale = self.spectral_norm();
        let roots: Result<Vec<f64>> = eig
            .values
            .iter()
            .map(|&v| if v < -PSD_CLAMP * scale { Err(Error::NotPsd { eigenvalue: v }) } else { Ok(v.max(0.0).sqrt()) })
            .collect();
        Ok(eig.reconstruct(&roots?))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Five equivalent characterizations of a partial isometry, each
    /// evaluated by its own route.
    pub fn is_partial_isometry(&self, tol: f64) -> ConditionReport {
        let u = self;
        let us = u.adjoint();
        let ustar_u = &us * u;
        let u_ustar = u * &us;
        let mut report = ConditionReport::new("partial_isometry");
        // spectra of U*U and UU* must lie in {0, 1}
        report.record("U partial isometry (spectrum of U*U)", spectrum_01_defect(&ustar_u), tol);
        report.record("U* partial isometry (spectrum of UU*)", spectrum_01_defect(&u_ustar), tol);
        report.record("U*U projection", (&(&ustar_u * &ustar_u) - &ustar_u).spectral_norm(), tol);
        report.record("UU* projection", (&(&u_ustar * &u_ustar) - &u_ustar).spectral_norm(), tol);
        let d1 = (&(&u_ustar * u) - u).spectral_norm();
        let d2 = (&(&ustar_u * &us) - &us).spectral_norm();
        report.record("UU*U = U and U*UU* = U*", d1.max(d2), tol);
        report
    }
}

impl HermEig {
    /// `V diag(f) V*` for per-eigenvalue values `f`.
    pub fn reconstruct(&self, f: &[f64]) -> ComplexMatrix {
        let v = &self.vectors.0;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(f.len(), f.iter().map(|&x| C64::new(x, 0.0))));
        ComplexMatrix(v * d * v.adjoint())
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn spectrum_01_defect(h: &ComplexMatrix) -> f64 {
    hermitian_part(&h.0).symmetric_eigenvalues().iter().map(|&l| l.abs().min((l - 1.0).abs())).fold(0.0, f64::max)
}

pub(crate) fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                &self $op rhs
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        self.0 += &rhs.0;
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = self.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixJson { dim: n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.dim == 0 {
            return Err(D::Error::custom("matrix dimension must be positive"));
        }
        if raw.entries.len() != raw.dim || raw.entries.iter().any(|r| r.len() != raw.dim) {
            return Err(D::Error::custom(format!("entries do not form a {0}x{0} array", raw.dim)));
        }
        Ok(Self::from_fn(raw.dim, |i, j| {
            let [re, im] = raw.entries[i][j];
            C64::new(re, im)
        }))
    }
}
