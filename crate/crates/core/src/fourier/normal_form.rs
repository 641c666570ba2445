use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions::check_coefficient_algebra;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::report::ConditionReport;
use crate::system::IsometrySystem;

use super::expr::Expr;

/// Finite sum `U^{*N} a_{-N} + ... + U* a_{-1} + a_0 + a_1 U + ... + a_N U^N`.
///
/// Degree `k > 0` stores `a_k` of the term `a_k U^k`; degree `k < 0` stores the
/// right coefficient of `U^{*|k|} a`. Coefficients are kept normalized:
/// `a_k U^k U^{*k} = a_k` and `U^k U^{*k} a_{-k} = a_{-k}`.
#[derive(Clone)]
pub struct NormalForm {
    system: Arc<IsometrySystem>,
    coeffs: BTreeMap<i64, ComplexMatrix>,
}

impl std::fmt::Debug for NormalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

/// Applies the normalization `a U^k -> a δ^k(1) U^k`, `U^{*k} a -> U^{*k} δ^k(1) a`.
fn normalize(sys: &IsometrySystem, k: i64, c: ComplexMatrix) -> ComplexMatrix {
    match k.signum() {
        1 => c * sys.final_projection(k as usize).as_ref(),
        -1 => sys.final_projection(k.unsigned_abs() as usize).as_ref() * c,
        _ => c,
    }
}

fn delta_pow(sys: &IsometrySystem, m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    sys.delta_pow(m, n).expect("coefficient dimensions are checked at construction")
}

fn delta_star_pow(sys: &IsometrySystem, m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    sys.delta_star_pow(m, n).expect("coefficient dimensions are checked at construction")
}

/// Product of two single terms, rewritten into a single term of the normal
/// form using the covariance relations `U^k b = δ^k(b) U^k` and
/// `a U^{*l} = U^{*l} δ^l(a)`.
pub(crate) fn term_product(
    sys: &IsometrySystem,
    (k, a): (i64, &ComplexMatrix),
    (l, b): (i64, &ComplexMatrix),
) -> (i64, ComplexMatrix) {
    let ku = k.unsigned_abs() as usize;
    let lu = l.unsigned_abs() as usize;
    if k >= 0 && l >= 0 {
        // a U^k · b U^l = a δ^k(b) U^{k+l}
        (k + l, a * &delta_pow(sys, b, ku))
    } else if k <= 0 && l <= 0 {
        // U^{*K} a · U^{*L} b = U^{*(K+L)} δ^L(a) b
        (k + l, &delta_pow(sys, a, lu) * b)
    } else if k > 0 {
        // a U^k · U^{*L} b
        if ku <= lu {
            let d = lu - ku;
            let c = &(&delta_pow(sys, a, d) * sys.final_projection(lu).as_ref()) * b;
            (-(d as i64), c)
        } else {
            let d = ku - lu;
            let c = &(a * sys.final_projection(ku).as_ref()) * &delta_pow(sys, b, d);
            (d as i64, c)
        }
    } else {
        // U^{*K} a · b U^l = U^{*K} (ab) U^l
        let ab = a * b;
        if ku <= lu {
            ((lu - ku) as i64, delta_star_pow(sys, &ab, ku))
        } else {
            (-((ku - lu) as i64), delta_star_pow(sys, &ab, lu))
        }
    }
}

fn max_norm(coeffs: &BTreeMap<i64, ComplexMatrix>) -> f64 {
    coeffs.values().map(|c| c.frobenius_norm()).fold(0.0, f64::max)
}

impl NormalForm {
    pub fn zero(system: &Arc<IsometrySystem>) -> Self {
        Self { system: Arc::clone(system), coeffs: BTreeMap::new() }
    }

    pub fn identity(system: &Arc<IsometrySystem>) -> Self {
        Self::scalar(system, C64::new(1.0, 0.0))
    }

    pub fn scalar(system: &Arc<IsometrySystem>, c: C64) -> Self {
        Self::monomial(system, 0, ComplexMatrix::identity(system.dim()).scale(c))
            .expect("scalars lie in every unital algebra")
    }

    /// `U` itself: degree 1 with coefficient `δ(1) = UU*`.
    pub fn u(system: &Arc<IsometrySystem>) -> Self {
        Self::monomial(system, 1, ComplexMatrix::identity(system.dim())).expect("1 lies in the algebra")
    }

    /// A single term of degree `k` with the given coefficient, normalized.
    /// Fails with [`Error::CoefficientEscape`] when the coefficient is not in
    /// the algebra.
    pub fn monomial(system: &Arc<IsometrySystem>, k: i64, coeff: ComplexMatrix) -> Result<Self> {
        let mut map = BTreeMap::new();
        map.insert(k, coeff);
        Self::from_map(system, map)
    }

    /// Builds a normal form from raw coefficients: normalizes each, verifies
    /// membership and drops negligible terms.
    pub fn from_map(system: &Arc<IsometrySystem>, coeffs: BTreeMap<i64, ComplexMatrix>) -> Result<Self> {
        let scale = max_norm(&coeffs);
        Self::assemble(system, coeffs, scale)
    }

    fn assemble(system: &Arc<IsometrySystem>, coeffs: BTreeMap<i64, ComplexMatrix>, scale: f64) -> Result<Self> {
        let tol = system.tol();
        let alg = system.algebra();
        let mut out = BTreeMap::new();
        for (k, c) in coeffs {
            if c.dim() != system.dim() {
                return Err(Error::DimensionMismatch { left: system.dim(), right: c.dim() });
            }
            let c = normalize(system, k, c);
            if c.frobenius_norm() <= tol * scale {
                continue;
            }
            let defect = alg.relative_defect(&c);
            if defect > tol {
                return Err(Error::CoefficientEscape { degree: k, defect });
            }
            out.insert(k, c);
        }
        Ok(Self { system: Arc::clone(system), coeffs: out })
    }

    pub fn system(&self) -> &Arc<IsometrySystem> {
        &self.system
    }

    fn same_system(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored degrees in ascending order.
    pub fn degrees(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    /// Largest `|k|` over stored degrees (0 for the zero form).
    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ComplexMatrix)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Normalized coefficient at degree `k`, or the zero matrix.
    pub fn coefficient(&self, k: i64) -> ComplexMatrix {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| ComplexMatrix::zeros(self.system.dim()))
    }

    /// Largest Frobenius norm among the coefficients.
    pub fn scale(&self) -> f64 {
        max_norm(&self.coeffs)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let mut map = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            map.entry(*k).and_modify(|e| *e += c).or_insert_with(|| c.clone());
        }
        Self::assemble(&self.system, map, self.scale().max(other.scale()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_by(C64::new(-1.0, 0.0)))
    }

    pub fn scale_by(&self, c: C64) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, m)| (*k, m.scale(c))).filter(|(_, m)| !m.is_zero()).collect();
        Self { system: Arc::clone(&self.system), coeffs }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let sys = self.system.as_ref();
        let mut map: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                let (d, c) = term_product(sys, (*k, a), (*l, b));
                match map.get_mut(&d) {
                    Some(e) => *e += &c,
                    None => {
                        map.insert(d, c);
                    }
                }
            }
        }
        Self::assemble(&self.system, map, self.scale() * other.scale())
    }

    /// `x*`: degree `k` maps to `-k` with the adjoint coefficient.
    pub fn adjoint(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, c)| (-k, c.adjoint())).collect();
        Self { system: Arc::clone(&self.system), coeffs }
    }

    /// Gauge substitution `U -> λU`: the degree-`k` coefficient picks up `λ^k`.
    pub fn gauge(&self, lambda: C64) -> Result<Self> {
        let modulus = lambda.norm();
        if (modulus - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnimodular { modulus });
        }
        let coeffs = self.coeffs.iter().map(|(k, c)| (*k, c.scale(lambda.powi(*k as i32)))).collect();
        Ok(Self { system: Arc::clone(&self.system), coeffs })
    }

    /// Matrix of the degree-`k` term alone (`a_k U^k` or `U^{*|k|} a_{-k}`).
    pub fn monomial_matrix(&self, k: i64) -> ComplexMatrix {
        match self.coeffs.get(&k) {
            Some(c) => term_matrix(&self.system, k, c),
            None => ComplexMatrix::zeros(self.system.dim()),
        }
    }

    /// The operator represented on `C^n`.
    pub fn eval(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.system.dim());
        for (k, c) in &self.coeffs {
            out += &term_matrix(&self.system, *k, c);
        }
        out
    }

    /// Discrete Fourier average `(1/M) Σ_j λ_j^{-k} eval(gauge(x, λ_j))` over
    /// the `M`-th roots of unity. Returns the matrix of the degree-`k` term.
    pub fn gauge_average(&self, k: i64, samples: usize) -> Result<ComplexMatrix> {
        let max_degree = self.max_degree();
        if samples <= 2 * max_degree {
            return Err(Error::InsufficientResolution { samples, max_degree });
        }
        let mut acc = ComplexMatrix::zeros(self.system.dim());
        for j in 0..samples {
            let lambda = C64::from_polar(1.0, 2.0 * PI * j as f64 / samples as f64);
            let weight = lambda.powi(-(k as i32));
            acc += &self.gauge(lambda)?.eval().scale(weight);
        }
        Ok(acc.scale_real(1.0 / samples as f64))
    }

    /// Conversion to left coefficients for negative degrees,
    /// `U^{*k} a = δ_*^k(a) U^{*k}`, valid only when `U* a = δ_*(a) U*` holds
    /// on the algebra.
    pub fn left_coefficients(&self) -> Result<BTreeMap<i64, ComplexMatrix>> {
        let report = check_left_covariance(&self.system);
        if !report.pass {
            return Err(Error::HypothesisViolated(Box::new(report)));
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let c = if *k < 0 { delta_star_pow(&self.system, c, k.unsigned_abs() as usize) } else { c.clone() };
                (*k, c)
            })
            .collect())
    }
}

/// Strips the `U` power from a degree-`k` term matrix, recovering its
/// normalized coefficient: `T U^{*k}` for `k > 0`, `U^{|k|} T` for `k < 0`.
pub fn strip_degree(sys: &IsometrySystem, k: i64, term: &ComplexMatrix) -> ComplexMatrix {
    match k.signum() {
        1 => term * sys.u_star_pow(k as usize).as_ref(),
        -1 => sys.u_pow(k.unsigned_abs() as usize).as_ref() * term,
        _ => term.clone(),
    }
}

fn term_matrix(sys: &IsometrySystem, k: i64, c: &ComplexMatrix) -> ComplexMatrix {
    match k.signum() {
        1 => c * sys.u_pow(k as usize).as_ref(),
        -1 => sys.u_star_pow(k.unsigned_abs() as usize).as_ref() * c,
        _ => c.clone(),
    }
}

/// `U* a = δ_*(a) U*` on every basis element.
pub fn check_left_covariance(sys: &IsometrySystem) -> ConditionReport {
    let us = sys.u_star();
    let worst = sys
        .algebra()
        .basis()
        .iter()
        .map(|a| {
            let lhs = us * a;
            let rhs = &sys.delta_star(a).expect("dims match") * us;
            (&lhs - &rhs).spectral_norm()
        })
        .fold(0.0, f64::max);
    let mut report = ConditionReport::new("left_covariance");
    report.record("U*a = delta_*(a)U*", worst, sys.tol());
    report
}

/// Reduces a parsed expression to its normal form. Refuses systems whose
/// algebra is not a coefficient algebra, since the rewriting rules are
/// unsound there.
pub fn reduce(expr: &Expr, system: &Arc<IsometrySystem>) -> Result<NormalForm> {
    let report = check_coefficient_algebra(system);
    if !report.pass {
        return Err(Error::NotCoefficientAlgebra(Box::new(report)));
    }
    reduce_unchecked(expr, system)
}

fn reduce_unchecked(expr: &Expr, system: &Arc<IsometrySystem>) -> Result<NormalForm> {
    match expr {
        Expr::Generator { value, .. } => NormalForm::monomial(system, 0, value.clone()),
        Expr::U => Ok(NormalForm::u(system)),
        Expr::Scalar(c) => Ok(NormalForm::scalar(system, *c)),
        Expr::Sum(terms) => {
            let mut acc = NormalForm::zero(system);
            for t in terms {
                acc = acc.add(&reduce_unchecked(t, system)?)?;
            }
            Ok(acc)
        }
        Expr::Neg(e) => Ok(reduce_unchecked(e, system)?.scale_by(C64::new(-1.0, 0.0))),
        Expr::Product(fs) => {
            let mut acc = NormalForm::identity(system);
            for f in fs {
                acc = acc.multiply(&reduce_unchecked(f, system)?)?;
            }
            Ok(acc)
        }
        Expr::Power(e, k) => {
            let base = reduce_unchecked(e, system)?;
            let mut acc = NormalForm::identity(system);
            for _ in 0..*k {
                acc = acc.multiply(&base)?;
            }
            Ok(acc)
        }
        Expr::Adjoint(e) => Ok(reduce_unchecked(e, system)?.adjoint()),
    }
}

#[derive(Serialize, Deserialize)]
struct DegreeJson {
    k: i64,
    coeff: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct NormalFormJson {
    degrees: Vec<DegreeJson>,
}

impl Serialize for NormalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let degrees = self.coeffs.iter().map(|(k, c)| DegreeJson { k: *k, coeff: c.clone() }).collect();
        NormalFormJson { degrees }.serialize(s)
    }
}

impl NormalForm {
    /// Reads `{"degrees": [{"k": .., "coeff": ..}]}` against a system.
    pub fn from_json(text: &str, system: &Arc<IsometrySystem>) -> Result<Self> {
        let raw: NormalFormJson = serde_json::from_str(text)?;
        let mut map: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for d in raw.degrees {
            if map.insert(d.k, d.coeff).is_some() {
                return Err(Error::InvalidArgument(format!("degree {} listed twice", d.k)));
            }
        }
        Self::from_map(system, map)
    }
}
