use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::FiniteStarAlgebra;
use crate::conditions::minimal_coefficient_algebra;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::report::ConditionReport;
use crate::system::IsometrySystem;

/// Relations that hold exactly in finite dimension are checked against this.
pub const EXACT_TOL: f64 = 1e-13;
/// Tolerance for matching a truncation defect with its predicted value.
pub const EDGE_TOL: f64 = 1e-10;

/// How `ρ` is given in a model spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Named(RhoName),
    /// Values on `q^0, ..., q^{n-1}`, optionally followed by `ρ(q^n)`.
    Samples {
        samples: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoName {
    Heisenberg,
    Sl2,
}

/// `ρ` sampled on the spectrum `{q^0, ..., q^{n-1}}` of `Q`, plus the value
/// at `q^n` when known (it is needed for `ρ(qQ)` at the top basis vector).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSamples {
    pub values: Vec<f64>,
    pub edge: Option<f64>,
}

fn check_params(n: usize, q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (0, 1), got {q}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("truncation dimension must be at least 2, got {n}")));
    }
    Ok(())
}

/// `ρ(t) = (1 - t)/(1 - q)`.
pub fn heisenberg_rho(n: usize, q: f64) -> Result<RhoSamples> {
    check_params(n, q)?;
    let rho = |j: usize| (1.0 - q.powi(j as i32)) / (1.0 - q);
    Ok(RhoSamples { values: (0..n).map(rho).collect(), edge: Some(rho(n)) })
}

/// `ρ²(t) = -1/((1-q)(1-q²)) · (q/t + t) · 1/(1-q)²`, taken as printed.
///
/// Every sample must be non-negative; the first negative one is reported.
/// For `0 < q < 1` all three factors have fixed signs and the product is
/// negative, so this always fails.
pub fn sl2_rho(n: usize, q: f64) -> Result<RhoSamples> {
    check_params(n, q)?;
    let rho2 = |t: f64| -1.0 / ((1.0 - q) * (1.0 - q * q)) * (q / t + t) / ((1.0 - q) * (1.0 - q));
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let v = rho2(q.powi(j as i32));
        if v < 0.0 {
            return Err(Error::RhoConditionViolated {
                index: j + 1,
                reason: format!("rho^2(q^{j}) = {v:.6e} is negative"),
            });
        }
        values.push(v.sqrt());
    }
    let edge = values.pop();
    Ok(RhoSamples { values, edge })
}

/// Resolves a spec to samples for truncation `n`.
pub fn rho_samples(n: usize, q: f64, spec: &RhoSpec) -> Result<RhoSamples> {
    match spec {
        RhoSpec::Named(RhoName::Heisenberg) => heisenberg_rho(n, q),
        RhoSpec::Named(RhoName::Sl2) => sl2_rho(n, q),
        RhoSpec::Samples { samples } => {
            check_params(n, q)?;
            if samples.len() != n && samples.len() != n + 1 {
                return Err(Error::InvalidArgument(format!(
                    "expected {n} or {} rho samples, got {}",
                    n + 1,
                    samples.len()
                )));
            }
            let mut values = samples.clone();
            let edge = if values.len() > n { values.pop() } else { None };
            Ok(RhoSamples { values, edge })
        }
    }
}

/// Backward shift `U e_j = e_{j-1}`, `U e_1 = 0`.
pub fn backward_shift(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| if j == i + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Truncated q-deformed model: `Q = diag(q^0, ..., q^{n-1})`, `U` the
/// backward shift, `a = Uρ(Q)`.
#[derive(Clone, Debug)]
pub struct QDeformModel {
    pub n: usize,
    pub q: f64,
    pub q_mat: ComplexMatrix,
    pub u: ComplexMatrix,
    pub rho: RhoSamples,
    pub rho_q: ComplexMatrix,
    pub a: ComplexMatrix,
    /// `U` over the closure of `{1, Q}`
    pub base: Arc<IsometrySystem>,
    /// `U` over `E_*(E({1, Q}))`
    pub system: Arc<IsometrySystem>,
}

impl QDeformModel {
    /// Builds the matrices and systems without checking `U*Uρ(Q) = ρ(Q)`.
    /// Negative samples are still refused, since `ρ(Q)` must be positive.
    pub fn assemble(n: usize, q: f64, rho: RhoSamples, tol: f64) -> Result<Self> {
        check_params(n, q)?;
        if rho.values.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} rho samples, got {}", rho.values.len())));
        }
        for (j, &v) in rho.values.iter().chain(rho.edge.iter()).enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::RhoConditionViolated {
                    index: j + 1,
                    reason: format!("rho sample {v} is not a finite non-negative number"),
                });
            }
        }
        let q_mat = ComplexMatrix::diag(&(0..n).map(|j| q.powi(j as i32)).collect::<Vec<_>>());
        let u = backward_shift(n);
        let rho_q = ComplexMatrix::diag(&rho.values);
        let a = &u * &rho_q;
        let a0 = FiniteStarAlgebra::generate_closure(n, std::slice::from_ref(&q_mat), tol)?;
        let base = Arc::new(IsometrySystem::new(a0, u.clone())?);
        let top = minimal_coefficient_algebra(&base)?;
        let system = Arc::new(base.with_algebra(top)?);
        Ok(Self { n, q, q_mat, u, rho, rho_q, a, base, system })
    }

    /// `ρ` evaluated on the spectrum of `qQ`, i.e. `diag(ρ(q^1), ..., ρ(q^n))`.
    /// The last entry is zero when `ρ(q^n)` is unknown.
    pub fn rho_qq(&self) -> ComplexMatrix {
        let mut vals: Vec<f64> = self.rho.values[1..].to_vec();
        vals.push(self.rho.edge.unwrap_or(0.0));
        ComplexMatrix::diag(&vals)
    }

    fn rho_scale(&self) -> f64 {
        self.rho.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// Per-basis-vector residuals of `U*Uρ(Q) = ρ(Q)` and of `U` vanishing on
    /// `ker ρ(Q)`.
    fn rho_residuals(&self) -> (Vec<f64>, Vec<f64>) {
        let tol = self.base.tol();
        let scale = self.rho_scale();
        let p = self.base.initial_projection(1).into_owned();
        let side = (0..self.n).map(|j| (self.rho.values[j] * (1.0 - p.get(j, j).re)).abs()).collect();
        let vanish = (0..self.n)
            .map(|j| {
                if self.rho.values[j] <= tol * scale {
                    (0..self.n).map(|i| self.u.get(i, j).norm()).fold(0.0, f64::max)
                } else {
                    0.0
                }
            })
            .collect();
        (side, vanish)
    }

    /// Standing conditions: `U*Uρ(Q) = ρ(Q)` and `a = Uρ(Q)` being a polar
    /// decomposition.
    pub fn conditions(&self) -> ConditionReport {
        let tol = self.base.tol();
        let scale = self.rho_scale();
        let (side, vanish) = self.rho_residuals();
        let mut report = ConditionReport::new("model_conditions");
        let worst_side = side.iter().cloned().fold(0.0, f64::max);
        if let Some(j) = side.iter().position(|&d| d > tol * scale) {
            report.note(format!("U*U rho(Q) differs from rho(Q) at e{}", j + 1));
        }
        report.record("U*U rho(Q) = rho(Q)", worst_side, tol * scale);
        let worst_vanish = vanish.iter().cloned().fold(0.0, f64::max);
        if let Some(j) = vanish.iter().position(|&d| d > tol) {
            report.note(format!("U does not vanish on ker rho(Q) at e{}", j + 1));
        }
        report.record("U vanishes on ker rho(Q)", worst_vanish, tol);
        let abs = (&self.a.adjoint() * &self.a).psd_sqrt();
        match abs {
            Ok(abs) => report.record("rho(Q) = |a|", (&abs - &self.rho_q).spectral_norm() / scale, tol),
            Err(e) => {
                report.note(e.to_string());
                report.record_flag("rho(Q) = |a|", false)
            }
        };
        report
    }
}

/// Checked model; fails with [`Error::RhoConditionViolated`] naming the first
/// basis vector where `U*Uρ(Q) = ρ(Q)` or the polar structure breaks.
pub fn build_qdeform(n: usize, q: f64, rho: &RhoSpec, tol: f64) -> Result<QDeformModel> {
    let model = QDeformModel::assemble(n, q, rho_samples(n, q, rho)?, tol)?;
    let scale = model.rho_scale();
    let (side, vanish) = model.rho_residuals();
    if let Some(j) = side.iter().position(|&d| d > tol * scale) {
        return Err(Error::RhoConditionViolated {
            index: j + 1,
            reason: format!("U*U rho(Q) != rho(Q) (residual {:.3e})", side[j]),
        });
    }
    if let Some(j) = vanish.iter().position(|&d| d > tol) {
        return Err(Error::RhoConditionViolated { index: j + 1, reason: "U does not vanish on ker rho(Q)".into() });
    }
    Ok(model)
}

/// Compression to the bulk `span(e_1, ..., e_{n-1})`.
fn bulk(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    ComplexMatrix::from_fn(n, |i, j| if i + 1 < n && j + 1 < n { m.get(i, j) } else { C64::new(0.0, 0.0) })
}

/// Relations between `a`, `a*` and `Q`, globally and on the bulk, with the
/// truncation defects matched against their predicted values.
pub fn prop_5_4_suite(m: &QDeformModel) -> ConditionReport {
    let q = m.q;
    let n = m.n;
    let qq = &m.q_mat;
    let a = &m.a;
    let a_star = a.adjoint();
    let u = &m.u;
    let rho2 = &m.rho_q * &m.rho_q;
    let rho2_qq = &m.rho_qq() * &m.rho_qq();
    let mut report = ConditionReport::new("prop_5_4");

    let d = &(&a_star * a) - &rho2;
    report.record("a*a = rho^2(Q)", d.spectral_norm(), EXACT_TOL);
    report.record("a*a = rho^2(Q) (bulk)", bulk(&d).spectral_norm(), EXACT_TOL);

    let d = &(a * &a_star) - &rho2_qq;
    report.record("aa* = rho^2(qQ) (bulk)", bulk(&d).spectral_norm(), EXACT_TOL);
    match m.rho.edge {
        Some(edge) => {
            report.record_expected("aa* = rho^2(qQ) (edge defect)", d.spectral_norm(), edge * edge, EDGE_TOL);
        }
        None => {
            report.note("rho(q^n) unknown; edge defect of aa* = rho^2(qQ) not predicted");
            report.record_info("aa* = rho^2(qQ) (edge defect)", d.spectral_norm());
        }
    }

    let d = &(a * qq) - &(qq * a).scale_real(q);
    report.record("aQ = qQa", d.spectral_norm(), EXACT_TOL);
    report.record("aQ = qQa (bulk)", bulk(&d).spectral_norm(), EXACT_TOL);
    let d = &(qq * &a_star) - &(&a_star * qq).scale_real(q);
    report.record("Qa* = qa*Q", d.spectral_norm(), EXACT_TOL);
    report.record("Qa* = qa*Q (bulk)", bulk(&d).spectral_norm(), EXACT_TOL);
    // the relation as printed, Qa = qa*Q, for comparison
    let d = &(qq * a) - &(&a_star * qq).scale_real(q);
    report.record_info("Qa = qa*Q (as printed)", d.spectral_norm());

    let d = &(u * qq) - &(qq * u).scale_real(q);
    report.record("UQ = qQU", d.spectral_norm(), EXACT_TOL);
    let d = &(&(u * qq) * &u.adjoint()) - &qq.scale_real(q);
    report.record_expected("UQU* - qQ (truncation defect)", d.spectral_norm(), q.powi(n as i32), EDGE_TOL);
    report.record("UQU* = qQ (bulk)", bulk(&d).spectral_norm(), EXACT_TOL);

    // U f(Q) = f(qQ) U for monomials and for rho
    let mut worst = 0.0_f64;
    for p in 0..=n as i32 {
        let f = ComplexMatrix::diag(&(0..n).map(|j| q.powi(j as i32 * p)).collect::<Vec<_>>());
        let fq = ComplexMatrix::diag(&(1..=n).map(|j| q.powi(j as i32 * p)).collect::<Vec<_>>());
        worst = worst.max((&(u * &f) - &(&fq * u)).spectral_norm() / f.spectral_norm());
    }
    report.record("U f(Q) = f(qQ) U (monomials)", worst, EXACT_TOL);
    let d = &(u * &m.rho_q) - &(&m.rho_qq() * u);
    report.record("U rho(Q) = rho(qQ) U", d.spectral_norm() / m.rho_scale(), EXACT_TOL);

    match m.base.algebra().bicommutant() {
        Ok(bi) => report.record("U*U in {Q}''", bi.relative_defect(&m.base.initial_projection(1)), m.base.tol()),
        Err(e) => {
            report.note(e.to_string());
            report.record_flag("U*U in {Q}''", false)
        }
    };
    report
}
