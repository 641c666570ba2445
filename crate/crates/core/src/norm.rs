//! Numerical checks of property (*), the coefficient bounds, the norm
//! estimates for finite sums and the norm-limit formula.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::check_coefficient_algebra;
use crate::error::{Error, Result};
use crate::fourier::{gaussian_matrix, random_normal_form, NormalForm};
use crate::linalg::{ComplexMatrix, C64};
use crate::report::ConditionReport;
use crate::system::IsometrySystem;

/// Largest degree drawn by the property (*) sampler.
pub const SAMPLER_MAX_DEGREE: usize = 4;

/// Deterministic per-sample generator: stream `index` of the seed's ChaCha.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `count` random normal forms, sample `i` from stream `i` of `seed`.
pub fn sample_forms(system: &Arc<IsometrySystem>, count: usize, seed: u64) -> Vec<NormalForm> {
    (0..count)
        .into_par_iter()
        .map(|i| random_normal_form(system, SAMPLER_MAX_DEGREE, &mut sample_rng(seed, i as u64)))
        .collect()
}

/// Samples random normal forms and checks `||a_k|| <= ||x|| + tol` for every
/// stored degree, degree 0 being property (*) itself.
pub fn property_star_sample(system: &Arc<IsometrySystem>, samples: usize, seed: u64) -> ConditionReport {
    let tol = system.tol();
    let mut report = ConditionReport::new("property_star");
    let pre = check_coefficient_algebra(system);
    if !pre.pass {
        report.note("coefficient algebra conditions fail; samples are not canonical forms");
        report.absorb(&pre);
        return report;
    }
    let margins: Vec<(f64, f64, usize)> = sample_forms(system, samples, seed)
        .par_iter()
        .map(|x| {
            let norm = x.eval().spectral_norm();
            let zero = x.coefficient(0).spectral_norm() - norm;
            let mut worst = zero;
            let mut violations = 0;
            for (_, a) in x.terms() {
                let excess = a.spectral_norm() - norm;
                worst = worst.max(excess);
                if excess > tol {
                    violations += 1;
                }
            }
            (zero, worst, violations)
        })
        .collect();
    let zero = margins.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
    let all = margins.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    let violations: usize = margins.iter().map(|m| m.2).sum();
    report.record("||a_0|| - ||x|| (worst)", zero, tol);
    report.record("||a_k|| - ||x|| (worst)", all, tol);
    report.record("violations", violations as f64, 0.0);
    report.record_info("samples", samples as f64);
    report
}

fn norm_sum(ms: impl Iterator<Item = ComplexMatrix>, dim: usize) -> f64 {
    ms.fold(ComplexMatrix::zeros(dim), |acc, m| acc + m).spectral_norm()
}

/// The four norm estimates for `d_1, ..., d_m`:
///
/// * `||Σ d_i||^2 <= m ||Σ d_i d_i*||`
/// * `||Σ d_i||^2 <= m ||Σ d_i* d_i||`
/// * `||Σ |d_i| ||^2 >= ||Σ d_i* d_i|| / m`
/// * `||Σ sqrt(d_i d_i*)||^2 >= ||Σ d_i d_i*|| / m`
///
/// Each defect is the amount by which an inequality is violated, relative
/// to the larger side.
pub fn lemma_2_8_check(d: &[ComplexMatrix], tol: f64) -> Result<ConditionReport> {
    let first = d.first().ok_or_else(|| Error::InvalidArgument("need at least one operator".into()))?;
    let dim = first.dim();
    if let Some(bad) = d.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: bad.dim() });
    }
    let m = d.len() as f64;
    let outer: Vec<ComplexMatrix> = d.iter().map(|x| x * &x.adjoint()).collect();
    let inner: Vec<ComplexMatrix> = d.iter().map(|x| &x.adjoint() * x).collect();
    let abs: Result<Vec<ComplexMatrix>> = inner.iter().map(|h| h.psd_sqrt()).collect();
    let abs_star: Result<Vec<ComplexMatrix>> = outer.iter().map(|h| h.psd_sqrt()).collect();

    let sum_sq = norm_sum(d.iter().cloned(), dim).powi(2);
    let outer_n = norm_sum(outer.iter().cloned(), dim);
    let inner_n = norm_sum(inner.iter().cloned(), dim);
    let abs_sq = norm_sum(abs?.into_iter(), dim).powi(2);
    let abs_star_sq = norm_sum(abs_star?.into_iter(), dim).powi(2);

    let rel = |small: f64, big: f64| (small - big) / small.abs().max(big.abs()).max(1.0);
    let mut report = ConditionReport::new("lemma_2_8");
    report.record("||sum d||^2 <= m ||sum dd*||", rel(sum_sq, m * outer_n), tol);
    report.record("||sum d||^2 <= m ||sum d*d||", rel(sum_sq, m * inner_n), tol);
    report.record("||sum |d| ||^2 >= ||sum d*d|| / m", rel(inner_n / m, abs_sq), tol);
    report.record("||sum sqrt(dd*)||^2 >= ||sum dd*|| / m", rel(outer_n / m, abs_star_sq), tol);
    Ok(report)
}

/// [`lemma_2_8_check`] on `count` random tuples of `m <= 5` Gaussian
/// matrices of dimension `<= 8`; reports the worst defect of each inequality.
pub fn lemma_2_8_sample(count: usize, seed: u64, tol: f64) -> Result<ConditionReport> {
    let reports: Result<Vec<ConditionReport>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let m = rng.random_range(1..=5);
            let dim = rng.random_range(1..=8);
            let d: Vec<ComplexMatrix> = (0..m).map(|_| gaussian_matrix(dim, &mut rng)).collect();
            lemma_2_8_check(&d, tol)
        })
        .collect();
    let reports = reports?;
    let mut out = ConditionReport::new("lemma_2_8");
    let Some(first) = reports.first() else {
        return Ok(out);
    };
    for (idx, d) in first.defects.iter().enumerate() {
        let worst = reports.iter().map(|r| r.defects[idx].value).fold(f64::NEG_INFINITY, f64::max);
        out.record(format!("{} (worst)", d.check), worst, tol);
    }
    let violations = reports.iter().filter(|r| !r.pass).count();
    out.record("violations", violations as f64, 0.0);
    out.record_info("tuples", count as f64);
    Ok(out)
}

/// Trace of the norm-limit sequence `s_k = ||N_0[(xx*)^{2k}]||^{1/(4k)}`.
#[derive(Clone, Debug, Serialize)]
pub struct NormLimitTrace {
    pub x: NormalForm,
    pub max_degree: usize,
    pub k_values: Vec<u64>,
    pub s_values: Vec<f64>,
    /// `(4kN+1)^{1/(4k)} s_k`, the matching upper estimate at each `k`
    pub upper_values: Vec<f64>,
    pub direct_norm: f64,
    /// `||N_0(xx*)||`
    pub sandwich_lo: f64,
    /// `(2N+1) ||N_0(xx*)||`
    pub sandwich_hi: f64,
    /// Verdict of the property (*) sampler when the caller ran it.
    pub property_star: Option<bool>,
}

impl NormLimitTrace {
    /// Relative gap `|s_k - ||x|| | / ||x||` at the last computed `k`.
    pub fn final_gap(&self) -> f64 {
        match self.s_values.last() {
            Some(s) if self.direct_norm > 0.0 => (s - self.direct_norm).abs() / self.direct_norm,
            _ => 0.0,
        }
    }

    /// Checks the two-sided estimate at every level with relative slack `tol`.
    pub fn bounds_report(&self, tol: f64) -> ConditionReport {
        let mut report = ConditionReport::new("norm_limit");
        let x2 = self.direct_norm * self.direct_norm;
        let scale = x2.max(f64::MIN_POSITIVE);
        report.record("sandwich lower: ||N0(xx*)|| <= ||x||^2", (self.sandwich_lo - x2) / scale, tol);
        report.record("sandwich upper: ||x||^2 <= (2N+1)||N0(xx*)||", (x2 - self.sandwich_hi) / scale, tol);
        let d = self.direct_norm.max(f64::MIN_POSITIVE);
        // an empty schedule (x = 0) satisfies both bounds vacuously
        let worst = |it: &mut dyn Iterator<Item = f64>| it.reduce(f64::max).unwrap_or(0.0);
        let lower = worst(&mut self.s_values.iter().map(|s| (s - self.direct_norm) / d));
        let upper = worst(&mut self.upper_values.iter().map(|u| (self.direct_norm - u) / d));
        report.record("s_k <= ||x|| (all k)", lower, tol);
        report.record("||x|| <= (4kN+1)^(1/4k) s_k (all k)", upper, tol);
        report.record_info("final relative gap", self.final_gap());
        if let Some(star) = self.property_star {
            report.record_flag("property (*) sampler", star);
        }
        report
    }
}

/// Computes `s_k` for `k = 1, 2, 4, ...` up to `k_max` by repeated squaring of
/// `xx*`, after scaling `x` to unit norm.
pub fn norm_limit(x: &NormalForm, k_max: u64) -> Result<NormLimitTrace> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let direct = x.eval().spectral_norm();
    let n = x.max_degree();
    let mut trace = NormLimitTrace {
        x: x.clone(),
        max_degree: n,
        k_values: Vec::new(),
        s_values: Vec::new(),
        upper_values: Vec::new(),
        direct_norm: direct,
        sandwich_lo: 0.0,
        sandwich_hi: 0.0,
        property_star: None,
    };
    if direct == 0.0 {
        return Ok(trace);
    }
    let y = x.scale_by(C64::new(1.0 / direct, 0.0));
    let h = y.multiply(&y.adjoint())?;
    let lo = h.coefficient(0).spectral_norm();
    trace.sandwich_lo = lo * direct * direct;
    trace.sandwich_hi = (2 * n + 1) as f64 * trace.sandwich_lo;

    let mut power = h.multiply(&h)?;
    let mut k = 1u64;
    while k <= k_max {
        let n0 = power.coefficient(0).spectral_norm();
        if !n0.is_finite() {
            return Err(Error::Overflow { power: 2 * k });
        }
        let root = 1.0 / (4 * k) as f64;
        let s = n0.powf(root) * direct;
        let factor = ((4 * k * n as u64 + 1) as f64).powf(root);
        if !s.is_finite() {
            return Err(Error::Overflow { power: 2 * k });
        }
        trace.k_values.push(k);
        trace.s_values.push(s);
        trace.upper_values.push(factor * s);
        k *= 2;
        if k <= k_max {
            power = power.multiply(&power)?;
        }
    }
    Ok(trace)
}

/// `| ||Φ_λ(x)|| - ||x|| | <= tol * scale` over the `grid`-th roots of unity.
pub fn gauge_invariance_check(x: &NormalForm, grid: usize) -> Result<ConditionReport> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let tol = x.system().tol();
    let base = x.eval().spectral_norm();
    let scale = base.max(x.scale()).max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for j in 0..grid {
        let lambda = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / grid as f64);
        let g = x.gauge(lambda)?.eval().spectral_norm();
        worst = worst.max((g - base).abs() / scale);
    }
    let mut report = ConditionReport::new("gauge_invariance");
    report.record("max | ||x(lambda)|| - ||x|| | / scale", worst, tol);
    Ok(report)
}
