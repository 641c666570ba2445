//! Sampled agreement between normal-form arithmetic and matrix evaluation.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::norm::{sample_forms, sample_rng, SAMPLER_MAX_DEGREE};
use crate::report::ConditionReport;
use crate::system::IsometrySystem;

use super::{random_normal_form, strip_degree};

/// Relative tolerance of the homomorphism laws.
pub const HOMOMORPHISM_TOL: f64 = 1e-10;

/// `eval` against product, sum and adjoint on `samples` random pairs:
/// `||eval(xy) - eval(x)eval(y)|| <= 1e-10 ||x|| ||y||` and likewise.
pub fn homomorphism_sample(system: &Arc<IsometrySystem>, samples: usize, seed: u64) -> Result<ConditionReport> {
    let defects: Result<Vec<[f64; 3]>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let x = random_normal_form(system, SAMPLER_MAX_DEGREE, &mut rng);
            let y = random_normal_form(system, SAMPLER_MAX_DEGREE, &mut rng);
            let (ex, ey) = (x.eval(), y.eval());
            let (nx, ny) = (ex.spectral_norm(), ey.spectral_norm());
            let tiny = f64::MIN_POSITIVE;
            let prod = (&x.multiply(&y)?.eval() - &(&ex * &ey)).spectral_norm() / (nx * ny).max(tiny);
            let sum = (&x.add(&y)?.eval() - &(&ex + &ey)).spectral_norm() / (nx + ny).max(tiny);
            let adj = (&x.adjoint().eval() - &ex.adjoint()).spectral_norm() / nx.max(tiny);
            Ok([prod, sum, adj])
        })
        .collect();
    let defects = defects?;
    let worst = |i: usize| defects.iter().map(|d| d[i]).fold(0.0, f64::max);
    let mut report = ConditionReport::new("homomorphism");
    report.record("eval(xy) = eval(x)eval(y)", worst(0), HOMOMORPHISM_TOL);
    report.record("eval(x + y) = eval(x) + eval(y)", worst(1), HOMOMORPHISM_TOL);
    report.record("eval(x*) = eval(x)*", worst(2), HOMOMORPHISM_TOL);
    report.record_info("pairs", samples as f64);
    Ok(report)
}

/// Stored coefficients against the gauge average with `2N + 1` points,
/// stripped of its `U` power.
pub fn coefficient_oracle_sample(system: &Arc<IsometrySystem>, samples: usize, seed: u64) -> Result<ConditionReport> {
    let tol = system.tol();
    let defects: Result<Vec<f64>> = sample_forms(system, samples, seed)
        .par_iter()
        .map(|x| {
            let n = x.max_degree();
            let scale = x.eval().spectral_norm().max(x.scale()).max(f64::MIN_POSITIVE);
            let mut worst = 0.0_f64;
            for k in x.degrees() {
                let avg = x.gauge_average(k, 2 * n + 1)?;
                let d = (&strip_degree(system, k, &avg) - &x.coefficient(k)).spectral_norm() / scale;
                worst = worst.max(d);
            }
            Ok(worst)
        })
        .collect();
    let worst = defects?.into_iter().fold(0.0, f64::max);
    let mut report = ConditionReport::new("coefficient_oracle");
    report.record("coefficient(x, k) = stripped gauge average", worst, tol);
    report.record_info("samples", samples as f64);
    Ok(report)
}
