use std::sync::Arc;

use crate::algebra::FiniteStarAlgebra;
use crate::conditions::{minimal_coefficient_algebra, multiplicativity_defect};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::report::ConditionReport;
use crate::system::{Direction, IsometrySystem};

/// Singular values at or below `RANK_TOL * ||a||` are treated as kernel.
pub const RANK_TOL: f64 = 1e-10;

/// Polar decomposition `a = U|a|`, returned as `(U, |a|)`.
///
/// Computed from the singular value decomposition `a = W S V*`: `|a| = V S V*`
/// and `U = W_r V_r*` over the singular values above the rank tolerance, so
/// `U` vanishes on `ker |a|`.
pub fn polar_decompose(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let norm = a.spectral_norm();
    let svd = a.inner().clone().svd(true, true);
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut u = ComplexMatrix::zeros(n);
    let mut abs_a = ComplexMatrix::zeros(n);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= RANK_TOL * norm {
            continue;
        }
        // v_t row i is v_i*
        let v_row = v_t.row(i);
        let outer_u = ComplexMatrix::from_fn(n, |r, c| w[(r, i)] * v_row[c]);
        let outer_v = ComplexMatrix::from_fn(n, |r, c| v_row[r].conj() * v_row[c] * s);
        u += &outer_u;
        abs_a += &outer_v;
    }
    (u, abs_a)
}

/// Projection onto `ker |a|` (the complement of the support of `U*U`).
fn kernel_projection(u: &ComplexMatrix) -> ComplexMatrix {
    &ComplexMatrix::identity(u.dim()) - &(&u.adjoint() * u)
}

/// Model built from the polar decomposition of an operator `a` whose
/// `aa*` lies in the algebra generated by `1` and `|a|`.
#[derive(Clone, Debug)]
pub struct PolarModel {
    pub a: ComplexMatrix,
    pub abs_a: ComplexMatrix,
    pub u: ComplexMatrix,
    /// `{1, |a|}` closure
    pub a0: FiniteStarAlgebra,
    /// `U` over `A0`
    pub base: Arc<IsometrySystem>,
    /// `U` over `E_*(E(A0))`
    pub system: Arc<IsometrySystem>,
}

impl PolarModel {
    /// Builds every piece without gating on `aa* ∈ A0`; see [`build_polar_model`].
    pub fn assemble(a: &ComplexMatrix, tol: f64) -> Result<Self> {
        let (u, abs_a) = polar_decompose(a);
        let a0 = FiniteStarAlgebra::generate_closure(a.dim(), std::slice::from_ref(&abs_a), tol)?;
        let base = Arc::new(IsometrySystem::new(a0.clone(), u.clone())?);
        let top = minimal_coefficient_algebra(&base)?;
        let system = Arc::new(base.with_algebra(top)?);
        Ok(Self { a: a.clone(), abs_a, u, a0, base, system })
    }

    /// Relative membership defect of `aa*` in `A0`.
    pub fn condition_defect(&self) -> f64 {
        self.a0.relative_defect(&(&self.a * &self.a.adjoint()))
    }

    /// Standing conditions of the model: the decomposition itself and
    /// `aa* ∈ A0`.
    pub fn conditions(&self) -> ConditionReport {
        let tol = self.base.tol();
        let norm = self.a.spectral_norm().max(f64::MIN_POSITIVE);
        let mut report = ConditionReport::new("model_conditions");
        report.record("a = U|a| (relative)", (&self.a - &(&self.u * &self.abs_a)).spectral_norm() / norm, RANK_TOL);
        report.record("U vanishes on ker|a|", (&self.u * &kernel_projection(&self.u)).spectral_norm(), tol);
        report.record("aa* in A0", self.condition_defect(), tol);
        report.record_info("dimension A0", self.a0.dimension() as f64);
        report.record_info("dimension E_*(E(A0))", self.system.algebra().dimension() as f64);
        report
    }
}

/// Polar model for `a`; fails with [`Error::Condition54Violated`] unless
/// `aa*` lies in the closure of `{1, |a|}`.
pub fn build_polar_model(a: &ComplexMatrix, tol: f64) -> Result<PolarModel> {
    let (_, abs_a) = polar_decompose(a);
    let a0 = FiniteStarAlgebra::generate_closure(a.dim(), std::slice::from_ref(&abs_a), tol)?;
    let defect = a0.relative_defect(&(a * &a.adjoint()));
    if defect > tol {
        return Err(Error::Condition54Violated { defect });
    }
    let model = PolarModel::assemble(a, tol)?;
    let coeff = crate::conditions::check_coefficient_algebra(&model.system);
    if !coeff.pass {
        return Err(Error::HypothesisViolated(Box::new(coeff)));
    }
    Ok(model)
}

/// Structure of the powers of `U` for a polar model, up to `k_max`:
///
/// * `δ^k(|a|)` lies in the closure of `{1, |a|, UU*, ..., U^{k-1}U*^{k-1}}`
/// * `δ` is multiplicative on the closure of `{|a|, U^kU*^k : k <= k_max}`
/// * `U^kU*^k` lies in the bicommutant of `A0`
/// * `U*U^kU*^l = U^{k-1}U*^l` and `UU*^kU^l = U*^{k-1}U^l` for `1 <= k <= l`
/// * `[U*^lU^l, U^kU*^k] = 0`
pub fn theorem_5_1_suite(m: &PolarModel, k_max: usize) -> ConditionReport {
    let sys = &m.base;
    let tol = sys.tol();
    let dim = sys.dim();
    let mut report = ConditionReport::new("theorem_5_1");
    let q = |k: usize| sys.final_projection(k).into_owned();

    let mut membership = 0.0_f64;
    let mut gens = vec![m.abs_a.clone()];
    for k in 1..=k_max {
        let img = sys.delta_pow(&m.abs_a, k).expect("dims match");
        match FiniteStarAlgebra::generate_closure(dim, &gens, tol) {
            Ok(c) => membership = membership.max(c.relative_defect(&img)),
            Err(e) => {
                report.note(format!("closure at k = {k}: {e}"));
                membership = f64::INFINITY;
            }
        }
        gens.push(q(k));
    }
    report.record("delta^k(|a|) in {1, |a|, UU*, ..., U^(k-1)U*^(k-1)}", membership, tol);

    let mult = FiniteStarAlgebra::generate_closure(dim, &gens, tol)
        .and_then(|c| IsometrySystem::new(c, m.u.clone()))
        .map(|s| multiplicativity_defect(&s, Direction::Delta));
    match mult {
        Ok(d) => report.record("delta multiplicative on the closure", d, tol),
        Err(e) => {
            report.note(e.to_string());
            report.record_flag("delta multiplicative on the closure", false)
        }
    };

    match m.a0.bicommutant() {
        Ok(bi) => {
            let worst = (0..=k_max).map(|k| bi.relative_defect(&q(k))).fold(0.0, f64::max);
            report.record("U^kU*^k in A0''", worst, tol);
        }
        Err(e) => {
            report.note(e.to_string());
            report.record_flag("U^kU*^k in A0''", false);
        }
    }

    let mut shifts = 0.0_f64;
    for l in 1..=k_max {
        for k in 1..=l {
            let lhs = &(sys.u_star() * sys.u_pow(k).as_ref()) * sys.u_star_pow(l).as_ref();
            let rhs = sys.u_pow(k - 1).as_ref() * sys.u_star_pow(l).as_ref();
            shifts = shifts.max((&lhs - &rhs).spectral_norm());
            let lhs = &(sys.u() * sys.u_star_pow(k).as_ref()) * sys.u_pow(l).as_ref();
            let rhs = sys.u_star_pow(k - 1).as_ref() * sys.u_pow(l).as_ref();
            shifts = shifts.max((&lhs - &rhs).spectral_norm());
        }
    }
    report.record("U*U^kU*^l = U^(k-1)U*^l, UU*^kU^l = U*^(k-1)U^l", shifts, tol);

    let mut comm = 0.0_f64;
    for l in 1..=k_max {
        let p = sys.initial_projection(l).into_owned();
        for k in 1..=k_max {
            comm = comm.max(p.commutator(&q(k)).spectral_norm());
        }
    }
    report.record("[U*^lU^l, U^kU*^k]", comm, tol);
    report
}

/// Weighted backward shift `a e_{j+1} = w_j e_j`.
pub fn weighted_shift(weights: &[f64]) -> ComplexMatrix {
    let n = weights.len() + 1;
    ComplexMatrix::from_fn(n, |i, j| if j == i + 1 { C64::new(weights[i], 0.0) } else { C64::new(0.0, 0.0) })
}
