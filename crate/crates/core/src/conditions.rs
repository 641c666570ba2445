//! Condition checkers and extension builders for coefficient algebras.
//!
//! Every checker returns a [`ConditionReport`]; only the builders and the
//! commutative checks, whose hypotheses gate their meaning, return errors.

use crate::algebra::{FiniteStarAlgebra, OrthoSpan};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::report::ConditionReport;
use crate::system::{Direction, IsometrySystem};

/// Result of iterating `δ` (or `δ_*`) on the algebra as a chain of subspaces.
#[derive(Clone, Debug)]
pub struct Chain {
    /// Orthonormal bases of the distinct spans `δ^n(A)` for `n < stabilization`.
    pub levels: Vec<Vec<ComplexMatrix>>,
    /// First `n` whose span repeats an earlier one, if reached within the cap.
    pub stabilization: Option<usize>,
    /// Index of the earlier level that `δ^stabilization(A)` coincides with.
    pub repeats: Option<usize>,
}

/// Iterates the chain `δ^n(A)`, n = 0, 1, ..., until a span repeats or
/// `n_max` is exceeded. Once a span repeats the sequence is periodic, so the
/// recorded levels cover every `n`.
pub fn chain(sys: &IsometrySystem, dir: Direction, n_max: usize) -> Result<Chain> {
    let tol = sys.tol();
    let dim = sys.dim();
    let mut spans: Vec<OrthoSpan> = Vec::new();
    let mut current: Vec<ComplexMatrix> = sys.algebra().basis().to_vec();
    for n in 0..=n_max {
        let mut span = OrthoSpan::new(dim, tol);
        for m in &current {
            span.insert(m)?;
        }
        if let Some(prev) = spans.iter().position(|s| s.same_span(&span)) {
            return Ok(Chain {
                levels: spans.into_iter().map(|s| s.vectors().to_vec()).collect(),
                stabilization: Some(n),
                repeats: Some(prev),
            });
        }
        current = span.vectors().iter().map(|m| sys.apply(dir, m)).collect();
        spans.push(span);
    }
    Ok(Chain { levels: spans.into_iter().map(|s| s.vectors().to_vec()).collect(), stabilization: None, repeats: None })
}

/// Default cap on chain length: the ambient dimension squared.
pub fn default_cap(sys: &IsometrySystem) -> usize {
    sys.dim() * sys.dim()
}

/// `max ||δ(ab) - δ(a)δ(b)||` over basis pairs (or `δ_*` for [`Direction::DeltaStar`]).
pub fn multiplicativity_defect(sys: &IsometrySystem, dir: Direction) -> f64 {
    let basis = sys.algebra().basis();
    let images: Vec<_> = basis.iter().map(|b| sys.apply(dir, b)).collect();
    let mut worst = 0.0_f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let lhs = sys.apply(dir, &(a * b));
            let rhs = &images[i] * &images[j];
            worst = worst.max((&lhs - &rhs).spectral_norm());
        }
    }
    worst
}

/// Worst relative membership defect of `δ(b)` (resp. `δ_*(b)`) over the basis.
pub fn invariance_defect(sys: &IsometrySystem, dir: Direction) -> f64 {
    let alg = sys.algebra();
    alg.basis().iter().map(|b| alg.relative_defect(&sys.apply(dir, b))).fold(0.0, f64::max)
}

fn max_commutator(fixed: &ComplexMatrix, others: &[ComplexMatrix]) -> f64 {
    others.iter().map(|b| fixed.commutator(b).spectral_norm()).fold(0.0, f64::max)
}

/// Three equivalent forms of the covariance relation `Ua = δ(a)U`,
/// evaluated independently.
pub fn check_prop_2_2(sys: &IsometrySystem) -> ConditionReport {
    let tol = sys.tol();
    let basis = sys.algebra().basis();
    let u = sys.u();
    let ustar_u = sys.initial_projection(1).into_owned();
    let mut report = ConditionReport::new("prop_2_2");

    let cov =
        basis.iter().map(|a| (&(u * a) - &(sys.apply(Direction::Delta, a) * u)).spectral_norm()).fold(0.0, f64::max);
    let i_ok = report.record("(i) Ua = delta(a)U", cov, tol);

    let central = max_commutator(&ustar_u, basis);
    let pi = u.is_partial_isometry(tol).max_defect();
    let ii_ok = report.record("(ii) U partial isometry", pi, tol) & report.record("(ii) U*U in A'", central, tol);

    let mult = multiplicativity_defect(sys, Direction::Delta);
    let iii_ok =
        report.record("(iii) U*U in A'", central, tol) & report.record("(iii) delta(ab) = delta(a)delta(b)", mult, tol);

    let agree = i_ok == ii_ok && ii_ok == iii_ok;
    if !agree {
        report.note(format!(
            "equivalent conditions disagree: (i)={i_ok} (ii)={ii_ok} (iii)={iii_ok}; numerical fault or tolerance edge"
        ));
    }
    report.record_flag("equivalents agree", agree);
    report
}

/// Coefficient algebra: `U*U` central for `A` (covariance), `δ(A) ⊆ A` and
/// `δ_*(A) ⊆ A`.
pub fn check_coefficient_algebra(sys: &IsometrySystem) -> ConditionReport {
    let tol = sys.tol();
    let mut report = ConditionReport::new("coefficient_algebra");
    report.absorb(&check_prop_2_2(sys));
    report.record("delta(A) in A", invariance_defect(sys, Direction::Delta), tol);
    report.record("delta_*(A) in A", invariance_defect(sys, Direction::DeltaStar), tol);
    report
}

/// `U*U` commutes with every `δ^n(A)`, n = 0..=n_max. Also reports where the
/// chain `δ^n(A)` first repeats.
pub fn check_3_6(sys: &IsometrySystem, n_max: usize) -> ConditionReport {
    let tol = sys.tol();
    let mut report = ConditionReport::new("condition_3_6");
    let ustar_u = sys.initial_projection(1).into_owned();
    match chain(sys, Direction::Delta, n_max) {
        Ok(c) => {
            let worst = c.levels.iter().map(|lvl| max_commutator(&ustar_u, lvl)).fold(0.0, f64::max);
            report.record("[U*U, delta^n(a)]", worst, tol);
            match c.stabilization {
                Some(n) => {
                    report.record_info("stabilization index", n as f64);
                    report.note(format!("delta^{n}(A) repeats delta^{}(A)", c.repeats.unwrap_or(0)));
                }
                None => report.note(format!("chain did not repeat within n_max = {n_max}")),
            }
        }
        Err(e) => {
            report.record_flag("chain construction", false);
            report.note(e.to_string());
        }
    }
    report
}

/// `[a, δ^n(b)] = 0` for all `a, b` in a commutative algebra, together with
/// the [`check_3_6`] commutation.
pub fn check_4_1_4_2(sys: &IsometrySystem, n_max: usize) -> Result<ConditionReport> {
    let tol = sys.tol();
    let alg = sys.algebra();
    let comm = alg.commutativity_defect();
    if comm > tol {
        return Err(Error::NotCommutative { defect: comm });
    }
    let mut report = ConditionReport::new("condition_4_1_4_2");
    let c = chain(sys, Direction::Delta, n_max)?;
    let worst =
        alg.basis().iter().flat_map(|a| c.levels.iter().map(move |lvl| max_commutator(a, lvl))).fold(0.0, f64::max);
    report.record("[a, delta^n(b)]", worst, tol);
    report.absorb(&check_3_6(sys, n_max));
    Ok(report)
}

/// `{ ⋃_n map^n(A) }` with no hypothesis gate.
pub fn tower(sys: &IsometrySystem, dir: Direction, cap: usize) -> Result<FiniteStarAlgebra> {
    let c = chain(sys, dir, cap)?;
    let gens: Vec<ComplexMatrix> = c.levels.into_iter().flatten().collect();
    FiniteStarAlgebra::generate_closure(sys.dim(), &gens, sys.tol())
}

/// `E(A)`, the *-algebra generated by all `δ^n(A)`. Requires [`check_3_6`].
pub fn extend_e(sys: &IsometrySystem) -> Result<FiniteStarAlgebra> {
    let cap = default_cap(sys);
    let pre = check_3_6(sys, cap);
    if !pre.pass {
        return Err(Error::HypothesisViolated(Box::new(pre)));
    }
    tower(sys, Direction::Delta, cap)
}

/// Hypotheses of the `E_*` extension: covariance and `δ(A) ⊆ A`.
pub fn estar_hypotheses(sys: &IsometrySystem) -> ConditionReport {
    let mut report = ConditionReport::new("extend_estar_hypotheses");
    report.absorb(&check_prop_2_2(sys));
    report.record("delta(A) in A", invariance_defect(sys, Direction::Delta), sys.tol());
    report
}

/// `E_*(A)`, the *-algebra generated by all `δ_*^n(A)`. Requires covariance and
/// `δ(A) ⊆ A`.
pub fn extend_estar(sys: &IsometrySystem) -> Result<FiniteStarAlgebra> {
    let pre = estar_hypotheses(sys);
    if !pre.pass {
        return Err(Error::HypothesisViolated(Box::new(pre)));
    }
    tower(sys, Direction::DeltaStar, default_cap(sys))
}

/// `E_*(E(A))`, the minimal coefficient algebra containing `A`.
pub fn minimal_coefficient_algebra(sys: &IsometrySystem) -> Result<FiniteStarAlgebra> {
    let e = extend_e(sys)?;
    extend_estar(&sys.with_algebra(e)?)
}

/// Structure of the power families `U^k`, `U^{*k}` for an algebra with
/// covariance and `δ(A) ⊆ A`.
pub fn verify_prop_3_5(sys: &IsometrySystem, k_max: usize) -> ConditionReport {
    let tol = sys.tol();
    let mut report = ConditionReport::new("prop_3_5");
    let pre = estar_hypotheses(sys);
    if !pre.pass {
        report.note("covariance or delta(A) in A fails; conclusions not expected to hold");
        report.absorb(&pre);
    }
    let basis = sys.algebra().basis();
    let p = |k: usize| sys.initial_projection(k).into_owned();
    let q = |k: usize| sys.final_projection(k).into_owned();

    let mut cov = 0.0_f64;
    let mut in_commutant = 0.0_f64;
    let mut proj = 0.0_f64;
    let mut pairwise = 0.0_f64;
    let mut decreasing = 0.0_f64;
    let mut cross = 0.0_f64;
    for k in 1..=k_max {
        let uk = sys.u_pow(k).into_owned();
        for a in basis {
            let lhs = &uk * a;
            let rhs = &sys.delta_pow(a, k).expect("dims match") * &uk;
            cov = cov.max((&lhs - &rhs).spectral_norm());
        }
        let (pk, qk) = (p(k), q(k));
        in_commutant = in_commutant.max(max_commutator(&pk, basis));
        for m in [&pk, &qk] {
            proj = proj.max((&(m * m) - m).spectral_norm()).max(m.self_adjoint_defect());
        }
        for l in 1..=k_max {
            pairwise = pairwise.max(pk.commutator(&p(l)).spectral_norm());
            pairwise = pairwise.max(qk.commutator(&q(l)).spectral_norm());
        }
        let (pn, qn) = (p(k + 1), q(k + 1));
        decreasing = decreasing.max((&(&pk * &pn) - &pn).spectral_norm());
        decreasing = decreasing.max((&(&qk * &qn) - &qn).spectral_norm());
    }
    for k in 0..=k_max {
        for l in 0..=k_max {
            cross = cross.max(p(k).commutator(&q(l)).spectral_norm());
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
    report.record("(ii) U^k a = delta^k(a) U^k", cov, tol);
    report.record("(iii) U*^k U^k in A'", in_commutant, tol);
    report.record("(iv)/(v) projections", proj, tol);
    report.record("(iv)/(v) pairwise commuting", pairwise, tol);
    report.record("(iv)/(v) decreasing", decreasing, tol);
    report.record("(vi) [U*^k U^k, U^l U*^l]", cross, tol);
    report.record("(vii) U*U^kU*^l = U^(k-1)U*^l, UU*^kU^l = U*^(k-1)U^l", shifts, tol);
    report
}

/// Both orders of the two towers agree: `E_*(E(A)) = E(E_*(A))`, the result
/// is commutative and invariant under `δ` and `δ_*`.
pub fn verify_4_4(sys: &IsometrySystem) -> Result<ConditionReport> {
    let cap = default_cap(sys);
    let pre = check_4_1_4_2(sys, cap)?;
    if !pre.pass {
        return Err(Error::HypothesisViolated(Box::new(pre)));
    }
    let tol = sys.tol();
    let e = tower(sys, Direction::Delta, cap)?;
    let estar_e = tower(&sys.with_algebra(e)?, Direction::DeltaStar, cap)?;
    let estar = tower(sys, Direction::DeltaStar, cap)?;
    let e_estar = tower(&sys.with_algebra(estar)?, Direction::Delta, cap)?;

    let mut report = ConditionReport::new("identity_4_4");
    let fwd = estar_e.basis().iter().map(|b| e_estar.relative_defect(b)).fold(0.0, f64::max);
    let bwd = e_estar.basis().iter().map(|b| estar_e.relative_defect(b)).fold(0.0, f64::max);
    report.record("E_*(E(A)) in E(E_*(A))", fwd, tol);
    report.record("E(E_*(A)) in E_*(E(A))", bwd, tol);
    report.record("commutative", estar_e.commutativity_defect(), tol);
    let top = sys.with_algebra(estar_e.clone())?;
    report.record("delta invariant", invariance_defect(&top, Direction::Delta), tol);
    report.record("delta_* invariant", invariance_defect(&top, Direction::DeltaStar), tol);
    report.record("delta multiplicative", multiplicativity_defect(&top, Direction::Delta), tol);
    report.record("delta_* multiplicative", multiplicativity_defect(&top, Direction::DeltaStar), tol);
    report.record_info("dimension E_*(E(A))", estar_e.dimension() as f64);
    report.record_info("dimension E(E_*(A))", e_estar.dimension() as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_TOL;
    use crate::linalg::C64;

    const TOL: f64 = DEFAULT_TOL;

    /// Backward shift `U e_j = e_{j-1}`, `U e_1 = 0`.
    fn backward_shift(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |i, j| if j == i + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    fn diag_system(n: usize) -> IsometrySystem {
        IsometrySystem::new(FiniteStarAlgebra::diagonal(n, TOL), backward_shift(n)).unwrap()
    }

    fn scalars_system(n: usize) -> IsometrySystem {
        let a = FiniteStarAlgebra::generate_closure(n, &[], TOL).unwrap();
        IsometrySystem::new(a, backward_shift(n)).unwrap()
    }

    /// Rank-one partial isometry with non-diagonal initial projection.
    fn tilted(n: usize) -> ComplexMatrix {
        let s = 0.5_f64.sqrt();
        ComplexMatrix::from_fn(n, |i, j| if i == 0 && j < 2 { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) })
    }

    #[test]
    fn prop_2_2_examples() {
        let r = check_prop_2_2(&diag_system(4));
        assert!(r.pass, "{r:?}");
        assert!(r.max_defect() <= 1e-14);

        let full = IsometrySystem::new(FiniteStarAlgebra::full(2, TOL), backward_shift(2)).unwrap();
        let r = check_prop_2_2(&full);
        assert!(!r.pass);
        assert_eq!(r.defect("equivalents agree"), Some(0.0));
        for c in ["(i) Ua = delta(a)U", "(ii) U*U in A'", "(iii) delta(ab) = delta(a)delta(b)"] {
            assert!(r.failures().contains(&c), "{c} should fail: {r:?}");
        }

        let any = FiniteStarAlgebra::generate_closure(
            3,
            &[ComplexMatrix::from_real_rows(&[&[0., 1., 0.], &[0., 0., 1.], &[1., 0., 2.]]).unwrap()],
            TOL,
        )
        .unwrap();
        let r = check_prop_2_2(&IsometrySystem::new(any, ComplexMatrix::identity(3)).unwrap());
        assert!(r.pass);
    }

    #[test]
    fn coefficient_algebra_examples() {
        assert!(check_coefficient_algebra(&diag_system(5)).pass);
        // δ(1) = UU* is not scalar
        let r = check_coefficient_algebra(&scalars_system(3));
        assert!(!r.pass);
        assert!(r.failures().contains(&"delta(A) in A"));
    }

    #[test]
    fn condition_3_6_examples() {
        let r = check_3_6(&scalars_system(4), 16);
        assert!(r.pass);
        // δ^n(1) = diag with n trailing zeros; the chain reaches {0} at n = 4 and repeats at 5
        assert_eq!(r.defect("stabilization index"), Some(5.0));

        let broken = IsometrySystem::new(FiniteStarAlgebra::diagonal(3, TOL), tilted(3)).unwrap();
        let r = check_3_6(&broken, 9);
        assert!(!r.pass);
        assert!(r.defect("[U*U, delta^n(a)]").unwrap() > 0.1);
    }

    #[test]
    fn condition_4_1_4_2_examples() {
        let r = check_4_1_4_2(&scalars_system(4), 16).unwrap();
        assert!(r.pass);
        let full = IsometrySystem::new(FiniteStarAlgebra::full(2, TOL), backward_shift(2)).unwrap();
        assert!(matches!(check_4_1_4_2(&full, 4), Err(Error::NotCommutative { .. })));
    }

    #[test]
    fn towers_grow_from_scalars() {
        let sys = scalars_system(4);
        let e = extend_e(&sys).unwrap();
        // span{δ^k(1)} = span of the nested projections diag(1..1,0..0)
        assert_eq!(e.dimension(), 4);
        for k in 0..4 {
            assert!(e.contains(&sys.final_projection(k)).unwrap().0);
        }
        let coeff = minimal_coefficient_algebra(&sys).unwrap();
        assert!(coeff.same_span(&FiniteStarAlgebra::diagonal(4, TOL)));
        assert!(check_coefficient_algebra(&sys.with_algebra(coeff).unwrap()).pass);
        // scalars are not δ-invariant, so E_* alone is refused
        assert!(matches!(extend_estar(&sys), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn extension_fixed_point() {
        let sys = diag_system(4);
        assert!(extend_e(&sys).unwrap().same_span(sys.algebra()));
        assert!(extend_estar(&sys).unwrap().same_span(sys.algebra()));
    }

    #[test]
    fn extend_e_refuses_without_3_6() {
        let broken = IsometrySystem::new(FiniteStarAlgebra::diagonal(3, TOL), tilted(3)).unwrap();
        match extend_e(&broken) {
            Err(Error::HypothesisViolated(r)) => assert_eq!(r.name, "condition_3_6"),
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn prop_3_5_examples() {
        let r = verify_prop_3_5(&diag_system(6), 5);
        assert!(r.pass, "{r:?}");
        assert!(r.max_defect() <= 1e-13);

        // k = l = 1 instance of (vii): U*UU* = U*
        let u = backward_shift(3);
        let us = u.adjoint();
        assert!((&(&(&us * &u) * &us) - &us).spectral_norm() == 0.0);

        let theta = 0.3_f64;
        let rot = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => C64::new(theta.cos(), 0.0),
            (0, 1) => C64::new(-theta.sin(), 0.0),
            _ => C64::new(theta.sin(), 0.0),
        });
        let sys = IsometrySystem::new(FiniteStarAlgebra::generate_closure(2, &[], TOL).unwrap(), rot).unwrap();
        let r = verify_prop_3_5(&sys, 4);
        assert!(r.pass, "{r:?}");
        assert!((sys.initial_projection(3).as_ref() - &ComplexMatrix::identity(2)).spectral_norm() < 1e-14);
    }

    #[test]
    fn identity_4_4_on_scalars() {
        let r = verify_4_4(&scalars_system(4)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.defect("dimension E_*(E(A))"), Some(4.0));
    }

    #[test]
    fn identity_4_4_fixed_point() {
        let r = verify_4_4(&diag_system(3)).unwrap();
        assert!(r.pass);
        assert_eq!(r.defect("dimension E(E_*(A))"), Some(3.0));
    }

    #[test]
    fn periodic_chain_is_detected() {
        // a cyclic permutation rotates the diagonal projections
        let n = 3;
        let perm =
            ComplexMatrix::from_fn(n, |i, j| if (j + 1) % n == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let a = FiniteStarAlgebra::generate_closure(n, &[ComplexMatrix::diag(&[1.0, 0.0, 0.0])], TOL).unwrap();
        let sys = IsometrySystem::new(a, perm).unwrap();
        let c = chain(&sys, Direction::Delta, 20).unwrap();
        assert_eq!(c.stabilization, Some(3));
        assert_eq!(c.repeats, Some(0));
    }
}
