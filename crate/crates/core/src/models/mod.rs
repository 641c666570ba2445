//! The two worked examples, the polar-decomposition model and the truncated
//! q-deformed model, plus user-supplied systems, all loadable from JSON.

mod polar;
mod qdeform;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::FiniteStarAlgebra;
use crate::conditions::minimal_coefficient_algebra;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::report::ConditionReport;
use crate::system::IsometrySystem;

pub use polar::{build_polar_model, polar_decompose, theorem_5_1_suite, weighted_shift, PolarModel, RANK_TOL};
pub use qdeform::{
    backward_shift, build_qdeform, heisenberg_rho, prop_5_4_suite, rho_samples, sl2_rho, QDeformModel, RhoName,
    RhoSamples, RhoSpec, EDGE_TOL, EXACT_TOL,
};

/// Base algebra of a custom model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Named(AlgebraName),
    Generators { generators: Vec<ComplexMatrix> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraName {
    Diagonal,
    Full,
    Scalars,
}

impl Default for AlgebraSpec {
    fn default() -> Self {
        AlgebraSpec::Named(AlgebraName::Diagonal)
    }
}

/// JSON model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Polar {
        a: ComplexMatrix,
    },
    Qdeform {
        n: usize,
        q: f64,
        rho: RhoSpec,
    },
    /// A partial isometry over an explicit algebra. With `extend` the system
    /// is built over `E_*(E(A))` instead of `A`.
    Custom {
        u: ComplexMatrix,
        #[serde(default)]
        algebra: AlgebraSpec,
        #[serde(default)]
        extend: bool,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug)]
pub struct CustomModel {
    pub u: ComplexMatrix,
    pub generators: Vec<ComplexMatrix>,
    pub base: Arc<IsometrySystem>,
    pub system: Arc<IsometrySystem>,
}

impl CustomModel {
    pub fn assemble(u: &ComplexMatrix, algebra: &AlgebraSpec, extend: bool, tol: f64) -> Result<Self> {
        let dim = u.dim();
        let (alg, generators) = match algebra {
            AlgebraSpec::Named(AlgebraName::Diagonal) => (FiniteStarAlgebra::diagonal(dim, tol), Vec::new()),
            AlgebraSpec::Named(AlgebraName::Full) => (FiniteStarAlgebra::full(dim, tol), Vec::new()),
            AlgebraSpec::Named(AlgebraName::Scalars) => {
                (FiniteStarAlgebra::generate_closure(dim, &[], tol)?, Vec::new())
            }
            AlgebraSpec::Generators { generators } => {
                (FiniteStarAlgebra::generate_closure(dim, generators, tol)?, generators.clone())
            }
        };
        let base = Arc::new(IsometrySystem::new(alg, u.clone())?);
        let system =
            if extend { Arc::new(base.with_algebra(minimal_coefficient_algebra(&base)?)?) } else { base.clone() };
        Ok(Self { u: u.clone(), generators, base, system })
    }

    pub fn conditions(&self) -> ConditionReport {
        let mut report = ConditionReport::new("model_conditions");
        report.absorb(&self.u.is_partial_isometry(self.base.tol()));
        report.record("algebra closed under products", self.base.algebra().closure_defect(), self.base.tol());
        report
    }
}

/// A built model of any kind. Standing conditions are not enforced here;
/// they are reported by [`Model::conditions`].
#[derive(Clone, Debug)]
pub enum Model {
    Polar(PolarModel),
    QDeform(QDeformModel),
    Custom(CustomModel),
}

impl Model {
    pub fn assemble(spec: &ModelSpec, tol: f64) -> Result<Self> {
        match spec {
            ModelSpec::Polar { a } => Ok(Model::Polar(PolarModel::assemble(a, tol)?)),
            ModelSpec::Qdeform { n, q, rho } => {
                Ok(Model::QDeform(QDeformModel::assemble(*n, *q, rho_samples(*n, *q, rho)?, tol)?))
            }
            ModelSpec::Custom { u, algebra, extend } => {
                Ok(Model::Custom(CustomModel::assemble(u, algebra, *extend, tol)?))
            }
        }
    }

    /// Like [`Model::assemble`], but refuses models whose standing
    /// conditions fail.
    pub fn build(spec: &ModelSpec, tol: f64) -> Result<Self> {
        match spec {
            ModelSpec::Polar { a } => Ok(Model::Polar(build_polar_model(a, tol)?)),
            ModelSpec::Qdeform { n, q, rho } => Ok(Model::QDeform(build_qdeform(*n, *q, rho, tol)?)),
            ModelSpec::Custom { .. } => {
                let m = Self::assemble(spec, tol)?;
                let report = m.conditions();
                if !report.pass {
                    return Err(Error::HypothesisViolated(Box::new(report)));
                }
                Ok(m)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Polar(_) => "polar",
            Model::QDeform(_) => "qdeform",
            Model::Custom(_) => "custom",
        }
    }

    /// `U` over the algebra the model starts from.
    pub fn base(&self) -> &Arc<IsometrySystem> {
        match self {
            Model::Polar(m) => &m.base,
            Model::QDeform(m) => &m.base,
            Model::Custom(m) => &m.base,
        }
    }

    /// `U` over the coefficient algebra the normal forms live in.
    pub fn system(&self) -> &Arc<IsometrySystem> {
        match self {
            Model::Polar(m) => &m.system,
            Model::QDeform(m) => &m.system,
            Model::Custom(m) => &m.system,
        }
    }

    pub fn conditions(&self) -> ConditionReport {
        match self {
            Model::Polar(m) => m.conditions(),
            Model::QDeform(m) => m.conditions(),
            Model::Custom(m) => m.conditions(),
        }
    }

    /// Named coefficient-algebra elements usable in expressions.
    pub fn generators(&self) -> HashMap<String, ComplexMatrix> {
        let mut t = HashMap::new();
        match self {
            Model::Polar(m) => {
                t.insert("absa".to_string(), m.abs_a.clone());
            }
            Model::QDeform(m) => {
                t.insert("Q".to_string(), m.q_mat.clone());
                t.insert("rho".to_string(), m.rho_q.clone());
            }
            Model::Custom(m) => {
                for (i, g) in m.generators.iter().enumerate() {
                    t.insert(format!("g{i}"), g.clone());
                }
            }
        }
        t
    }
}
