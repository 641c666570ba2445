use thiserror::Error;

use crate::report::ConditionReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not self-adjoint (defect {defect:.3e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("operator is not a partial isometry")]
    NotPartialIsometry(Box<ConditionReport>),

    #[error("Gram-Schmidt residual {residual:.3e} falls in the ambiguous band ({tol:.1e}, {upper:.1e})")]
    ToleranceCollapse { residual: f64, tol: f64, upper: f64 },

    #[error("algebra is not commutative (commutator defect {defect:.3e})")]
    NotCommutative { defect: f64 },

    #[error("hypothesis `{}` violated", .0.name)]
    HypothesisViolated(Box<ConditionReport>),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("system does not carry a coefficient algebra")]
    NotCoefficientAlgebra(Box<ConditionReport>),

    #[error("coefficient of degree {degree} left the coefficient algebra (defect {defect:.3e})")]
    CoefficientEscape { degree: i64, defect: f64 },

    #[error("normal forms belong to different systems")]
    SystemMismatch,

    #[error("gauge parameter is not unimodular (|lambda| = {modulus})")]
    NotUnimodular { modulus: f64 },

    #[error("{samples} sample points cannot resolve degree {max_degree}; need more than {}", 2 * .max_degree)]
    InsufficientResolution { samples: usize, max_degree: usize },

    #[error("coefficient norms overflowed at power {power}; pre-scale x by 1/||x||")]
    Overflow { power: u64 },

    #[error("condition aa* in A0 violated (membership defect {defect:.3e})")]
    Condition54Violated { defect: f64 },

    #[error("rho condition violated at basis vector e{index}: {reason}")]
    RhoConditionViolated { index: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
