//! Coefficient algebras, Fourier-like normal forms and norm formulas for the
//! C*-algebra generated by a finite-dimensional *-algebra and a partial
//! isometry.

pub mod algebra;
pub mod cli;
pub mod conditions;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod models;
pub mod norm;
pub mod report;
pub mod system;

pub use algebra::{FiniteStarAlgebra, DEFAULT_TOL};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use report::ConditionReport;
pub use system::{Direction, IsometrySystem};
