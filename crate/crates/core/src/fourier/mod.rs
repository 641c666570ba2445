//! Canonical Fourier-like normal forms: parsing, reduction, arithmetic,
//! coefficient maps and the gauge action.

mod expr;
mod normal_form;
mod oracles;
mod random;

pub use expr::{parse, Expr};
pub use normal_form::{check_left_covariance, reduce, strip_degree, NormalForm};
pub use oracles::{coefficient_oracle_sample, homomorphism_sample, HOMOMORPHISM_TOL};
pub use random::{gaussian_matrix, random_normal_form};
