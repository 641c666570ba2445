use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};
use crate::system::IsometrySystem;

use super::NormalForm;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random normal form with degrees in `-max_degree..=max_degree`.
///
/// Each degree is present with probability 1/2, and degree 0 is added when
/// the draw is empty or normalizes to zero. Coefficients are Gaussian
/// matrices projected into the coefficient algebra, then normalized.
pub fn random_normal_form<R: Rng + ?Sized>(system: &Arc<IsometrySystem>, max_degree: usize, rng: &mut R) -> NormalForm {
    let d = max_degree as i64;
    let mut map = BTreeMap::new();
    for k in -d..=d {
        if rng.random_bool(0.5) {
            map.insert(k, system.algebra().project(&gaussian_matrix(system.dim(), rng)));
        }
    }
    if map.is_empty() {
        map.insert(0, system.algebra().project(&gaussian_matrix(system.dim(), rng)));
    }
    let x = NormalForm::from_map(system, map).expect("projected coefficients lie in the algebra");
    if !x.is_zero() {
        return x;
    }
    // every drawn degree was annihilated by normalization (nilpotent U)
    let a0 = system.algebra().project(&gaussian_matrix(system.dim(), rng));
    x.add(&NormalForm::monomial(system, 0, a0).expect("projected into the algebra")).expect("same system")
}
