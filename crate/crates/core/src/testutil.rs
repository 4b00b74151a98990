//! Helpers shared by unit tests.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{CMat, CVec};
use crate::model::LqoStateSpace;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `A = [-1]`, `b = [1]`, `c = [lin]`, `M = [quad]`.
pub fn real_scalar_model(lin: f64, quad: f64) -> LqoStateSpace {
    LqoStateSpace::new(
        CMat::from_element(1, 1, c(-1.0, 0.0)),
        CVec::from_element(1, c(1.0, 0.0)),
        CVec::from_element(1, c(lin, 0.0)),
        CMat::from_element(1, 1, c(quad, 0.0)),
    )
    .unwrap()
}

/// Random model with a diagonally dominant Hurwitz `A`.
pub fn random_stable_model(rng: &mut impl Rng, n: usize, real: bool) -> LqoStateSpace {
    let entry = |rng: &mut dyn rand::RngCore| {
        let re = rng.random_range(-1.0..1.0);
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        c(re, im)
    };
    let mut a = CMat::from_fn(n, n, |_, _| entry(rng));
    for i in 0..n {
        a[(i, i)] -= c(n as f64 + 0.5, 0.0);
    }
    let b = CVec::from_fn(n, |_, _| entry(rng));
    let cc = CVec::from_fn(n, |_, _| entry(rng));
    let m = CMat::from_fn(n, n, |_, _| entry(rng));
    LqoStateSpace::new(a, b, cc, m).unwrap()
}
