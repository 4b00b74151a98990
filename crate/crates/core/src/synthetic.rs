//! Seeded random LQO systems used for reproducible experiments and tests.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::model::LqoStateSpace;

/// Margin kept between the spectrum of `A` and the imaginary axis.
const STABILITY_MARGIN: f64 = 0.1;

/// Options for [`random_stable_lqo`].
#[derive(Debug, Clone, Copy)]
pub struct SyntheticOptions {
    /// Scale of the entries of the random part of `A` (rad/s).
    pub freq_scale: f64,
    /// Include the linear output `c`; when false `c = 0`.
    pub linear_output: bool,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            freq_scale: 3.0,
            linear_output: true,
        }
    }
}

/// Random real LQO system of the given order with a Hurwitz `A` and symmetric `M`.
///
/// `A` is a Gaussian matrix shifted left until its rightmost eigenvalue has
/// real part `-(STABILITY_MARGIN + 0.2 * freq_scale)`. Deterministic in `seed`.
pub fn random_stable_lqo(order: usize, seed: u64, opts: SyntheticOptions) -> Result<LqoStateSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let scale = opts.freq_scale / (order as f64).sqrt();
    let g = DMatrix::from_fn(order, order, |_, _| normal() * scale);
    let b = DVector::from_fn(order, |_, _| normal());
    let c = if opts.linear_output {
        DVector::from_fn(order, |_, _| normal())
    } else {
        DVector::zeros(order)
    };
    let r = DMatrix::from_fn(order, order, |_, _| normal());
    let m = (&r + r.transpose()) * 0.5;

    let eig = g.complex_eigenvalues();
    let rightmost = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let shift = rightmost + STABILITY_MARGIN + 0.2 * opts.freq_scale;
    let a = g - DMatrix::identity(order, order) * shift;
    LqoStateSpace::from_real(&a, &b, &c, &m)
}
