//! Shared fixtures for the `lqo-core` benchmarks.

use lqo_core::samples::{conjugate_close, log_space_axis, sample_lqo};
use lqo_core::synthetic::{random_stable_lqo, SyntheticOptions};
use lqo_core::SampleSet;

/// Conjugate-closed samples of a seeded random model on `[0.1, 100] i`.
pub fn synthetic_samples(order: usize, half: usize) -> SampleSet {
    let model = random_stable_lqo(order, 1, SyntheticOptions::default()).expect("stable model");
    let (pts, pair) = conjugate_close(&log_space_axis(-1.0, 2.0, half).expect("axis"));
    sample_lqo(&model, &pts, Some(pair)).expect("no poles on the axis")
}
