//! Data-driven reduced models for linear systems with quadratic output.
//!
//! Samples of the linear transfer function `H1(s)` and the bivariate
//! quadratic transfer function `H2(s, z)` are fitted by a barycentric pair
//! `(r1, r2)` sharing one denominator, chosen greedily by [`aaa_lqo::run`].

pub mod aaa;
pub mod aaa_lqo;
pub mod barycentric;
pub mod error;
pub mod linalg;
pub mod loewner;
pub mod model;
pub mod mtx;
pub mod samples;
pub mod sim;
pub mod synthetic;

#[cfg(test)]
mod testutil;

pub use aaa::{aaa_fit, AaaModel};
pub use aaa_lqo::{run, AaaLqoConfig, AaaLqoReport, AaaLqoState, IterationRecord};
pub use barycentric::BarycentricLqo;
pub use error::{LqoError, Result};
pub use linalg::{CMat, CVec};
pub use loewner::{LoewnerBlocks, Partition, RhoMode};
pub use model::LqoStateSpace;
pub use samples::SampleSet;
pub use sim::{output_error, simulate_lqo, Signal, Trace};
pub use num_complex::Complex64;
