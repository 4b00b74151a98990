use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the LQO modeling pipeline.
#[derive(Debug, Error)]
pub enum LqoError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The resolvent `(sI - A)` is singular or numerically too close to singular.
    #[error("resolvent is singular at {which} = {point} (condition estimate {cond:.3e})")]
    Pole {
        which: &'static str,
        point: Complex64,
        cond: f64,
    },

    /// A barycentric denominator vanished at a non-support point.
    #[error("spurious pole: barycentric denominator vanishes at {0}")]
    SpuriousPole(Complex64),

    #[error("degenerate least-squares problem: {0}")]
    Degenerate(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("simulation diverged at t = {0}")]
    Divergence(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LqoError>;
