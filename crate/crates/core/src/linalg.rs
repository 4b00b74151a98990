//! Dense complex linear-algebra helpers shared by the model, fitting and
//! simulation modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LqoError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column-stacking `vec(M)` laid out as a row vector.
pub fn vec_col_major(m: &CMat) -> Vec<Complex64> {
    // nalgebra storage is column-major already
    m.as_slice().to_vec()
}

/// Solve `(s I - A) x = b` by LU with partial pivoting.
///
/// Fails with [`LqoError::Pole`] when the factorization is singular or when
/// the estimate `(||A||_1 + |s|) * ||x||_1 / ||b||_1` of the scaled resolvent
/// norm exceeds `1/sqrt(eps)`.
pub fn resolvent_solve(a: &CMat, b: &CVec, s: Complex64, which: &'static str) -> Result<CVec> {
    let n = a.nrows();
    let mut shifted = -a.clone();
    for i in 0..n {
        shifted[(i, i)] += s;
    }
    let scale = one_norm(a) + s.norm();
    let lu = shifted.lu();
    let x = lu.solve(b).ok_or(LqoError::Pole {
        which,
        point: s,
        cond: f64::INFINITY,
    })?;
    let bnorm: f64 = b.iter().map(|v| v.norm()).sum();
    let xnorm: f64 = x.iter().map(|v| v.norm()).sum();
    if bnorm > 0.0 {
        let cond = scale * xnorm / bnorm;
        if !cond.is_finite() || cond > 1.0 / f64::EPSILON.sqrt() {
            return Err(LqoError::Pole {
                which,
                point: s,
                cond,
            });
        }
    }
    Ok(x)
}

/// Matrix 1-norm (max column sum).
pub fn one_norm(m: &CMat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Outcome of a minimum-norm least-squares solve.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: CVec,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub residual_norm: f64,
}

/// Minimum-norm solution of `min ||A x - b||_2` via SVD, discarding singular
/// values below `max(m, n) * eps * sigma_max`.
pub fn lstsq(a: &CMat, b: &CVec) -> Result<LstsqSolution> {
    if a.nrows() != b.len() {
        return Err(LqoError::Dimension(format!(
            "lstsq: matrix has {} rows, rhs has {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.ncols() == 0 {
        return Ok(LstsqSolution {
            x: CVec::zeros(0),
            rank: 0,
            singular_values: Vec::new(),
            residual_norm: b.norm(),
        });
    }
    if a.iter().all(|v| *v == ZERO) {
        return Err(LqoError::Degenerate("stacked matrix is identically zero".into()));
    }
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(LqoError::Degenerate("stacked matrix has non-finite entries".into()));
    }

    // Tall problems: reduce to the square triangular factor first so the SVD
    // works on an n x n matrix.
    let (core, rhs) = if a.nrows() > 2 * a.ncols() {
        let qr = a.clone().qr();
        let q = qr.q();
        let r = qr.r();
        (r, q.adjoint() * b)
    } else {
        (a.clone(), b.clone())
    };

    let svd = core.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.adjoint() * &rhs;
    let mut y = CVec::zeros(vt.nrows());
    let mut rank = 0;
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cutoff {
            y[i] = utb[i] / sv;
            rank += 1;
        }
    }
    let x = vt.adjoint() * y;
    let residual_norm = (a * &x - b).norm();
    Ok(LstsqSolution {
        x,
        rank,
        singular_values: svd.singular_values.iter().cloned().collect(),
        residual_norm,
    })
}

/// Relative difference `|a-b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: Complex64, b: Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}
