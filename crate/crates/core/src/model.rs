//! Linear systems with quadratic output:
//!
//! ```text
//! x'(t) = A x(t) + b u(t)
//! y(t)  = c^T x(t) + x(t)^T M x(t)
//! ```
//!
//! The quadratic output is stored as the square matrix `M`; the equivalent row
//! vector `K = vec(M)^T` acting on `x ⊗ x` is derived on demand.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LqoError, Result};
use crate::linalg::{resolvent_solve, vec_col_major, CMat, CVec};

/// State-space realization of a single-input single-output LQO system.
#[derive(Debug, Clone, PartialEq)]
pub struct LqoStateSpace {
    a: CMat,
    b: CVec,
    c: CVec,
    m: CMat,
    real: bool,
}

impl LqoStateSpace {
    pub fn new(a: CMat, b: CVec, c: CVec, m: CMat) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(LqoError::Dimension("state dimension must be positive".into()));
        }
        if a.ncols() != n {
            return Err(LqoError::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if b.len() != n || c.len() != n {
            return Err(LqoError::Dimension(format!(
                "b has length {}, c has length {}, expected {n}",
                b.len(),
                c.len()
            )));
        }
        if m.nrows() != n || m.ncols() != n {
            return Err(LqoError::Dimension(format!(
                "M is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let real = [a.as_slice(), b.as_slice(), c.as_slice(), m.as_slice()]
            .iter()
            .all(|s| s.iter().all(|v| v.im == 0.0));
        Ok(Self { a, b, c, m, real })
    }

    /// Build from real matrices.
    pub fn from_real(
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
        m: &DMatrix<f64>,
    ) -> Result<Self> {
        let cx = |x: &f64| Complex64::new(*x, 0.0);
        Self::new(a.map(|x| cx(&x)), b.map(|x| cx(&x)), c.map(|x| cx(&x)), m.map(|x| cx(&x)))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn a(&self) -> &CMat {
        &self.a
    }
    pub fn b(&self) -> &CVec {
        &self.b
    }
    pub fn c(&self) -> &CVec {
        &self.c
    }
    pub fn m(&self) -> &CMat {
        &self.m
    }
    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// The row vector `K = vec(M)^T`.
    pub fn k(&self) -> Vec<Complex64> {
        vec_col_major(&self.m)
    }

    /// Same system with `M` replaced by `(M + M^T)/2`.
    pub fn symmetrized(&self) -> Self {
        let m = (&self.m + self.m.transpose()) * Complex64::new(0.5, 0.0);
        Self {
            m,
            ..self.clone()
        }
    }

    /// `(sI - A)^{-1} b`.
    pub fn resolvent(&self, s: Complex64) -> Result<CVec> {
        resolvent_solve(&self.a, &self.b, s, "s")
    }

    /// Linear transfer function `H1(s) = c^T (sI - A)^{-1} b`.
    pub fn eval_h1(&self, s: Complex64) -> Result<Complex64> {
        let u = self.resolvent(s)?;
        Ok(self.c.dot(&u))
    }

    /// Quadratic transfer function `H2(s, z) = u(s)^T M u(z)`, `u(.) = (.I - A)^{-1} b`.
    pub fn eval_h2(&self, s: Complex64, z: Complex64) -> Result<Complex64> {
        let us = resolvent_solve(&self.a, &self.b, s, "s")?;
        let uz = if z == s {
            us.clone()
        } else {
            resolvent_solve(&self.a, &self.b, z, "z")?
        };
        Ok(quad_form(&us, &self.m, &uz))
    }

    /// Steady-state output for the input `u(t) = sum_j exp(i w_j t)`.
    ///
    /// A frequency of exactly zero is evaluated at `s = 0`.
    pub fn harmonic_output(&self, freqs: &[f64], t: f64) -> Result<Complex64> {
        if freqs.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(LqoError::Argument("frequencies must be finite and nonnegative".into()));
        }
        let res: Vec<CVec> = freqs
            .iter()
            .map(|&w| self.resolvent(Complex64::new(0.0, w)))
            .collect::<Result<_>>()?;
        let phase = |w: f64| Complex64::new(0.0, w * t).exp();
        let mut y = Complex64::new(0.0, 0.0);
        for (j, uj) in res.iter().enumerate() {
            y += self.c.dot(uj) * phase(freqs[j]);
            let muj = &self.m * uj;
            for (l, ul) in res.iter().enumerate() {
                // H2(iw_l, iw_j) = u_l^T M u_j
                y += ul.dot(&muj) * phase(freqs[j] + freqs[l]);
            }
        }
        Ok(y)
    }

    /// Apply a state similarity `x = P x_new`.
    pub fn transformed(&self, p: &CMat) -> Result<Self> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| LqoError::Argument("similarity transform is singular".into()))?;
        let a = &pinv * &self.a * p;
        let b = &pinv * &self.b;
        let c = p.transpose() * &self.c;
        let m = p.transpose() * &self.m * p;
        Self::new(a, b, c, m)
    }

    /// Largest imaginary-part magnitude across all entries.
    pub fn max_imag(&self) -> f64 {
        [self.a.as_slice(), self.b.as_slice(), self.c.as_slice(), self.m.as_slice()]
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v.im.abs())
            .fold(0.0, f64::max)
    }

    /// Drop imaginary parts; fails if any exceeds `tol` times the largest entry magnitude.
    pub fn to_real(&self, tol: f64) -> Result<Self> {
        let scale = [self.a.as_slice(), self.b.as_slice(), self.c.as_slice(), self.m.as_slice()]
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let residue = self.max_imag() / scale;
        if residue > tol {
            return Err(LqoError::Validation(format!(
                "imaginary residue {residue:.3e} exceeds {tol:.3e}"
            )));
        }
        let re = |m: &CMat| m.map(|v| Complex64::new(v.re, 0.0));
        let rev = |m: &CVec| m.map(|v| Complex64::new(v.re, 0.0));
        Self::new(re(&self.a), rev(&self.b), rev(&self.c), re(&self.m))
    }
}

/// `u^T M v` without conjugation.
pub fn quad_form(u: &CVec, m: &CMat, v: &CVec) -> Complex64 {
    u.dot(&(m * v))
}

/// `vec(M)^T` for a square matrix.
pub fn matrix_to_kron(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(LqoError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(vec_col_major(m))
}

/// Inverse of [`matrix_to_kron`].
pub fn kron_to_matrix(k: &[Complex64]) -> Result<CMat> {
    let n = (k.len() as f64).sqrt().round() as usize;
    if n * n != k.len() {
        return Err(LqoError::Dimension(format!("length {} is not a perfect square", k.len())));
    }
    Ok(CMat::from_column_slice(n, n, k))
}

/// Kronecker product of two vectors.
pub fn kron_vec(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
}

// ---------------------------------------------------------------------------
// JSON

/// A number stored either as a bare real or as an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonNum {
    Real(f64),
    Complex([f64; 2]),
}

impl From<JsonNum> for Complex64 {
    fn from(v: JsonNum) -> Self {
        match v {
            JsonNum::Real(r) => Complex64::new(r, 0.0),
            JsonNum::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

pub(crate) fn to_json_num(v: Complex64, real: bool) -> JsonNum {
    if real {
        JsonNum::Real(v.re)
    } else {
        JsonNum::Complex([v.re, v.im])
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    dim: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<JsonNum>>,
    b: Vec<JsonNum>,
    c: Vec<JsonNum>,
    #[serde(rename = "M")]
    m: Vec<Vec<JsonNum>>,
}

pub(crate) fn rows_to_cmat(rows: &[Vec<JsonNum>], name: &str) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err(LqoError::Parse {
            context: name.into(),
            message: "ragged matrix rows".into(),
        });
    }
    Ok(CMat::from_fn(nr, nc, |i, j| rows[i][j].into()))
}

pub(crate) fn cmat_to_rows(m: &CMat, real: bool) -> Vec<Vec<JsonNum>> {
    m.row_iter()
        .map(|r| r.iter().map(|v| to_json_num(*v, real)).collect())
        .collect()
}

impl LqoStateSpace {
    pub fn to_json(&self) -> String {
        let real = self.real;
        let doc = ModelJson {
            dim: self.dim(),
            a: cmat_to_rows(&self.a, real),
            b: self.b.iter().map(|v| to_json_num(*v, real)).collect(),
            c: self.c.iter().map(|v| to_json_num(*v, real)).collect(),
            m: cmat_to_rows(&self.m, real),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelJson = serde_json::from_str(text).map_err(|e| LqoError::Parse {
            context: format!("model JSON line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let a = rows_to_cmat(&doc.a, "A")?;
        let m = rows_to_cmat(&doc.m, "M")?;
        let b = CVec::from_iterator(doc.b.len(), doc.b.into_iter().map(Complex64::from));
        let c = CVec::from_iterator(doc.c.len(), doc.c.into_iter().map(Complex64::from));
        if a.nrows() != doc.dim {
            return Err(LqoError::Validation(format!(
                "dim = {} but A has {} rows",
                doc.dim,
                a.nrows()
            )));
        }
        Self::new(a, b, c, m)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
