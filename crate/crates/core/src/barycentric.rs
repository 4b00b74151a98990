//! Joint barycentric representation of a reduced LQO model.
//!
//! With support points `xi_k`, weights `w_k`, values `h_k = H1(xi_k)` and
//! `h_kl = H2(xi_k, xi_l)`:
//!
//! ```text
//! r1(s)    = sum_k w_k h_k / (s - xi_k)  /  (1 + sum_k w_k / (s - xi_k))
//! r2(s, z) = sum_kl h_kl w_k w_l / ((s - xi_k)(z - xi_l))  /  (d1(s) d1(z))
//! ```
//!
//! Both interpolate the support data, and together they are the transfer
//! functions of the state-space model returned by [`BarycentricLqo::realize`]:
//! `A = diag(xi) - w 1^T`, `b = w`, `c = h`, `M = [h_kl]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LqoError, Result};
use crate::linalg::{CMat, CVec, ONE, ZERO};
use crate::model::LqoStateSpace;

/// Barycentric pair `(r1, r2)`.
///
/// Order zero is a constant model (`r1 ≡ c1`, `r2 ≡ c2`) used to start the
/// greedy iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricLqo {
    xi: Vec<Complex64>,
    w: CVec,
    h: CVec,
    hmat: CMat,
    constants: (Complex64, Complex64),
}

/// Position of `s` among the support points (exact comparison).
fn support_index(xi: &[Complex64], s: Complex64) -> Option<usize> {
    xi.iter().position(|&x| x == s)
}

impl BarycentricLqo {
    pub fn new(xi: Vec<Complex64>, w: CVec, h: CVec, hmat: CMat) -> Result<Self> {
        let n = xi.len();
        if n == 0 {
            return Err(LqoError::Argument("use BarycentricLqo::constant for order zero".into()));
        }
        if w.len() != n || h.len() != n || hmat.nrows() != n || hmat.ncols() != n {
            return Err(LqoError::Dimension(format!(
                "order {n}: w has {}, h has {}, Hmat is {}x{}",
                w.len(),
                h.len(),
                hmat.nrows(),
                hmat.ncols()
            )));
        }
        for i in 0..n {
            if xi[..i].contains(&xi[i]) {
                return Err(LqoError::Validation(format!("support point {} is repeated", xi[i])));
            }
        }
        Ok(Self {
            xi,
            w,
            h,
            hmat,
            constants: (ZERO, ZERO),
        })
    }

    /// Order-zero constant model.
    pub fn constant(c1: Complex64, c2: Complex64) -> Self {
        Self {
            xi: Vec::new(),
            w: CVec::zeros(0),
            h: CVec::zeros(0),
            hmat: CMat::zeros(0, 0),
            constants: (c1, c2),
        }
    }

    pub fn order(&self) -> usize {
        self.xi.len()
    }
    pub fn support(&self) -> &[Complex64] {
        &self.xi
    }
    pub fn weights(&self) -> &CVec {
        &self.w
    }
    pub fn values(&self) -> &CVec {
        &self.h
    }
    pub fn hmat(&self) -> &CMat {
        &self.hmat
    }
    pub fn constants(&self) -> (Complex64, Complex64) {
        self.constants
    }
    pub fn is_constant(&self) -> bool {
        self.xi.is_empty()
    }

    /// Returns `(n1(s), d1(s))`; `s` must not be a support point.
    pub fn n1_d1(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut n1 = ZERO;
        let mut d1 = ONE;
        for k in 0..self.order() {
            let t = self.w[k] / (s - self.xi[k]);
            n1 += t * self.h[k];
            d1 += t;
        }
        (n1, d1)
    }

    pub fn eval_r1(&self, s: Complex64) -> Result<Complex64> {
        if self.is_constant() {
            return Ok(self.constants.0);
        }
        if let Some(k) = support_index(&self.xi, s) {
            return Ok(self.h[k]);
        }
        let (n1, d1) = self.n1_d1(s);
        quotient(n1, d1, s)
    }

    pub fn eval_r2(&self, s: Complex64, z: Complex64) -> Result<Complex64> {
        if self.is_constant() {
            return Ok(self.constants.1);
        }
        match (support_index(&self.xi, s), support_index(&self.xi, z)) {
            (Some(i), Some(j)) => Ok(self.hmat[(i, j)]),
            (Some(i), None) => self.eval_r2_mixed_left(i, z),
            (None, Some(j)) => self.eval_r2_mixed_right(s, j),
            (None, None) => self.eval_r2_general(s, z),
        }
    }

    /// Factored bivariate formula `N(s,z) / (d1(s) d1(z))`, valid off the
    /// support set.
    pub fn eval_r2_general(&self, s: Complex64, z: Complex64) -> Result<Complex64> {
        let n = self.order();
        let ps: Vec<Complex64> = (0..n).map(|k| self.w[k] / (s - self.xi[k])).collect();
        let pz: Vec<Complex64> = (0..n).map(|l| self.w[l] / (z - self.xi[l])).collect();
        let mut num = ZERO;
        for k in 0..n {
            let mut row = ZERO;
            for l in 0..n {
                row += self.hmat[(k, l)] * pz[l];
            }
            num += ps[k] * row;
        }
        let ds = ONE + ps.iter().sum::<Complex64>();
        let dz = ONE + pz.iter().sum::<Complex64>();
        if ds == ZERO {
            return Err(LqoError::SpuriousPole(s));
        }
        if dz == ZERO {
            return Err(LqoError::SpuriousPole(z));
        }
        let v = num / (ds * dz);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(LqoError::SpuriousPole(if ds.norm() < dz.norm() { s } else { z }))
        }
    }

    /// `r2(xi_i, shat)`: numerator and denominator are linear in the weights.
    pub fn eval_r2_mixed_left(&self, i: usize, shat: Complex64) -> Result<Complex64> {
        self.check_index(i)?;
        let mut num = ZERO;
        let mut den = ONE;
        for l in 0..self.order() {
            let t = self.w[l] / (shat - self.xi[l]);
            num += t * self.hmat[(i, l)];
            den += t;
        }
        quotient(num, den, shat)
    }

    /// `r2(shat, xi_i)`.
    pub fn eval_r2_mixed_right(&self, shat: Complex64, i: usize) -> Result<Complex64> {
        self.check_index(i)?;
        let mut num = ZERO;
        let mut den = ONE;
        for k in 0..self.order() {
            let t = self.w[k] / (shat - self.xi[k]);
            num += t * self.hmat[(k, i)];
            den += t;
        }
        quotient(num, den, shat)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.order() {
            return Err(LqoError::Argument(format!(
                "support index {i} out of range for order {}",
                self.order()
            )));
        }
        Ok(())
    }

    /// State-space realization `A = diag(xi) - w 1^T`, `b = w`, `c = h`, `M = Hmat`.
    pub fn realize(&self) -> Result<LqoStateSpace> {
        if self.is_constant() {
            return Err(LqoError::Argument("a constant model has no strictly proper realization".into()));
        }
        let n = self.order();
        // exactly-zero weights would make the matching state uncontrollable
        let floor = f64::MIN_POSITIVE * self.w.norm().max(1.0);
        let w = self.w.map(|v| if v == ZERO { Complex64::new(floor, 0.0) } else { v });
        let a = CMat::from_fn(n, n, |i, j| if i == j { self.xi[i] } else { ZERO } - w[i]);
        LqoStateSpace::new(a, w, self.h.clone(), self.hmat.clone())
    }

    /// Real state-space realization for a conjugate-symmetric fit.
    ///
    /// Each conjugate pair of support states `(x_k, x_k')` is replaced by
    /// `(y1, y2)` with `x_k = y1 + i y2`, `x_k' = y1 - i y2`; real support
    /// points keep their state. Fails if the support set is not closed under
    /// conjugation or the transformed matrices keep an imaginary part above
    /// `tol` relative to their largest entry.
    pub fn realize_real(&self, tol: f64) -> Result<LqoStateSpace> {
        let complex = self.realize()?;
        let p = self.real_transform()?;
        complex.transformed(&p)?.to_real(tol)
    }

    /// Similarity transform pairing conjugate support states into real blocks.
    pub fn real_transform(&self) -> Result<CMat> {
        let n = self.order();
        let scale = 1.0 + self.xi.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        let mut p = CMat::zeros(n, n);
        let mut used = vec![false; n];
        let mut col = 0;
        for k in 0..n {
            if used[k] {
                continue;
            }
            used[k] = true;
            if self.xi[k].im.abs() <= tol {
                p[(k, col)] = ONE;
                col += 1;
                continue;
            }
            let partner = (0..n)
                .find(|&j| !used[j] && (self.xi[j] - self.xi[k].conj()).norm() <= tol)
                .ok_or_else(|| {
                    LqoError::Validation(format!("support point {} has no conjugate partner", self.xi[k]))
                })?;
            used[partner] = true;
            p[(k, col)] = ONE;
            p[(partner, col)] = ONE;
            p[(k, col + 1)] = Complex64::new(0.0, 1.0);
            p[(partner, col + 1)] = Complex64::new(0.0, -1.0);
            col += 2;
        }
        Ok(p)
    }

    /// Columns `phi(p)` with `r1(p) = h^T phi(p)` and `r2(p, q) = phi(p)^T Hmat phi(q)`.
    ///
    /// `phi(xi_i) = e_i`; elsewhere `phi(p)_k = w_k / ((p - xi_k) d1(p))`, i.e. the
    /// resolvent `(pI - A)^{-1} b` of the realization. Columns at spurious poles
    /// are left zero and reported in the returned flags.
    fn features(&self, points: &[Complex64]) -> (CMat, Vec<bool>) {
        let n = self.order();
        let mut phi = CMat::zeros(n, points.len());
        let mut poles = vec![false; points.len()];
        for (j, &p) in points.iter().enumerate() {
            if let Some(i) = support_index(&self.xi, p) {
                phi[(i, j)] = ONE;
                continue;
            }
            let mut d1 = ONE;
            for k in 0..n {
                let t = self.w[k] / (p - self.xi[k]);
                phi[(k, j)] = t;
                d1 += t;
            }
            let inv = ONE / d1;
            if d1 == ZERO || !inv.re.is_finite() || !inv.im.is_finite() {
                poles[j] = true;
                phi.column_mut(j).fill(ZERO);
            } else {
                for k in 0..n {
                    phi[(k, j)] *= inv;
                }
            }
        }
        (phi, poles)
    }

    /// `r1` on every point; spurious poles are an error naming the point.
    pub fn eval_r1_grid(&self, points: &[Complex64]) -> Result<CVec> {
        let (v, poles) = self.eval_r1_grid_lenient(points);
        match poles.iter().position(|&p| p) {
            Some(j) => Err(LqoError::SpuriousPole(points[j])),
            None => Ok(v),
        }
    }

    /// `r2` on the grid `points x points`.
    pub fn eval_r2_grid(&self, points: &[Complex64]) -> Result<CMat> {
        let (v, poles) = self.eval_r2_grid_lenient(points);
        match poles.iter().position(|&p| p) {
            Some(j) => Err(LqoError::SpuriousPole(points[j])),
            None => Ok(v),
        }
    }

    /// Like [`Self::eval_r1_grid`], with infinite values at spurious poles.
    pub fn eval_r1_grid_lenient(&self, points: &[Complex64]) -> (CVec, Vec<bool>) {
        if self.is_constant() {
            return (CVec::from_element(points.len(), self.constants.0), vec![false; points.len()]);
        }
        let (phi, poles) = self.features(points);
        let mut v = (self.h.transpose() * &phi).transpose();
        for (j, &p) in poles.iter().enumerate() {
            if p {
                v[j] = Complex64::new(f64::INFINITY, 0.0);
            }
        }
        (v, poles)
    }

    /// Like [`Self::eval_r2_grid`], with infinite rows and columns at spurious poles.
    pub fn eval_r2_grid_lenient(&self, points: &[Complex64]) -> (CMat, Vec<bool>) {
        let np = points.len();
        if self.is_constant() {
            return (CMat::from_element(np, np, self.constants.1), vec![false; np]);
        }
        let (phi, poles) = self.features(points);
        let mut v = phi.transpose() * &self.hmat * &phi;
        let inf = Complex64::new(f64::INFINITY, 0.0);
        for (j, &p) in poles.iter().enumerate() {
            if p {
                v.row_mut(j).fill(inf);
                v.column_mut(j).fill(inf);
            }
        }
        (v, poles)
    }
}

fn quotient(num: Complex64, den: Complex64, at: Complex64) -> Result<Complex64> {
    if den == ZERO {
        return Err(LqoError::SpuriousPole(at));
    }
    let v = num / den;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(LqoError::SpuriousPole(at))
    }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Serialize, Deserialize)]
struct BaryJson {
    xi: Vec<[f64; 2]>,
    w: Vec<[f64; 2]>,
    h: Vec<[f64; 2]>,
    #[serde(rename = "Hmat")]
    hmat: Vec<Vec<[f64; 2]>>,
    /// Only present for the order-zero constant model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<[[f64; 2]; 2]>,
}

fn pr(v: &Complex64) -> [f64; 2] {
    [v.re, v.im]
}
fn un(v: &[f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl BarycentricLqo {
    pub fn to_json(&self) -> String {
        let doc = BaryJson {
            xi: self.xi.iter().map(pr).collect(),
            w: self.w.iter().map(pr).collect(),
            h: self.h.iter().map(pr).collect(),
            hmat: self.hmat.row_iter().map(|r| r.iter().map(pr).collect()).collect(),
            constant: self
                .is_constant()
                .then(|| [pr(&self.constants.0), pr(&self.constants.1)]),
        };
        serde_json::to_string_pretty(&doc).expect("barycentric model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BaryJson = serde_json::from_str(text).map_err(|e| LqoError::Parse {
            context: format!("barycentric JSON line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if doc.xi.is_empty() {
            let [c1, c2] = doc.constant.unwrap_or([[0.0; 2]; 2]);
            return Ok(Self::constant(un(&c1), un(&c2)));
        }
        let n = doc.hmat.len();
        if doc.hmat.iter().any(|r| r.len() != n) {
            return Err(LqoError::Parse {
                context: "Hmat".into(),
                message: "ragged matrix rows".into(),
            });
        }
        Self::new(
            doc.xi.iter().map(un).collect(),
            CVec::from_iterator(doc.w.len(), doc.w.iter().map(un)),
            CVec::from_iterator(doc.h.len(), doc.h.iter().map(un)),
            CMat::from_fn(n, n, |i, j| un(&doc.hmat[i][j])),
        )
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
