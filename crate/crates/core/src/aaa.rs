//! Classical AAA rational approximation of single-variable data.

use num_complex::Complex64;

use crate::barycentric::BarycentricLqo;
use crate::error::{LqoError, Result};
use crate::linalg::{lstsq, CMat, CVec, ONE, ZERO};

/// Result of [`aaa_fit`].
#[derive(Debug, Clone)]
pub struct AaaModel {
    pub xi: Vec<Complex64>,
    pub w: CVec,
    pub h: CVec,
    /// Sample indices of the support points, in selection order.
    pub support_idx: Vec<usize>,
    /// Max relative error after each iteration, starting with the constant model.
    pub history: Vec<f64>,
    /// Order of the model behind each `history` entry.
    pub history_order: Vec<usize>,
    pub converged: bool,
    /// Mean of the samples; the model value while no support point is chosen.
    pub constant: Complex64,
}

impl AaaModel {
    pub fn order(&self) -> usize {
        self.xi.len()
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        if self.xi.is_empty() {
            return Ok(self.constant);
        }
        if let Some(k) = self.xi.iter().position(|&x| x == s) {
            return Ok(self.h[k]);
        }
        let (mut num, mut den) = (ZERO, ONE);
        for k in 0..self.order() {
            let t = self.w[k] / (s - self.xi[k]);
            num += t * self.h[k];
            den += t;
        }
        let v = num / den;
        if den == ZERO || !v.re.is_finite() || !v.im.is_finite() {
            return Err(LqoError::SpuriousPole(s));
        }
        Ok(v)
    }

    /// As an LQO barycentric model with no quadratic part.
    pub fn to_barycentric(&self) -> Result<BarycentricLqo> {
        if self.xi.is_empty() {
            return Ok(BarycentricLqo::constant(self.constant, ZERO));
        }
        let n = self.order();
        BarycentricLqo::new(self.xi.clone(), self.w.clone(), self.h.clone(), CMat::zeros(n, n))
    }
}

/// Greedy AAA with the strictly proper denominator `1 + sum w_k/(s - xi_k)`.
///
/// Stops when the max error relative to `max |h|` is at most `tol` or the
/// order reaches `nmax`. With `pairing` (a conjugate-index involution) each
/// step promotes a point together with its conjugate and the weights are
/// made conjugate-symmetric.
pub fn aaa_fit(
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    nmax: usize,
    pairing: Option<&[usize]>,
) -> Result<AaaModel> {
    let ns = points.len();
    if ns < 2 {
        return Err(LqoError::Argument(format!("need at least 2 points, got {ns}")));
    }
    if values.len() != ns {
        return Err(LqoError::Dimension(format!("{} values for {ns} points", values.len())));
    }
    if !(tol > 0.0) {
        return Err(LqoError::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(p) = pairing {
        if p.len() != ns || p.iter().enumerate().any(|(i, &j)| j >= ns || p[j] != i) {
            return Err(LqoError::Argument("pairing is not an involution".into()));
        }
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mean = values.iter().sum::<Complex64>() / ns as f64;

    let mut model = AaaModel {
        xi: Vec::new(),
        w: CVec::zeros(0),
        h: CVec::zeros(0),
        support_idx: Vec::new(),
        history: Vec::new(),
        history_order: Vec::new(),
        converged: false,
        constant: mean,
    };
    let mut in_support = vec![false; ns];
    loop {
        let errors: Vec<f64> = (0..ns)
            .map(|i| match model.eval(points[i]) {
                Ok(v) if v.re.is_finite() && v.im.is_finite() => (v - values[i]).norm(),
                _ => f64::INFINITY,
            })
            .collect();
        let emax = errors.iter().cloned().fold(0.0, f64::max);
        let rel = if scale > 0.0 { emax / scale } else { emax };
        model.history.push(rel);
        model.history_order.push(model.order());
        if rel <= tol {
            model.converged = true;
            break;
        }
        // lowest index wins ties
        let pick = (0..ns)
            .filter(|&i| !in_support[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if errors[b] >= errors[i] => Some(b),
                _ => Some(i),
            });
        let Some(pick) = pick else { break };
        let mut add = vec![pick];
        if let Some(p) = pairing {
            if p[pick] != pick && !in_support[p[pick]] {
                add.push(p[pick]);
            }
        }
        if model.order() + add.len() > nmax {
            break;
        }
        for &k in &add {
            in_support[k] = true;
            model.support_idx.push(k);
        }
        let sup = &model.support_idx;
        let ls: Vec<usize> = (0..ns).filter(|&i| !in_support[i]).collect();
        let xi: Vec<Complex64> = sup.iter().map(|&k| points[k]).collect();
        let h: Vec<Complex64> = sup.iter().map(|&k| values[k]).collect();
        let w = if ls.is_empty() {
            // nothing left to fit; any nonzero weights interpolate
            CVec::from_element(sup.len(), ONE)
        } else {
            let l = CMat::from_fn(ls.len(), sup.len(), |i, k| {
                (values[ls[i]] - h[k]) / (points[ls[i]] - xi[k])
            });
            let rhs = CVec::from_fn(ls.len(), |i, _| -values[ls[i]]);
            if l.iter().all(|v| *v == ZERO) {
                CVec::from_element(sup.len(), ONE)
            } else {
                lstsq(&l, &rhs)?.x
            }
        };
        let w = match pairing {
            Some(p) => symmetrize_weights(&w, sup, p),
            None => w,
        };
        model.xi = xi;
        model.h = CVec::from_vec(h);
        model.w = w;
    }
    Ok(model)
}

/// `w_k <- (w_k + conj(w_k')) / 2` where `k'` holds the conjugate support point.
pub fn symmetrize_weights(w: &CVec, support_idx: &[usize], pairing: &[usize]) -> CVec {
    CVec::from_fn(w.len(), |k, _| {
        let partner = pairing[support_idx[k]];
        match support_idx.iter().position(|&s| s == partner) {
            Some(kp) => (w[k] + w[kp].conj()) * 0.5,
            None => w[k],
        }
    })
}
