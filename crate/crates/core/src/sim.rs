//! Fixed-step time-domain simulation of LQO systems.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{LqoError, Result};
use crate::linalg::{CVec, ZERO};
use crate::model::{quad_form, LqoStateSpace};
use crate::samples::fmt17;

/// Scalar input signal `u(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    /// `amp * cos(omega t)`
    Cos { amp: f64, omega: f64 },
    /// `amp * sin(omega t)`
    Sin { amp: f64, omega: f64 },
    /// Uniform samples starting at `t = 0`, linearly interpolated and held
    /// constant past the last sample.
    Sampled { dt: f64, values: Vec<f64> },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Cos { amp, omega } => amp * (omega * t).cos(),
            Signal::Sin { amp, omega } => amp * (omega * t).sin(),
            Signal::Sampled { dt, values } => {
                if values.is_empty() {
                    return 0.0;
                }
                let x = (t / dt).max(0.0);
                let k = x.floor() as usize;
                if k + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let f = x - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        }
    }

    /// Angular frequency of a harmonic signal.
    pub fn omega(&self) -> Option<f64> {
        match self {
            Signal::Cos { omega, .. } | Signal::Sin { omega, .. } => Some(*omega),
            Signal::Sampled { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Signal::Cos { amp, omega } | Signal::Sin { amp, omega } => amp.is_finite() && omega.is_finite(),
            Signal::Sampled { dt, values } => *dt > 0.0 && values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(LqoError::Argument(format!("invalid signal {self:?}")))
        }
    }
}

/// Output samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub t: Vec<f64>,
    /// Full output `c^T x + x^T M x`.
    pub y: Vec<Complex64>,
    /// Linear part `c^T x`.
    pub y1: Vec<Complex64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.y.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.y.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Columns `t, y_re, y_im, y1_re, y1_im`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "y_re", "y_im", "y1_re", "y1_im"])?;
        for k in 0..self.len() {
            w.write_record([
                fmt17(self.t[k]),
                fmt17(self.y[k].re),
                fmt17(self.y[k].im),
                fmt17(self.y1[k].re),
                fmt17(self.y1[k].im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path)?;
        let (mut t, mut y, mut y1) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| LqoError::Parse {
                    context: format!("{} row {}", path.display(), line + 1),
                    message: format!("column {i} is not a number"),
                })
            };
            t.push(num(0)?);
            y.push(Complex64::new(num(1)?, num(2)?));
            y1.push(Complex64::new(num(3)?, num(4)?));
        }
        let dt = if t.len() > 1 { t[1] - t[0] } else { 0.0 };
        Ok(Self { dt, t, y, y1 })
    }
}

/// Integrate `x' = A x + b u(t)` with classical RK4 at step `dt` from `t = 0`
/// to `t_end` (rounded to a whole number of steps) and record the output at
/// every grid point.
pub fn simulate_lqo(
    model: &LqoStateSpace,
    signal: &Signal,
    t_end: f64,
    dt: f64,
    x0: Option<&CVec>,
) -> Result<Trace> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LqoError::Argument(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(LqoError::Argument(format!("end time must be nonnegative, got {t_end}")));
    }
    signal.validate()?;
    let n = model.dim();
    let mut x = match x0 {
        Some(x0) if x0.len() != n => {
            return Err(LqoError::Dimension(format!("initial state has length {}, expected {n}", x0.len())))
        }
        Some(x0) => x0.clone(),
        None => CVec::zeros(n),
    };
    let steps = (t_end / dt).round() as usize;
    let (a, b, c, m) = (model.a(), model.b(), model.c(), model.m());
    let f = |x: &CVec, t: f64| -> CVec { a * x + b * Complex64::from(signal.eval(t)) };

    let mut trace = Trace {
        dt,
        t: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        y1: Vec::with_capacity(steps + 1),
    };
    let half = Complex64::from(dt / 2.0);
    let full = Complex64::from(dt);
    let sixth = Complex64::from(dt / 6.0);
    for k in 0..=steps {
        let t = k as f64 * dt;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LqoError::Divergence(t));
        }
        let y1 = if c.iter().all(|v| *v == ZERO) { ZERO } else { c.dot(&x) };
        trace.t.push(t);
        trace.y1.push(y1);
        trace.y.push(y1 + quad_form(&x, m, &x));
        if k == steps {
            break;
        }
        let k1 = f(&x, t);
        let k2 = f(&(&x + &k1 * half), t + dt / 2.0);
        let k3 = f(&(&x + &k2 * half), t + dt / 2.0);
        let k4 = f(&(&x + &k3 * full), t + dt);
        x += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * sixth;
    }
    Ok(trace)
}

/// Pointwise `|y - y_hat|` and its maximum.
pub fn output_error(full: &Trace, reduced: &Trace) -> Result<(f64, Vec<f64>)> {
    if full.len() != reduced.len() || (full.dt - reduced.dt).abs() > 1e-12 * full.dt.abs().max(1e-300) {
        return Err(LqoError::Argument(format!(
            "time grids differ: {} points at dt = {} vs {} points at dt = {}",
            full.len(),
            full.dt,
            reduced.len(),
            reduced.dt
        )));
    }
    let err: Vec<f64> = full.y.iter().zip(&reduced.y).map(|(a, b)| (a - b).norm()).collect();
    let max = err.iter().cloned().fold(0.0, f64::max);
    Ok((max, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{random_stable_lqo, SyntheticOptions};
    use crate::testutil::real_scalar_model;

    const STEP: Signal = Signal::Cos { amp: 1.0, omega: 0.0 };

    fn at(trace: &Trace, t: f64) -> Complex64 {
        trace.y[(t / trace.dt).round() as usize]
    }

    #[test]
    fn linear_step_response() {
        let tr = simulate_lqo(&real_scalar_model(1.0, 0.0), &STEP, 1.0, 1e-3, None).unwrap();
        assert!((at(&tr, 1.0).re - (1.0 - (-1.0f64).exp())).abs() <= 1e-8);
        assert_eq!(tr.y, tr.y1);
    }

    #[test]
    fn quadratic_step_response() {
        let tr = simulate_lqo(&real_scalar_model(0.0, 1.0), &STEP, 1.0, 1e-3, None).unwrap();
        let x = 1.0 - (-1.0f64).exp();
        assert!((at(&tr, 1.0).re - x * x).abs() <= 1e-8);
        assert!(tr.y1.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let model = random_stable_lqo(4, 3, SyntheticOptions::default()).unwrap();
        let u = Signal::Cos { amp: 1.0, omega: 2.0 };
        let t_end = 2.0;
        let y = |dt: f64| at(&simulate_lqo(&model, &u, t_end, dt, None).unwrap(), t_end);
        let (y1, y2, y3) = (y(0.04), y(0.02), y(0.01));
        let ratio = (y1 - y2).norm() / (y2 - y3).norm();
        assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn symmetrized_quadratic_gives_same_output() {
        let model = random_stable_lqo(3, 9, SyntheticOptions::default()).unwrap();
        let mut m = model.m().clone();
        m[(0, 1)] += Complex64::from(0.3);
        m[(1, 0)] -= Complex64::from(0.3);
        let skewed = LqoStateSpace::new(model.a().clone(), model.b().clone(), model.c().clone(), m).unwrap();
        let u = Signal::Sin { amp: 1.0, omega: 1.0 };
        let a = simulate_lqo(&skewed, &u, 3.0, 1e-2, None).unwrap();
        let b = simulate_lqo(&skewed.symmetrized(), &u, 3.0, 1e-2, None).unwrap();
        let (e, _) = output_error(&a, &b).unwrap();
        assert!(e <= 1e-12 * a.max_abs().max(1.0));
        assert_eq!(a.max_imag(), 0.0);
    }

    #[test]
    fn output_error_cases() {
        let a = simulate_lqo(&real_scalar_model(1.0, 0.5), &STEP, 1.0, 0.1, None).unwrap();
        assert_eq!(output_error(&a, &a).unwrap().0, 0.0);
        let mut b = a.clone();
        b.y.iter_mut().for_each(|v| *v += 1.0);
        assert!((output_error(&a, &b).unwrap().0 - 1.0).abs() < 1e-12);
        let short = simulate_lqo(&real_scalar_model(1.0, 0.5), &STEP, 0.5, 0.1, None).unwrap();
        assert!(output_error(&a, &short).is_err());
    }

    #[test]
    fn sampled_signal_interpolates() {
        let s = Signal::Sampled { dt: 0.5, values: vec![0.0, 1.0, 3.0] };
        assert_eq!(s.eval(0.25), 0.5);
        assert_eq!(s.eval(0.75), 2.0);
        assert_eq!(s.eval(10.0), 3.0);
    }

    #[test]
    fn divergence_and_arguments() {
        let unstable = LqoStateSpace::new(
            crate::linalg::CMat::from_element(1, 1, Complex64::from(1e3)),
            CVec::from_element(1, Complex64::from(1.0)),
            CVec::from_element(1, Complex64::from(1.0)),
            crate::linalg::CMat::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(
            simulate_lqo(&unstable, &STEP, 100.0, 0.1, None),
            Err(LqoError::Divergence(_))
        ));
        assert!(simulate_lqo(&unstable, &STEP, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let tr = simulate_lqo(&real_scalar_model(1.0, 0.5), &STEP, 1.0, 0.1, None).unwrap();
        let p = dir.path().join("t.csv");
        tr.save_csv(&p).unwrap();
        let back = Trace::load_csv(&p).unwrap();
        assert_eq!(back.y, tr.y);
        assert_eq!(back.t, tr.t);
    }
}
