//! Greedy AAA-LQO driver.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aaa::symmetrize_weights;
use crate::barycentric::BarycentricLqo;
use crate::error::{LqoError, Result};
use crate::linalg::{CVec, ONE};
use crate::loewner::{barycentric_from_partition, solve_weights, LoewnerBlocks, Partition, RhoMode};
use crate::samples::{fmt17, SampleSet};

/// Driver settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AaaLqoConfig {
    /// Maximum order.
    pub nmax: usize,
    /// Relative stopping tolerance.
    pub eps: f64,
    /// Promote conjugate pairs together and symmetrize the weights.
    pub pair_mode: bool,
    #[serde(with = "rho_mode_serde")]
    pub rho_mode: RhoMode,
    /// Override for the greedy comparison constant; the number of samples by default.
    pub greedy_n: Option<f64>,
    /// Stage-2 solves repeated after the first, each relinearized at the last weights.
    pub extra_stage2_passes: usize,
}

impl Default for AaaLqoConfig {
    fn default() -> Self {
        Self {
            nmax: 40,
            eps: 1e-6,
            pair_mode: false,
            rho_mode: RhoMode::SqrtBoth,
            greedy_n: None,
            extra_stage2_passes: 0,
        }
    }
}

impl AaaLqoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nmax < 1 {
            return Err(LqoError::Argument("nmax must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(LqoError::Argument(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if let Some(n) = self.greedy_n {
            if !(n > 0.0 && n.is_finite()) {
                return Err(LqoError::Argument(format!("greedy N must be positive, got {n}")));
            }
        }
        Ok(())
    }
}

mod rho_mode_serde {
    use super::RhoMode;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &RhoMode, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match m {
            RhoMode::SqrtBoth => "sqrt_both",
            RhoMode::MatrixOnly => "matrix_only",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RhoMode, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    /// Sample indices promoted in this iteration.
    pub added: Vec<usize>,
    pub points: Vec<Complex64>,
    pub eps1: f64,
    pub eps2: f64,
    pub rel1: f64,
    pub rel2: f64,
    /// Weighted relaxed objective at the chosen weights; absent for `n = 0`.
    pub relaxed_obj: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AaaLqoReport {
    pub records: Vec<IterationRecord>,
    pub m1: f64,
    pub m2: f64,
    pub converged: bool,
    /// Message of the step that stopped the run early, if any.
    pub failure: Option<String>,
}

impl AaaLqoReport {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("report always holds the initial record")
    }

    /// Columns `n, xi_re, xi_im, eps1_rel, eps2_rel, relaxed_obj`, one row per
    /// promoted point. The initial row has empty point and objective fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,xi_re,xi_im,eps1_rel,eps2_rel,relaxed_obj\n");
        for r in &self.records {
            let obj = r.relaxed_obj.map(fmt17).unwrap_or_default();
            if r.points.is_empty() {
                out += &format!("{},,,{},{},{}\n", r.n, fmt17(r.rel1), fmt17(r.rel2), obj);
            }
            for p in &r.points {
                out += &format!(
                    "{},{},{},{},{},{}\n",
                    r.n,
                    fmt17(p.re),
                    fmt17(p.im),
                    fmt17(r.rel1),
                    fmt17(r.rel2),
                    obj
                );
            }
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Pointwise errors of the current model on the sample grid.
#[derive(Debug, Clone)]
pub struct ErrorSurfaces {
    /// `|H1(s_i) - r1(s_i)|`
    pub e1: Vec<f64>,
    /// `|H2(s_i, s_j) - r2(s_i, s_j)|`
    pub e2: DMatrix<f64>,
    pub eps1: f64,
    pub argmax1: usize,
    pub eps2: f64,
    pub argmax2: (usize, usize),
}

fn abs_or_inf(v: Complex64) -> f64 {
    let a = v.norm();
    if a.is_nan() {
        f64::INFINITY
    } else {
        a
    }
}

/// Errors of `model` against `samples`; spurious poles give infinite error.
pub fn error_surfaces(samples: &SampleSet, model: &BarycentricLqo) -> ErrorSurfaces {
    let pts = samples.points();
    let ns = pts.len();
    let (r1, _) = model.eval_r1_grid_lenient(pts);
    let (r2, _) = model.eval_r2_grid_lenient(pts);
    let e1: Vec<f64> = (0..ns).map(|i| abs_or_inf(samples.h1()[i] - r1[i])).collect();
    let e2 = DMatrix::from_fn(ns, ns, |i, j| abs_or_inf(samples.h2()[(i, j)] - r2[(i, j)]));
    let mut argmax1 = 0;
    for i in 1..ns {
        if e1[i] > e1[argmax1] {
            argmax1 = i;
        }
    }
    // row-major flattened order for ties
    let mut argmax2 = (0, 0);
    for i in 0..ns {
        for j in 0..ns {
            if e2[(i, j)] > e2[argmax2] {
                argmax2 = (i, j);
            }
        }
    }
    ErrorSurfaces {
        eps1: e1[argmax1],
        eps2: e2[argmax2],
        e1,
        e2,
        argmax1,
        argmax2,
    }
}

/// Iteration state of the driver.
#[derive(Debug, Clone)]
pub struct AaaLqoState<'a> {
    samples: &'a SampleSet,
    config: AaaLqoConfig,
    partition: Partition,
    model: BarycentricLqo,
    errors: ErrorSurfaces,
    report: AaaLqoReport,
}

impl<'a> AaaLqoState<'a> {
    /// Constant model at the sample means, empty support set.
    pub fn initialize(samples: &'a SampleSet, config: AaaLqoConfig) -> Result<Self> {
        config.validate()?;
        let ns = samples.len();
        if ns < 2 {
            return Err(LqoError::Argument(format!("need at least 2 samples, got {ns}")));
        }
        if config.pair_mode && !samples.is_conjugate_closed() {
            return Err(LqoError::Argument("pair mode requires a conjugate-closed sample set".into()));
        }
        let mean1 = samples.h1().sum() / ns as f64;
        let mean2 = samples.h2().sum() / (ns * ns) as f64;
        let model = BarycentricLqo::constant(mean1, mean2);
        let errors = error_surfaces(samples, &model);
        let mut state = Self {
            samples,
            partition: Partition::new(ns, Vec::new())?,
            model,
            report: AaaLqoReport {
                records: Vec::new(),
                m1: samples.m1(),
                m2: samples.m2(),
                converged: false,
                failure: None,
            },
            errors,
            config,
        };
        state.record(Vec::new(), None);
        Ok(state)
    }

    pub fn model(&self) -> &BarycentricLqo {
        &self.model
    }
    pub fn partition(&self) -> &Partition {
        &self.partition
    }
    pub fn errors(&self) -> &ErrorSurfaces {
        &self.errors
    }
    pub fn report(&self) -> &AaaLqoReport {
        &self.report
    }
    pub fn order(&self) -> usize {
        self.partition.n()
    }

    /// `(eps1 / M1, eps2 / M2)`; a ratio whose constant is zero is reported as 0.
    pub fn relative_errors(&self) -> (f64, f64) {
        let ratio = |e: f64, m: f64| if m > 0.0 { e / m } else { 0.0 };
        (
            ratio(self.errors.eps1, self.report.m1),
            ratio(self.errors.eps2, self.report.m2),
        )
    }

    pub fn tolerance_met(&self) -> bool {
        let (r1, r2) = self.relative_errors();
        r1.max(r2) <= self.config.eps
    }

    fn record(&mut self, added: Vec<usize>, relaxed_obj: Option<f64>) {
        let (rel1, rel2) = self.relative_errors();
        let points = added.iter().map(|&k| self.samples.points()[k]).collect();
        self.report.records.push(IterationRecord {
            n: self.partition.n(),
            added,
            points,
            eps1: self.errors.eps1,
            eps2: self.errors.eps2,
            rel1,
            rel2,
            relaxed_obj,
        });
    }

    /// Sample indices to promote next.
    pub fn greedy_select(&self) -> Result<Vec<usize>> {
        let ls = self.partition.ls();
        if ls.is_empty() {
            return Err(LqoError::Argument("no LS points left to promote".into()));
        }
        let ns = self.samples.len();
        let nn = self.config.greedy_n.unwrap_or(ns as f64);
        let e = &self.errors;
        let use_h1 = self.report.m1 > 0.0;
        let in_support = |k: usize| self.partition.support().contains(&k);

        let pick = if (use_h1 && e.eps1 / nn > e.eps2 / (nn * nn)) || e.eps2 == 0.0 {
            // lowest index among maximal LS errors
            let mut best = ls[0];
            for &i in ls {
                if e.e1[i] > e.e1[best] {
                    best = i;
                }
            }
            best
        } else {
            let (s, z) = e.argmax2;
            match (in_support(s), in_support(z)) {
                (true, false) => z,
                (false, true) => s,
                (false, false) => {
                    if e.e1[z] > e.e1[s] {
                        z
                    } else {
                        s
                    }
                }
                (true, true) => {
                    return Err(LqoError::Validation(format!(
                        "H2 error maximum at interpolated pair ({s}, {z})"
                    )))
                }
            }
        };
        assert!(!in_support(pick), "greedy selection picked support index {pick}");
        let mut add = vec![pick];
        if self.config.pair_mode {
            let partner = self.samples.pairing().expect("checked at initialization")[pick];
            if partner != pick {
                assert!(!in_support(partner), "conjugate of {pick} already in support");
                add.push(partner);
            }
        }
        Ok(add)
    }

    /// Promote `add`, re-solve for the weights and refresh the errors. On
    /// failure the state is left unchanged.
    pub fn step_with(&mut self, add: &[usize]) -> Result<()> {
        let mut partition = self.partition.clone();
        for &k in add {
            partition.promote(k)?;
        }
        let (w, obj) = if partition.m() == 0 {
            (CVec::from_element(partition.n(), ONE), None)
        } else {
            let blocks = LoewnerBlocks::build(self.samples, &partition)?;
            let mut w = solve_weights(&blocks, self.config.rho_mode, self.config.extra_stage2_passes)?.weights;
            if self.config.pair_mode {
                let pairing = self.samples.pairing().expect("checked at initialization");
                w = symmetrize_weights(&w, partition.support(), pairing);
            }
            let obj = blocks.relaxed_objective(&w);
            (w, Some(obj))
        };
        if w.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LqoError::Degenerate("weight solve returned non-finite values".into()));
        }
        let model = barycentric_from_partition(self.samples, &partition, w)?;
        self.errors = error_surfaces(self.samples, &model);
        self.model = model;
        self.partition = partition;
        self.record(add.to_vec(), obj);
        log::debug!(
            "n = {}: rel errors {:.3e} {:.3e}",
            self.order(),
            self.report.last().rel1,
            self.report.last().rel2
        );
        Ok(())
    }

    /// Greedy selection followed by [`Self::step_with`].
    pub fn step(&mut self) -> Result<()> {
        let add = self.greedy_select()?;
        self.step_with(&add)
    }

    pub fn finish(mut self) -> (BarycentricLqo, AaaLqoReport) {
        self.report.converged = self.tolerance_met();
        (self.model, self.report)
    }
}

/// Run the greedy iteration until the relative errors drop to `eps` or the
/// order reaches `nmax`. A failing step ends the run without convergence; its
/// message is kept in the report.
pub fn run(samples: &SampleSet, config: &AaaLqoConfig) -> Result<(BarycentricLqo, AaaLqoReport)> {
    let mut state = AaaLqoState::initialize(samples, config.clone())?;
    while !state.tolerance_met() && state.order() < config.nmax && !state.partition.ls().is_empty() {
        let add = match state.greedy_select() {
            Ok(a) => a,
            Err(e) => {
                state.report.failure = Some(e.to_string());
                break;
            }
        };
        if state.order() + add.len() > config.nmax {
            break;
        }
        if let Err(e) = state.step_with(&add) {
            log::warn!("step at n = {} failed: {e}", state.order());
            state.report.failure = Some(e.to_string());
            break;
        }
    }
    Ok(state.finish())
}
