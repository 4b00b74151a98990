//! Frequency-domain sample sets: `H1` on a point set and `H2` on the full
//! rectangular grid over the same points.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LqoError, Result};
use crate::linalg::{CMat, CVec};
use crate::model::LqoStateSpace;

/// Points closer than `DISTINCT_TOL * (1 + max|s|)` are duplicates.
pub const DISTINCT_TOL: f64 = 1e-13;

/// Relative tolerance used when checking conjugate symmetry of loaded values.
pub const CONJ_VALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Complex64>,
    h1: CVec,
    h2: CMat,
    pairing: Option<Vec<usize>>,
}

fn scale_of(points: &[Complex64]) -> f64 {
    1.0 + points.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

fn check_distinct(points: &[Complex64]) -> Result<()> {
    let tol = DISTINCT_TOL * scale_of(points);
    for i in 0..points.len() {
        for j in 0..i {
            if (points[i] - points[j]).norm() <= tol {
                return Err(LqoError::Validation(format!(
                    "sampling points {j} and {i} coincide ({})",
                    points[i]
                )));
            }
        }
    }
    Ok(())
}

impl SampleSet {
    /// Validating constructor. `pairing`, when given, must map each index to
    /// the index of its complex conjugate.
    pub fn new(points: Vec<Complex64>, h1: CVec, h2: CMat, pairing: Option<Vec<usize>>) -> Result<Self> {
        let ns = points.len();
        if h1.len() != ns {
            return Err(LqoError::Validation(format!("h1 has {} entries for {ns} points", h1.len())));
        }
        if h2.nrows() != ns || h2.ncols() != ns {
            return Err(LqoError::Validation(format!(
                "h2 grid is {}x{}, expected {ns}x{ns}",
                h2.nrows(),
                h2.ncols()
            )));
        }
        check_distinct(&points)?;
        if let Some(p) = &pairing {
            check_pairing(&points, &h1, &h2, p)?;
        }
        Ok(Self {
            points,
            h1,
            h2,
            pairing,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
    pub fn h1(&self) -> &CVec {
        &self.h1
    }
    pub fn h2(&self) -> &CMat {
        &self.h2
    }
    pub fn pairing(&self) -> Option<&[usize]> {
        self.pairing.as_deref()
    }
    pub fn is_conjugate_closed(&self) -> bool {
        self.pairing.is_some()
    }

    /// `max |H1(s)|` over the sampling points.
    pub fn m1(&self) -> f64 {
        self.h1.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H2(s, z)|` over the grid.
    pub fn m2(&self) -> f64 {
        self.h2.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Same data with every `H2` value zeroed; used for linear-only comparisons.
    pub fn without_quadratic(&self) -> Self {
        Self {
            h2: CMat::zeros(self.len(), self.len()),
            ..self.clone()
        }
    }

    /// Reorder the points by `perm` (new index `k` takes old index `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let ns = self.len();
        let mut seen = vec![false; ns];
        if perm.len() != ns || perm.iter().any(|&p| p >= ns || std::mem::replace(&mut seen[p], true)) {
            return Err(LqoError::Argument("not a permutation".into()));
        }
        let points = perm.iter().map(|&p| self.points[p]).collect();
        let h1 = CVec::from_fn(ns, |k, _| self.h1[perm[k]]);
        let h2 = CMat::from_fn(ns, ns, |i, j| self.h2[(perm[i], perm[j])]);
        let pairing = self.pairing.as_ref().map(|pair| {
            let mut inv = vec![0; ns];
            for (k, &p) in perm.iter().enumerate() {
                inv[p] = k;
            }
            perm.iter().map(|&p| inv[pair[p]]).collect()
        });
        Self::new(points, h1, h2, pairing)
    }
}

fn check_pairing(points: &[Complex64], h1: &CVec, h2: &CMat, pairing: &[usize]) -> Result<()> {
    let ns = points.len();
    if pairing.len() != ns {
        return Err(LqoError::Validation(format!("pairing has {} entries for {ns} points", pairing.len())));
    }
    let ptol = DISTINCT_TOL * scale_of(points) * 10.0;
    let h1tol = CONJ_VALUE_TOL * h1.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let h2tol = CONJ_VALUE_TOL * h2.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (i, &j) in pairing.iter().enumerate() {
        if j >= ns || pairing[j] != i {
            return Err(LqoError::Validation(format!("pairing is not an involution at index {i}")));
        }
        if (points[j] - points[i].conj()).norm() > ptol {
            return Err(LqoError::Validation(format!("point {j} is not the conjugate of point {i}")));
        }
        if (h1[j] - h1[i].conj()).norm() > h1tol {
            return Err(LqoError::Validation(format!("h1[{j}] is not the conjugate of h1[{i}]")));
        }
        for (k, &kc) in pairing.iter().enumerate() {
            if (h2[(j, kc)] - h2[(i, k)].conj()).norm() > h2tol {
                return Err(LqoError::Validation(format!(
                    "h2[{j}][{kc}] is not the conjugate of h2[{i}][{k}]"
                )));
            }
        }
    }
    Ok(())
}

/// `m` points `i * 10^e`, `e` equispaced on `[lo_exp, hi_exp]`.
pub fn log_space_axis(lo_exp: f64, hi_exp: f64, m: usize) -> Result<Vec<Complex64>> {
    if m < 2 {
        return Err(LqoError::Argument(format!("need at least 2 points, got {m}")));
    }
    if !(lo_exp < hi_exp) {
        return Err(LqoError::Argument(format!("empty exponent range [{lo_exp}, {hi_exp}]")));
    }
    let step = (hi_exp - lo_exp) / (m - 1) as f64;
    Ok((0..m)
        .map(|k| {
            let e = if k == m - 1 { hi_exp } else { lo_exp + step * k as f64 };
            Complex64::new(0.0, 10f64.powf(e))
        })
        .collect())
}

/// Points closed under conjugation, with the conjugate-index involution.
///
/// Each input point is followed by its conjugate unless it is real or the
/// conjugate already appeared.
pub fn conjugate_close(points: &[Complex64]) -> (Vec<Complex64>, Vec<usize>) {
    let tol = DISTINCT_TOL * scale_of(points);
    let mut out: Vec<Complex64> = Vec::with_capacity(2 * points.len());
    let find = |out: &[Complex64], p: Complex64| out.iter().position(|q| (q - p).norm() <= tol);
    for &p in points {
        if find(&out, p).is_some() {
            continue;
        }
        if p.im.abs() <= tol {
            out.push(Complex64::new(p.re, 0.0));
        } else {
            out.push(p);
            out.push(p.conj());
        }
    }
    let pairing = (0..out.len())
        .map(|i| find(&out, out[i].conj()).expect("conjugate present"))
        .collect();
    (out, pairing)
}

/// Find a conjugate pairing for the points, if one exists.
pub fn detect_pairing(points: &[Complex64]) -> Option<Vec<usize>> {
    let tol = DISTINCT_TOL * scale_of(points) * 10.0;
    points
        .iter()
        .map(|p| points.iter().position(|q| (q - p.conj()).norm() <= tol))
        .collect()
}

/// Sample `H1` at each point and `H2` on the full grid.
///
/// One resolvent solve per point; for a real model with a conjugate pairing
/// the solve is done once per pair and conjugated, so the resulting data is
/// exactly conjugate-symmetric.
pub fn sample_lqo(model: &LqoStateSpace, points: &[Complex64], pairing: Option<Vec<usize>>) -> Result<SampleSet> {
    let ns = points.len();
    let n = model.dim();
    let mut u = CMat::zeros(n, ns);
    let mut done = vec![false; ns];
    for i in 0..ns {
        if done[i] {
            continue;
        }
        let ui = model.resolvent(points[i])?;
        u.set_column(i, &ui);
        done[i] = true;
        if let (true, Some(p)) = (model.is_real(), pairing.as_ref()) {
            let j = p[i];
            if !done[j] {
                u.set_column(j, &ui.map(|v| v.conj()));
                done[j] = true;
            }
        }
    }
    let h1 = (model.c().transpose() * &u).transpose();
    let h2 = u.transpose() * model.m() * &u;
    SampleSet::new(points.to_vec(), h1, h2, pairing)
}

/// Per-point sampling without resolvent reuse.
pub fn sample_lqo_pointwise(model: &LqoStateSpace, points: &[Complex64]) -> Result<(CVec, CMat)> {
    let ns = points.len();
    let mut h1 = CVec::zeros(ns);
    let mut h2 = CMat::zeros(ns, ns);
    for i in 0..ns {
        h1[i] = model.eval_h1(points[i])?;
        for j in 0..ns {
            h2[(i, j)] = model.eval_h2(points[i], points[j])?;
        }
    }
    Ok((h1, h2))
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Serialize, Deserialize)]
struct SampleSetJson {
    points: Vec<[f64; 2]>,
    h1: Vec<[f64; 2]>,
    h2: Vec<Vec<[f64; 2]>>,
    conjugate_closed: bool,
    #[serde(default)]
    pairing: Vec<usize>,
}

fn pair(v: &Complex64) -> [f64; 2] {
    [v.re, v.im]
}

fn unpair(v: &[f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl SampleSet {
    pub fn to_json(&self) -> String {
        let doc = SampleSetJson {
            points: self.points.iter().map(pair).collect(),
            h1: self.h1.iter().map(pair).collect(),
            h2: self.h2.row_iter().map(|r| r.iter().map(pair).collect()).collect(),
            conjugate_closed: self.pairing.is_some(),
            pairing: self.pairing.clone().unwrap_or_default(),
        };
        serde_json::to_string(&doc).expect("sample set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SampleSetJson = serde_json::from_str(text).map_err(|e| LqoError::Parse {
            context: format!("sample set JSON line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let ns = doc.points.len();
        if doc.h2.len() != ns || doc.h2.iter().any(|r| r.len() != ns) {
            return Err(LqoError::Validation(format!("h2 must be a {ns}x{ns} grid")));
        }
        let points = doc.points.iter().map(unpair).collect();
        let h1 = CVec::from_iterator(doc.h1.len(), doc.h1.iter().map(unpair));
        let h2 = CMat::from_fn(ns, ns, |i, j| unpair(&doc.h2[i][j]));
        let pairing = match (doc.conjugate_closed, doc.pairing.is_empty()) {
            (true, _) => Some(doc.pairing),
            (false, true) => None,
            (false, false) => {
                return Err(LqoError::Validation(
                    "pairing given but conjugate_closed is false".into(),
                ))
            }
        };
        Self::new(points, h1, h2, pairing)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Write `(i, Re s, Im s, Re h1, Im h1)` and `(i, j, Re h2, Im h2)` CSV files.
    pub fn export_csv(&self, h1_path: impl AsRef<Path>, h2_path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(h1_path)?;
        w.write_record(["i", "s_re", "s_im", "h1_re", "h1_im"])?;
        for (i, (s, h)) in self.points.iter().zip(self.h1.iter()).enumerate() {
            w.write_record(&[
                i.to_string(),
                fmt17(s.re),
                fmt17(s.im),
                fmt17(h.re),
                fmt17(h.im),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(h2_path)?;
        w.write_record(["i", "j", "h2_re", "h2_im"])?;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let h = self.h2[(i, j)];
                w.write_record(&[i.to_string(), j.to_string(), fmt17(h.re), fmt17(h.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{c, random_stable_model, real_scalar_model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_axis_examples() {
        let p = log_space_axis(-1.0, 2.0, 60).unwrap();
        assert_eq!(p.len(), 60);
        assert!((p[0] - c(0.0, 0.1)).norm() < 1e-15);
        assert_eq!(p[59], c(0.0, 100.0));
        assert!(p.windows(2).all(|w| w[1].norm() > w[0].norm()));
        assert!(log_space_axis(0.0, 0.0, 2).is_err());
        assert!(log_space_axis(0.0, 1.0, 1).is_err());
        assert_eq!(log_space_axis(0.0, 1.0, 2).unwrap(), vec![c(0.0, 1.0), c(0.0, 10.0)]);
        let p = log_space_axis(-1.0, 1.0, 3).unwrap();
        assert!((p[0] - c(0., 0.1)).norm() < 1e-16 && p[1] == c(0., 1.) && p[2] == c(0., 10.));
    }

    #[test]
    fn conjugate_closure_examples() {
        let (p, pair) = conjugate_close(&[c(0., 1.), c(0., 2.)]);
        assert_eq!(p, vec![c(0., 1.), c(0., -1.), c(0., 2.), c(0., -2.)]);
        assert_eq!(pair, vec![1, 0, 3, 2]);
        let (p, pair) = conjugate_close(&[c(1.0, 0.0)]);
        assert_eq!((p, pair), (vec![c(1., 0.)], vec![0]));
        let (p, _) = conjugate_close(&log_space_axis(-1.0, 2.0, 60).unwrap());
        assert_eq!(p.len(), 120);
    }

    #[test]
    fn conjugate_closure_is_idempotent_involution() {
        let pts = [c(0.5, 1.0), c(2.0, 0.0), c(-1.0, -3.0), c(0.5, -1.0)];
        let (once, pair) = conjugate_close(&pts);
        for (i, &j) in pair.iter().enumerate() {
            assert_eq!(pair[j], i);
            assert_eq!(once[j], once[i].conj());
        }
        let (twice, _) = conjugate_close(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn scalar_sampling() {
        let m = real_scalar_model(1.0, 1.0);
        let s = sample_lqo(&m, &[c(0., 0.), c(1., 0.)], None).unwrap();
        let h1: Vec<f64> = s.h1().iter().map(|v| v.re).collect();
        assert_eq!(h1, vec![1.0, 0.5]);
        let expect = [[1.0, 0.5], [0.5, 0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.h2()[(i, j)] - c(expect[i][j], 0.)).norm() < 1e-16);
            }
        }
    }

    #[test]
    fn memoized_sampling_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = random_stable_model(&mut rng, 6, false);
        let pts: Vec<Complex64> = (0..20).map(|k| c(0.01 * k as f64, 0.3 * k as f64 - 2.0)).collect();
        let s = sample_lqo(&model, &pts, None).unwrap();
        let (h1, h2) = sample_lqo_pointwise(&model, &pts).unwrap();
        let scale1 = h1.camax();
        let scale2 = h2.camax();
        assert!((s.h1() - h1).camax() <= 1e-12 * scale1);
        assert!((s.h2() - h2).camax() <= 1e-12 * scale2);
    }

    #[test]
    fn conjugate_closed_real_model_passes_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = random_stable_model(&mut rng, 4, true);
        let (pts, pair) = conjugate_close(&log_space_axis(-1.0, 1.0, 5).unwrap());
        let s = sample_lqo(&model, &pts, Some(pair)).unwrap();
        assert!(s.is_conjugate_closed());
        assert_eq!(detect_pairing(s.points()).as_deref(), s.pairing());
    }

    #[test]
    fn permutation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = random_stable_model(&mut rng, 3, true);
        let pts = vec![c(0., 1.), c(0., 2.), c(0., 3.), c(0.5, 0.)];
        let s = sample_lqo(&model, &pts, None).unwrap();
        let perm = [2, 0, 3, 1];
        let shuffled: Vec<Complex64> = perm.iter().map(|&p| pts[p]).collect();
        let resampled = sample_lqo(&model, &shuffled, None).unwrap();
        let permuted = s.permuted(&perm).unwrap();
        assert!((resampled.h2() - permuted.h2()).camax() < 1e-15);
        assert!((resampled.h1() - permuted.h1()).camax() < 1e-15);
    }

    #[test]
    fn rejects_duplicates_and_bad_shapes() {
        let p = vec![c(0., 1.), c(0., 1.)];
        assert!(matches!(
            SampleSet::new(p, CVec::zeros(2), CMat::zeros(2, 2), None),
            Err(LqoError::Validation(_))
        ));
        let p = vec![c(0., 1.), c(0., 2.)];
        assert!(SampleSet::new(p.clone(), CVec::zeros(2), CMat::zeros(2, 3), None).is_err());
        assert!(SampleSet::new(p, CVec::zeros(2), CMat::zeros(2, 2), Some(vec![0, 1])).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = real_scalar_model(1.0, 1.0);
        let s = sample_lqo(&m, &[c(0., 0.), c(1., 0.)], None).unwrap();
        assert_eq!(SampleSet::from_json(&s.to_json()).unwrap(), s);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let model = random_stable_model(&mut rng, 8, true);
        let (pts, pair) = conjugate_close(&log_space_axis(-1.0, 2.0, 60).unwrap());
        let big = sample_lqo(&model, &pts, Some(pair)).unwrap();
        let back = SampleSet::from_json(&big.to_json()).unwrap();
        assert_eq!((back.h2() - big.h2()).camax(), 0.0);
        assert_eq!(back, big);
    }

    #[test]
    fn json_duplicate_points_fail_validation() {
        let text = r#"{"points": [[0,1],[0,1]], "h1": [[1,0],[1,0]], "h2": [[[0,0],[0,0]],[[0,0],[0,0]]], "conjugate_closed": false, "pairing": []}"#;
        assert!(matches!(SampleSet::from_json(text), Err(LqoError::Validation(_))));
        match SampleSet::from_json("{\"points\": [[0,1]],\n \"h1\": 3}") {
            Err(LqoError::Parse { context, .. }) => assert!(context.contains("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_export_layout() {
        let m = real_scalar_model(1.0, 1.0);
        let s = sample_lqo(&m, &[c(0., 0.), c(1., 0.)], None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("h1.csv"), dir.path().join("h2.csv"));
        s.export_csv(&a, &b).unwrap();
        let h1 = std::fs::read_to_string(a).unwrap();
        assert_eq!(h1.lines().count(), 3);
        assert!(h1.starts_with("i,s_re,s_im,h1_re,h1_im"));
        assert_eq!(std::fs::read_to_string(b).unwrap().lines().count(), 5);
    }

    #[test]
    fn data_constants() {
        let m = real_scalar_model(1.0, 1.0);
        let s = sample_lqo(&m, &[c(0., 0.), c(1., 0.)], None).unwrap();
        assert_eq!(s.m1(), 1.0);
        assert_eq!(s.m2(), 1.0);
    }
}
