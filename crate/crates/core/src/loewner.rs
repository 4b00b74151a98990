//! Loewner matrices of the relaxed least-squares problem for one partition of
//! the sampling points, and the two-stage weight solve.
//!
//! Index conventions (0-based), with `m = Ns - n` LS points and `n` support
//! points:
//!
//! * `L12`, `rhs_h12`: row `i * m + j` for support `i`, LS `j`.
//! * `L21`, `rhs_h21`: row `j * n + i` for LS `j`, support `i`.
//! * `L22`, `U`, `T`, `rhs_h22`: row `i * m + j` for LS `i, j`; `L22` column `k * n + l`.
//!
//! Every block is defined so that its residual is the negated linearized
//! error, e.g. `(L w + h)_i = -(n1(s_i) - h_i d1(s_i))`. Norms are unaffected
//! by the sign.

use std::path::Path;

use num_complex::Complex64;

use crate::barycentric::BarycentricLqo;
use crate::error::{LqoError, Result};
use crate::linalg::{lstsq, CMat, CVec, LstsqSolution, ONE, ZERO};
use crate::mtx::write_mtx;
use crate::samples::SampleSet;

/// Split of the sample indices into support (interpolated) and LS sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    support: Vec<usize>,
    ls: Vec<usize>,
}

impl Partition {
    /// Partition with the given support indices (in order); everything else is
    /// the LS set in increasing index order.
    pub fn new(ns: usize, support: Vec<usize>) -> Result<Self> {
        let mut in_support = vec![false; ns];
        for &k in &support {
            if k >= ns {
                return Err(LqoError::Argument(format!("support index {k} out of range 0..{ns}")));
            }
            if std::mem::replace(&mut in_support[k], true) {
                return Err(LqoError::Argument(format!("support index {k} repeated")));
            }
        }
        let ls = (0..ns).filter(|&k| !in_support[k]).collect();
        Ok(Self { support, ls })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
    pub fn ls(&self) -> &[usize] {
        &self.ls
    }
    pub fn n(&self) -> usize {
        self.support.len()
    }
    pub fn m(&self) -> usize {
        self.ls.len()
    }

    /// Move sample index `k` from the LS set to the end of the support set.
    pub fn promote(&mut self, k: usize) -> Result<()> {
        let pos = self
            .ls
            .iter()
            .position(|&x| x == k)
            .ok_or_else(|| LqoError::Argument(format!("index {k} is not in the LS set")))?;
        self.ls.remove(pos);
        self.support.push(k);
        Ok(())
    }
}

/// Row index for `L12` / `L22` / `U` / `T`.
pub fn alpha(i: usize, j: usize, m: usize) -> usize {
    i * m + j
}
/// Column index of `L22`.
pub fn beta(k: usize, l: usize, n: usize) -> usize {
    k * n + l
}
/// Row index for `L21`.
pub fn gamma(j: usize, i: usize, n: usize) -> usize {
    j * n + i
}

/// How the scaling constants enter the stacked least-squares problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoMode {
    /// `sqrt(rho)` on matrix and right-hand side: minimizes the weighted sum of
    /// squared residual norms exactly.
    #[default]
    SqrtBoth,
    /// `rho` on the matrix blocks only, right-hand sides unscaled.
    MatrixOnly,
}

impl std::str::FromStr for RhoMode {
    type Err = LqoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt_both" | "sqrt-both" => Ok(Self::SqrtBoth),
            "matrix_only" | "matrix-only" => Ok(Self::MatrixOnly),
            _ => Err(LqoError::Argument(format!("unknown rho mode {s}"))),
        }
    }
}

struct Gathered {
    xi: Vec<Complex64>,
    shat: Vec<Complex64>,
    h: Vec<Complex64>,
    hhat: Vec<Complex64>,
    hmat: CMat,
    /// `H2(xi_i, shat_j)`
    h12: CMat,
    /// `H2(shat_j, xi_i)`
    h21: CMat,
    /// `H2(shat_i, shat_j)`
    h22: CMat,
}

fn gather(samples: &SampleSet, p: &Partition) -> Result<Gathered> {
    if p.n() + p.m() != samples.len() {
        return Err(LqoError::Dimension(format!(
            "partition covers {} indices, sample set has {}",
            p.n() + p.m(),
            samples.len()
        )));
    }
    let pts = samples.points();
    let (h1, h2) = (samples.h1(), samples.h2());
    let (sup, ls) = (p.support(), p.ls());
    Ok(Gathered {
        xi: sup.iter().map(|&k| pts[k]).collect(),
        shat: ls.iter().map(|&k| pts[k]).collect(),
        h: sup.iter().map(|&k| h1[k]).collect(),
        hhat: ls.iter().map(|&k| h1[k]).collect(),
        hmat: CMat::from_fn(sup.len(), sup.len(), |i, j| h2[(sup[i], sup[j])]),
        h12: CMat::from_fn(sup.len(), ls.len(), |i, j| h2[(sup[i], ls[j])]),
        h21: CMat::from_fn(ls.len(), sup.len(), |j, i| h2[(ls[j], sup[i])]),
        h22: CMat::from_fn(ls.len(), ls.len(), |i, j| h2[(ls[i], ls[j])]),
    })
}

fn diff(a: Complex64, b: Complex64) -> Complex64 {
    let d = a - b;
    assert!(d != ZERO, "support and LS points coincide");
    d
}

/// `L[i][k] = (hhat_i - h_k) / (shat_i - xi_k)` and `rhs = hhat`.
pub fn build_loewner_1d(samples: &SampleSet, p: &Partition) -> Result<(CMat, CVec)> {
    let g = gather(samples, p)?;
    let l = CMat::from_fn(p.m(), p.n(), |i, k| (g.hhat[i] - g.h[k]) / diff(g.shat[i], g.xi[k]));
    Ok((l, CVec::from_vec(g.hhat)))
}

/// `L12[i*m + j][l] = (H2(xi_i, shat_j) - h_il) / (shat_j - xi_l)`.
pub fn build_loewner_12(samples: &SampleSet, p: &Partition) -> Result<(CMat, CVec)> {
    let g = gather(samples, p)?;
    let (n, m) = (p.n(), p.m());
    let mut l12 = CMat::zeros(n * m, n);
    let mut rhs = CVec::zeros(n * m);
    for i in 0..n {
        for j in 0..m {
            let r = alpha(i, j, m);
            rhs[r] = g.h12[(i, j)];
            for l in 0..n {
                l12[(r, l)] = (g.h12[(i, j)] - g.hmat[(i, l)]) / diff(g.shat[j], g.xi[l]);
            }
        }
    }
    Ok((l12, rhs))
}

/// `L21[j*n + i][k] = (H2(shat_j, xi_i) - h_ki) / (shat_j - xi_k)`.
pub fn build_loewner_21(samples: &SampleSet, p: &Partition) -> Result<(CMat, CVec)> {
    let g = gather(samples, p)?;
    let (n, m) = (p.n(), p.m());
    let mut l21 = CMat::zeros(n * m, n);
    let mut rhs = CVec::zeros(n * m);
    for j in 0..m {
        for i in 0..n {
            let r = gamma(j, i, n);
            rhs[r] = g.h21[(j, i)];
            for k in 0..n {
                l21[(r, k)] = (g.h21[(j, i)] - g.hmat[(k, i)]) / diff(g.shat[j], g.xi[k]);
            }
        }
    }
    Ok((l21, rhs))
}

/// Dense 2-D Loewner matrix `L22[i*m + j][k*n + l] = (H2(shat_i, shat_j) - h_kl) / ((shat_i - xi_k)(shat_j - xi_l))`.
pub fn build_loewner_2d(samples: &SampleSet, p: &Partition) -> Result<(CMat, CVec)> {
    let g = gather(samples, p)?;
    let (n, m) = (p.n(), p.m());
    let mut l22 = CMat::zeros(m * m, n * n);
    let mut rhs = CVec::zeros(m * m);
    for i in 0..m {
        for j in 0..m {
            let r = alpha(i, j, m);
            rhs[r] = g.h22[(i, j)];
            for k in 0..n {
                for l in 0..n {
                    l22[(r, beta(k, l, n))] = (g.h22[(i, j)] - g.hmat[(k, l)])
                        / (diff(g.shat[i], g.xi[k]) * diff(g.shat[j], g.xi[l]));
                }
            }
        }
    }
    Ok((l22, rhs))
}

/// `U[i*m + j][k] = H2(shat_i, shat_j) (shat_i + shat_j - 2 xi_k) / ((shat_i - xi_k)(shat_j - xi_k))`.
pub fn build_u(samples: &SampleSet, p: &Partition) -> Result<CMat> {
    let g = gather(samples, p)?;
    let (n, m) = (p.n(), p.m());
    Ok(CMat::from_fn(m * m, n, |r, k| {
        let (i, j) = (r / m, r % m);
        g.h22[(i, j)] * (g.shat[i] + g.shat[j] - g.xi[k] * 2.0)
            / (diff(g.shat[i], g.xi[k]) * diff(g.shat[j], g.xi[k]))
    }))
}

/// The 2-D Loewner operator kept in factored form: `(Ns-n)^2 x n^2` is too
/// large to store for realistic data, and only contractions with `w ⊗ I` and
/// `w ⊗ w` are needed.
#[derive(Debug, Clone)]
pub struct Loewner2d {
    /// `C[i][k] = 1 / (shat_i - xi_k)`
    cauchy: CMat,
    h22: CMat,
    hmat: CMat,
}

impl Loewner2d {
    pub fn nrows(&self) -> usize {
        self.h22.nrows() * self.h22.nrows()
    }
    pub fn ncols(&self) -> usize {
        self.hmat.nrows() * self.hmat.nrows()
    }

    /// `L22 (v ⊗ I_n)`, an `m^2 x n` matrix.
    ///
    /// Entry `(i*m + j, l)` is `(H2(shat_i, shat_j) a_i - B_il) C_jl` with
    /// `a = C v` and `B = C diag(v) Hmat`.
    pub fn apply_kron_identity(&self, v: &CVec) -> CMat {
        let m = self.h22.nrows();
        let n = self.hmat.nrows();
        let a = &self.cauchy * v;
        let cv = CMat::from_fn(m, n, |i, k| self.cauchy[(i, k)] * v[k]);
        let b = cv * &self.hmat;
        CMat::from_fn(m * m, n, |r, l| {
            let (i, j) = (r / m, r % m);
            (self.h22[(i, j)] * a[i] - b[(i, l)]) * self.cauchy[(j, l)]
        })
    }

    /// `L22 (v ⊗ w)`.
    pub fn apply_kron(&self, v: &CVec, w: &CVec) -> CVec {
        self.apply_kron_identity(v) * w
    }

    pub fn to_dense(&self) -> CMat {
        let m = self.h22.nrows();
        let n = self.hmat.nrows();
        CMat::from_fn(m * m, n * n, |r, c| {
            let (i, j) = (r / m, r % m);
            let (k, l) = (c / n, c % n);
            (self.h22[(i, j)] - self.hmat[(k, l)]) * self.cauchy[(i, k)] * self.cauchy[(j, l)]
        })
    }
}

/// All blocks of the relaxed problem for one partition.
#[derive(Debug, Clone)]
pub struct LoewnerBlocks {
    pub l: CMat,
    pub l12: CMat,
    pub l21: CMat,
    pub l22: Loewner2d,
    pub u: CMat,
    pub rhs_h: CVec,
    pub rhs_h12: CVec,
    pub rhs_h21: CVec,
    pub rhs_h22: CVec,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl LoewnerBlocks {
    pub fn build(samples: &SampleSet, p: &Partition) -> Result<Self> {
        let (n, m) = (p.n(), p.m());
        if n == 0 || m == 0 {
            return Err(LqoError::Argument(format!(
                "partition needs nonempty support and LS sets (n = {n}, m = {m})"
            )));
        }
        let (l, rhs_h) = build_loewner_1d(samples, p)?;
        let (l12, rhs_h12) = build_loewner_12(samples, p)?;
        let (l21, rhs_h21) = build_loewner_21(samples, p)?;
        let u = build_u(samples, p)?;
        let g = gather(samples, p)?;
        let cauchy = CMat::from_fn(m, n, |i, k| ONE / diff(g.shat[i], g.xi[k]));
        let rhs_h22 = CVec::from_fn(m * m, |r, _| g.h22[(r / m, r % m)]);
        let (mf, nf) = (m as f64, n as f64);
        Ok(Self {
            l,
            l12,
            l21,
            l22: Loewner2d {
                cauchy,
                h22: g.h22,
                hmat: g.hmat,
            },
            u,
            rhs_h,
            rhs_h12,
            rhs_h21,
            rhs_h22,
            rho1: 1.0 / mf,
            rho2: 1.0 / (mf * nf),
            rho3: 1.0 / (mf * mf),
        })
    }

    pub fn n(&self) -> usize {
        self.l.ncols()
    }

    fn scales(&self, mode: RhoMode) -> ([f64; 3], [f64; 3]) {
        let rho = [self.rho1, self.rho2, self.rho3];
        match mode {
            RhoMode::SqrtBoth => {
                let r = rho.map(f64::sqrt);
                (r, r)
            }
            RhoMode::MatrixOnly => (rho, [1.0; 3]),
        }
    }

    fn stack(&self, mode: RhoMode, t: Option<&CMat>) -> (CMat, CVec) {
        let (ms, rs) = self.scales(mode);
        let mut mats: Vec<(CMat, &CVec, usize)> = vec![
            (self.l.clone() * Complex64::from(ms[0]), &self.rhs_h, 0),
            (self.l12.clone() * Complex64::from(ms[1]), &self.rhs_h12, 1),
            (self.l21.clone() * Complex64::from(ms[1]), &self.rhs_h21, 1),
        ];
        if let Some(t) = t {
            mats.push((t.clone() * Complex64::from(ms[2]), &self.rhs_h22, 2));
        }
        let rows: usize = mats.iter().map(|(a, _, _)| a.nrows()).sum();
        let mut a = CMat::zeros(rows, self.n());
        let mut b = CVec::zeros(rows);
        let mut off = 0;
        for (blk, rhs, which) in mats {
            let r = blk.nrows();
            a.rows_mut(off, r).copy_from(&blk);
            // minimize ||A w + rhs||  <=>  A w ≈ -rhs
            b.rows_mut(off, r).copy_from(&(rhs * Complex64::from(-rs[which])));
            off += r;
        }
        (a, b)
    }

    /// First-stage weights from the blocks that are linear in `w`.
    pub fn solve_stage1(&self, mode: RhoMode) -> Result<LstsqSolution> {
        let (a, b) = self.stack(mode, None);
        lstsq(&a, &b)
    }

    /// `T = L22 (w ⊗ I) + U`.
    pub fn build_t(&self, w: &CVec) -> Result<CMat> {
        if w.len() != self.n() {
            return Err(LqoError::Argument(format!(
                "weight vector has length {}, expected {}",
                w.len(),
                self.n()
            )));
        }
        Ok(self.l22.apply_kron_identity(w) + &self.u)
    }

    /// Second-stage weights with the quadratic block linearized around `T`.
    pub fn solve_stage2(&self, t: &CMat, mode: RhoMode) -> Result<LstsqSolution> {
        if t.nrows() != self.rhs_h22.len() || t.ncols() != self.n() {
            return Err(LqoError::Dimension(format!(
                "T is {}x{}, expected {}x{}",
                t.nrows(),
                t.ncols(),
                self.rhs_h22.len(),
                self.n()
            )));
        }
        let (a, b) = self.stack(mode, Some(t));
        let sol = lstsq(&a, &b)?;
        if sol.x.iter().any(|v| *v == ZERO) {
            log::warn!("stage-2 solve produced an exactly zero weight");
        }
        Ok(sol)
    }

    /// Squared residual norms `(||Lw+h||^2, ||L12 w+h12||^2, ||L21 w+h21||^2, ||L22(w⊗w)+Uw+h22||^2)`.
    pub fn residual_norms(&self, w: &CVec) -> [f64; 4] {
        let r1 = (&self.l * w + &self.rhs_h).norm_squared();
        let r2 = (&self.l12 * w + &self.rhs_h12).norm_squared();
        let r3 = (&self.l21 * w + &self.rhs_h21).norm_squared();
        let r4 = (self.l22.apply_kron(w, w) + &self.u * w + &self.rhs_h22).norm_squared();
        [r1, r2, r3, r4]
    }

    /// Weighted objective with the full quadratic `w ⊗ w` term.
    pub fn relaxed_objective(&self, w: &CVec) -> f64 {
        let [r1, r2, r3, r4] = self.residual_norms(w);
        self.rho1 * r1 + self.rho2 * (r2 + r3) + self.rho3 * r4
    }

    /// Write every block as a Matrix Market file into `dir`.
    pub fn dump(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let col = |v: &CVec| CMat::from_column_slice(v.len(), 1, v.as_slice());
        write_mtx(dir.join("L.mtx"), &self.l)?;
        write_mtx(dir.join("L12.mtx"), &self.l12)?;
        write_mtx(dir.join("L21.mtx"), &self.l21)?;
        write_mtx(dir.join("L22.mtx"), &self.l22.to_dense())?;
        write_mtx(dir.join("U.mtx"), &self.u)?;
        write_mtx(dir.join("h.mtx"), &col(&self.rhs_h))?;
        write_mtx(dir.join("h12.mtx"), &col(&self.rhs_h12))?;
        write_mtx(dir.join("h21.mtx"), &col(&self.rhs_h21))?;
        write_mtx(dir.join("h22.mtx"), &col(&self.rhs_h22))?;
        Ok(())
    }
}

/// Output of the two-stage solve.
#[derive(Debug, Clone)]
pub struct WeightSolve {
    pub stage1: CVec,
    pub weights: CVec,
    pub rank: usize,
}

/// Stage 1, then `extra_passes + 1` stage-2 solves, each relinearized at the
/// previous weights.
pub fn solve_weights(blocks: &LoewnerBlocks, mode: RhoMode, extra_passes: usize) -> Result<WeightSolve> {
    let stage1 = blocks.solve_stage1(mode)?.x;
    let mut lin = stage1.clone();
    let mut sol = blocks.solve_stage2(&blocks.build_t(&lin)?, mode)?;
    for _ in 0..extra_passes {
        lin = sol.x.clone();
        sol = blocks.solve_stage2(&blocks.build_t(&lin)?, mode)?;
    }
    Ok(WeightSolve {
        stage1,
        weights: sol.x,
        rank: sol.rank,
    })
}

/// Barycentric model for a partition and weights, with support values read
/// from the samples.
pub fn barycentric_from_partition(samples: &SampleSet, p: &Partition, w: CVec) -> Result<BarycentricLqo> {
    let g = gather(samples, p)?;
    BarycentricLqo::new(g.xi, w, CVec::from_vec(g.h), g.hmat)
}

/// Scaled nonlinear LS terms `(J1, J2, J3, J4)` of the fit over the
/// uninterpolated data. A term hitting a spurious pole is infinite.
pub fn true_objective(samples: &SampleSet, p: &Partition, w: &CVec) -> Result<[f64; 4]> {
    let g = gather(samples, p)?;
    let bary = BarycentricLqo::new(g.xi.clone(), w.clone(), CVec::from_vec(g.h.clone()), g.hmat.clone())?;
    let (n, m) = (p.n(), p.m());
    let sq = |r: Result<Complex64>, target: Complex64| match r {
        Ok(v) => (v - target).norm_sqr(),
        Err(_) => f64::INFINITY,
    };
    let mut j = [0.0; 4];
    for i in 0..m {
        j[0] += sq(bary.eval_r1(g.shat[i]), g.hhat[i]);
    }
    for i in 0..n {
        for jj in 0..m {
            j[1] += sq(bary.eval_r2_mixed_left(i, g.shat[jj]), g.h12[(i, jj)]);
            j[2] += sq(bary.eval_r2_mixed_right(g.shat[jj], i), g.h21[(jj, i)]);
        }
    }
    for i in 0..m {
        for jj in 0..m {
            j[3] += sq(bary.eval_r2_general(g.shat[i], g.shat[jj]), g.h22[(i, jj)]);
        }
    }
    let (mf, nf) = (m as f64, n as f64);
    Ok([j[0] / mf, j[1] / (nf * mf), j[2] / (nf * mf), j[3] / (mf * mf)])
}
