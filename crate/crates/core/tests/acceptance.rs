//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Criterion 9 needs the ISS 1R benchmark as Matrix Market files (`A.mtx`,
//! `B.mtx`, `C.mtx`) in the directory named by `LQO_ISS_DIR`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lqo_core::aaa::aaa_fit;
use lqo_core::aaa_lqo::{run, AaaLqoConfig};
use lqo_core::linalg::{CMat, CVec, ONE, ZERO};
use lqo_core::loewner::{
    build_loewner_12, build_loewner_1d, build_loewner_21, build_loewner_2d, build_u, true_objective, LoewnerBlocks,
    Partition,
};
use lqo_core::mtx::load_model_dir;
use lqo_core::samples::{conjugate_close, log_space_axis, sample_lqo, SampleSet};
use lqo_core::sim::{output_error, simulate_lqo, Signal};
use lqo_core::synthetic::{random_stable_lqo, SyntheticOptions};
use lqo_core::{BarycentricLqo, Complex64, LqoError, LqoStateSpace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Skip(String),
}

type Criterion = fn() -> Outcome;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

fn rand_c(rng: &mut impl Rng, r: f64) -> Complex64 {
    c(rng.random_range(-r..r), rng.random_range(-r..r))
}

/// Support points spaced at least 2 apart along the imaginary axis, weights
/// with modulus in [1, 2], values in the unit square.
fn random_bary(rng: &mut impl Rng, n: usize) -> BarycentricLqo {
    let xi = (0..n)
        .map(|k| c(rng.random_range(-0.5..0.5), 2.0 * k as f64 + rng.random_range(-0.3..0.3)))
        .collect();
    let w = CVec::from_fn(n, |_, _| {
        let r: f64 = rng.random_range(1.0..2.0);
        Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
    });
    let h = CVec::from_fn(n, |_, _| rand_c(rng, 1.0));
    let hmat = CMat::from_fn(n, n, |_, _| rand_c(rng, 1.0));
    BarycentricLqo::new(xi, w, h, hmat).unwrap()
}

fn closed_axis(lo: f64, hi: f64, half: usize) -> (Vec<Complex64>, Vec<usize>) {
    conjugate_close(&log_space_axis(lo, hi, half).unwrap())
}

fn synthetic_samples(order: usize, seed: u64, linear_output: bool) -> (LqoStateSpace, SampleSet) {
    let opts = SyntheticOptions {
        linear_output,
        ..Default::default()
    };
    let model = random_stable_lqo(order, seed, opts).unwrap();
    let (pts, pair) = closed_axis(-1.0, 2.0, 20);
    let samples = sample_lqo(&model, &pts, Some(pair)).unwrap();
    (model, samples)
}

fn pair_config(eps: f64, nmax: usize) -> AaaLqoConfig {
    AaaLqoConfig {
        nmax,
        eps,
        pair_mode: true,
        ..Default::default()
    }
}

fn interpolation() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let b = random_bary(&mut rng, n);
        let xi = b.support().to_vec();
        let scale1 = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale2 = b.hmat().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            assert_eq!(b.eval_r1(xi[i]).unwrap(), b.values()[i]);
            let delta = Complex64::from_polar(1e-9, rng.random_range(0.0..std::f64::consts::TAU));
            worst = worst.max(rel(b.eval_r1(xi[i] + delta).unwrap(), b.values()[i], scale1));
            for j in 0..n {
                assert_eq!(b.eval_r2(xi[i], xi[j]).unwrap(), b.hmat()[(i, j)]);
                let dz = Complex64::from_polar(1e-9, rng.random_range(0.0..std::f64::consts::TAU));
                let v = b.eval_r2_general(xi[i] + delta, xi[j] + dz).unwrap();
                worst = worst.max(rel(v, b.hmat()[(i, j)], scale2));
            }
        }
    }
    assert!(worst <= 1e-8, "perturbed general formulas off by {worst:e}");
    Outcome::Pass(format!("200 instances, max perturbed rel err {worst:.2e}"))
}

fn realization() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(1..=8);
        let b = random_bary(&mut rng, n);
        let ss = b.realize().unwrap();
        let mut done = 0;
        while done < 100 {
            let s = rand_c(&mut rng, 2.0 * n as f64);
            let z = rand_c(&mut rng, 2.0 * n as f64);
            let pair = (|| -> Result<_, LqoError> {
                Ok((b.eval_r1(s)?, ss.eval_h1(s)?, b.eval_r2(s, z)?, ss.eval_h2(s, z)?))
            })();
            match pair {
                Ok((r1, h1, r2, h2)) => {
                    worst = worst.max(rel(r1, h1, r1.norm().max(h1.norm())));
                    worst = worst.max(rel(r2, h2, r2.norm().max(h2.norm())));
                    done += 1;
                }
                // drawn on top of a pole of the fit
                Err(LqoError::Pole { .. } | LqoError::SpuriousPole(_)) => skipped += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(worst <= 1e-9, "realization mismatch {worst:e}");
    Outcome::Pass(format!("50 instances x 100 points, max rel err {worst:.2e}, {skipped} near-pole draws redrawn"))
}

/// `r2(s, z)` with numerator and denominator multiplied by `prod_k (s - xi_k)`,
/// so the expression stays defined at `s = xi_i`.
fn r2_polynomial_left(b: &BarycentricLqo, s: Complex64, z: Complex64) -> Complex64 {
    let (xi, w, hm) = (b.support(), b.weights(), b.hmat());
    let n = xi.len();
    let prod_except = |k: usize| -> Complex64 { (0..n).filter(|&j| j != k).map(|j| s - xi[j]).product() };
    let full: Complex64 = xi.iter().map(|x| s - x).product();
    let dz = ONE + (0..n).map(|l| w[l] / (z - xi[l])).sum::<Complex64>();
    let mut num = ZERO;
    let mut den = full;
    for k in 0..n {
        let pk = prod_except(k);
        den += w[k] * pk;
        for l in 0..n {
            num += w[k] * pk * hm[(k, l)] * w[l] / (z - xi[l]);
        }
    }
    num / (den * dz)
}

fn lemma2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let b = random_bary(&mut rng, n);
        let i = rng.random_range(0..n);
        let shat = rand_c(&mut rng, 2.0 * n as f64);
        let left = b.eval_r2_mixed_left(i, shat).unwrap();
        let poly = r2_polynomial_left(&b, b.support()[i], shat);
        worst = worst.max(rel(left, poly, left.norm().max(poly.norm())));
        // right form through the transposed model
        let bt = BarycentricLqo::new(
            b.support().to_vec(),
            b.weights().clone(),
            b.values().clone(),
            b.hmat().transpose(),
        )
        .unwrap();
        let right = b.eval_r2_mixed_right(shat, i).unwrap();
        let poly = r2_polynomial_left(&bt, bt.support()[i], shat);
        worst = worst.max(rel(right, poly, right.norm().max(poly.norm())));
    }
    assert!(worst <= 1e-12, "mixed forms differ by {worst:e}");
    Outcome::Pass(format!("1000 evaluations, max rel diff {worst:.2e}"))
}

fn random_partition(rng: &mut impl Rng, ns: usize) -> Partition {
    let mut idx: Vec<usize> = (0..ns).collect();
    idx.shuffle(rng);
    let n = rng.random_range(1..ns);
    Partition::new(ns, idx[..n].to_vec()).unwrap()
}

fn loewner_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut check = |got: Complex64, want: Complex64| {
        let d = rel(got, want, want.norm().max(f64::MIN_POSITIVE));
        assert!(d <= 1e-14 || got == want, "entry {got} vs {want}");
        worst = worst.max(if got == want { 0.0 } else { d });
    };
    for trial in 0..20u64 {
        let ns = rng.random_range(3..=10);
        let model = random_stable_lqo(3, trial, SyntheticOptions::default()).unwrap();
        let pts: Vec<Complex64> = (0..ns).map(|k| c(rng.random_range(-0.2..0.2), 0.3 * (k + 1) as f64)).collect();
        let s = sample_lqo(&model, &pts, None).unwrap();
        let p = random_partition(&mut rng, ns);
        let (sup, ls) = (p.support(), p.ls());
        let (n, m) = (sup.len(), ls.len());
        let (x, h1, h2) = (s.points(), s.h1(), s.h2());
        let (l, _) = build_loewner_1d(&s, &p).unwrap();
        let (l12, _) = build_loewner_12(&s, &p).unwrap();
        let (l21, _) = build_loewner_21(&s, &p).unwrap();
        let (l22, _) = build_loewner_2d(&s, &p).unwrap();
        let u = build_u(&s, &p).unwrap();
        for i in 0..m {
            for k in 0..n {
                check(l[(i, k)], (h1[ls[i]] - h1[sup[k]]) / (x[ls[i]] - x[sup[k]]));
            }
        }
        for i in 0..n {
            for j in 0..m {
                for q in 0..n {
                    check(
                        l12[(i * m + j, q)],
                        (h2[(sup[i], ls[j])] - h2[(sup[i], sup[q])]) / (x[ls[j]] - x[sup[q]]),
                    );
                    check(
                        l21[(j * n + i, q)],
                        (h2[(ls[j], sup[i])] - h2[(sup[q], sup[i])]) / (x[ls[j]] - x[sup[q]]),
                    );
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let hh = h2[(ls[i], ls[j])];
                for k in 0..n {
                    let (a, bb) = (x[ls[i]] - x[sup[k]], x[ls[j]] - x[sup[k]]);
                    check(u[(i * m + j, k)], hh * (x[ls[i]] + x[ls[j]] - x[sup[k]] * 2.0) / (a * bb));
                    for q in 0..n {
                        let want = (hh - h2[(sup[k], sup[q])]) / ((x[ls[i]] - x[sup[k]]) * (x[ls[j]] - x[sup[q]]));
                        check(l22[(i * m + j, k * n + q)], want);
                    }
                }
            }
        }
    }
    Outcome::Pass(format!("20 random partitions, max rel diff {worst:.2e}"))
}

fn residual_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for trial in 0..30u64 {
        let ns = rng.random_range(4..=10);
        let model = random_stable_lqo(4, 100 + trial, SyntheticOptions::default()).unwrap();
        let pts: Vec<Complex64> = (0..ns).map(|k| c(0.0, 0.25 * (k + 1) as f64)).collect();
        let s = sample_lqo(&model, &pts, None).unwrap();
        let p = random_partition(&mut rng, ns);
        let blocks = LoewnerBlocks::build(&s, &p).unwrap();
        let n = p.n();
        let w = CVec::from_fn(n, |_, _| rand_c(&mut rng, 1.0));
        let sup = p.support();
        let b = BarycentricLqo::new(
            sup.iter().map(|&k| s.points()[k]).collect(),
            w.clone(),
            CVec::from_fn(n, |i, _| s.h1()[sup[i]]),
            CMat::from_fn(n, n, |i, j| s.h2()[(sup[i], sup[j])]),
        )
        .unwrap();
        let (xi, hm) = (b.support(), b.hmat());
        let phi = |z: Complex64| -> Vec<Complex64> { (0..n).map(|k| w[k] / (z - xi[k])).collect() };

        let mut e = [0.0f64; 4];
        for &j in p.ls() {
            let sj = s.points()[j];
            let (n1, d1) = b.n1_d1(sj);
            e[0] += (n1 - s.h1()[j] * d1).norm_sqr();
            let pj = phi(sj);
            for i in 0..n {
                let n12: Complex64 = (0..n).map(|l| pj[l] * hm[(i, l)]).sum();
                e[1] += (n12 - s.h2()[(sup[i], j)] * d1).norm_sqr();
                let n21: Complex64 = (0..n).map(|k| pj[k] * hm[(k, i)]).sum();
                e[2] += (n21 - s.h2()[(j, sup[i])] * d1).norm_sqr();
            }
            for &q in p.ls() {
                let sq = s.points()[q];
                let pq = phi(sq);
                let (_, dq) = b.n1_d1(sq);
                let mut n2 = ZERO;
                for k in 0..n {
                    for l in 0..n {
                        n2 += pj[k] * hm[(k, l)] * pq[l];
                    }
                }
                e[3] += (n2 - s.h2()[(j, q)] * d1 * dq).norm_sqr();
            }
        }
        let got = blocks.residual_norms(&w);
        for t in 0..4 {
            worst = worst.max((got[t] - e[t]).abs() / e[t].max(f64::MIN_POSITIVE));
        }
    }
    assert!(worst <= 1e-10, "residual identities off by {worst:e}");
    Outcome::Pass(format!("30 random partitions and weights, max rel diff {worst:.2e}"))
}

fn exact_recovery() -> Outcome {
    let mut notes = Vec::new();
    for (order, seed) in [(2usize, 21u64), (4, 22)] {
        let (_, s) = synthetic_samples(order, seed, true);
        let (bary, report) = run(&s, &pair_config(1e-8, 4 * order)).unwrap();
        let last = report.last();
        assert!(report.converged, "order {order}: not converged ({:?})", report.failure);
        assert!(last.rel1.max(last.rel2) <= 1e-8);
        assert!(bary.order() <= 2 * order, "order {order}: fitted order {}", bary.order());
        let p = Partition::new(
            s.len(),
            report.records.iter().flat_map(|r| r.added.iter().copied()).collect(),
        )
        .unwrap();
        let j = true_objective(&s, &p, bary.weights()).unwrap();
        let scale = report.m1.max(report.m2).powi(2);
        let jmax = j.iter().cloned().fold(0.0, f64::max);
        assert!(jmax <= 1e-14 * scale, "order {order}: objective terms {j:?}");
        notes.push(format!("order {order} -> n={} max J {:.1e}", bary.order(), jmax / scale));
    }
    Outcome::Pass(notes.join(", "))
}

fn time_domain() -> Outcome {
    let (full, s) = synthetic_samples(6, 6, true);
    let (bary, report) = run(&s, &pair_config(1e-6, 20)).unwrap();
    assert!(report.converged, "order-6 reference run did not converge");
    let reduced = bary.realize_real(1e-8).unwrap();
    let u = Signal::Cos {
        amp: 0.5,
        omega: 4.0 * std::f64::consts::PI,
    };
    let yf = simulate_lqo(&full, &u, 10.0, 1e-3, None).unwrap();
    let yr = simulate_lqo(&reduced, &u, 10.0, 1e-3, None).unwrap();
    let (err, _) = output_error(&yf, &yr).unwrap();
    let bound = 1e-4 * yf.max_abs();
    assert!(err <= bound, "output error {err:e} > {bound:e}");
    assert_eq!(yr.max_imag(), 0.0);
    Outcome::Pass(format!("n={}, max output error {:.2e} (bound {:.2e})", bary.order(), err, bound))
}

fn quadratic_only() -> Outcome {
    let (_, s) = synthetic_samples(4, 8, false);
    assert_eq!(s.m1(), 0.0);
    let (bary, report) = run(&s, &pair_config(1e-6, 16)).unwrap();
    assert!(report.converged, "c = 0 run did not converge ({:?})", report.failure);
    assert!(bary.order() <= 16);
    assert!(report.records.iter().all(|r| r.rel1 == 0.0));
    Outcome::Pass(format!("n={}, rel2 {:.2e}", bary.order(), report.last().rel2))
}

fn iss_model(dir: &str) -> LqoStateSpace {
    let lin = load_model_dir(dir).unwrap();
    let n = lin.dim();
    let m = CMat::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => c(0.6, 0.0),
        1 => c(0.3, 0.0),
        _ => ZERO,
    });
    LqoStateSpace::new(lin.a().clone(), lin.b().clone(), lin.c().clone(), m).unwrap()
}

fn iss_orders() -> Outcome {
    let Ok(dir) = std::env::var("LQO_ISS_DIR") else {
        return Outcome::Skip("LQO_ISS_DIR not set; ISS benchmark matrices absent".into());
    };
    let model = iss_model(&dir);
    let (pts, pair) = closed_axis(-1.0, 2.0, 60);
    let s = sample_lqo(&model, &pts, Some(pair)).unwrap();
    let mut orders = Vec::new();
    for tol in [1e-2, 1e-3, 1e-4, 1e-5] {
        let (bary, report) = run(&s, &pair_config(tol, 100)).unwrap();
        assert!(report.converged, "tol {tol:e} did not converge");
        orders.push(bary.order());
    }
    assert!((14..=26).contains(&orders[0]), "order at 1e-2 is {}", orders[0]);
    assert!(orders.windows(2).all(|w| w[1] >= w[0]), "orders not monotone: {orders:?}");
    Outcome::Pass(format!("orders for tol 1e-2..1e-5: {orders:?}"))
}

fn classical_aaa() -> Outcome {
    let pts: Vec<Complex64> = (0..40).map(|k| c(0.0, 10f64.powf(-1.0 + 3.0 * k as f64 / 39.0))).collect();
    let h = |s: Complex64| (s * s * 2.0 + s + 3.0) / ((s + 1.0) * (s * s + s * 0.4 + 4.0));
    let vals: Vec<Complex64> = pts.iter().map(|&s| h(s)).collect();
    let m = aaa_fit(&pts, &vals, 1e-10, 10, None).unwrap();
    assert!(m.converged);
    assert!(m.order() <= 4, "order {}", m.order());
    let err = *m.history.last().unwrap();
    assert!(err <= 1e-10);
    Outcome::Pass(format!("n={}, rel err {err:.2e}", m.order()))
}

fn main() {
    let criteria: [(u32, &str, Criterion, Duration); 10] = [
        (1, "interpolation", interpolation, Duration::from_secs(5)),
        (2, "realization equivalence", realization, Duration::from_secs(10)),
        (3, "mixed-form equivalence", lemma2, Duration::from_secs(5)),
        (4, "Loewner elementwise", loewner_oracle, Duration::from_secs(5)),
        (5, "residual identities", residual_identities, Duration::from_secs(10)),
        (6, "exact recovery", exact_recovery, Duration::from_secs(30)),
        (7, "time-domain validation", time_domain, Duration::from_secs(30)),
        (8, "quadratic-only output", quadratic_only, Duration::from_secs(30)),
        (9, "ISS orders", iss_orders, Duration::MAX),
        (10, "classical AAA", classical_aaa, Duration::from_secs(2)),
    ];
    // runtime budgets are only meaningful for optimized builds
    let enforce_time = !cfg!(debug_assertions);
    let mut failed = 0;
    for (id, name, f, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        match outcome {
            Ok(Outcome::Pass(msg)) if enforce_time && took > budget => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {msg}; took {took:.2?} > {budget:.0?}");
            }
            Ok(Outcome::Pass(msg)) => println!("criterion {id:>2} PASS {name}: {msg} [{took:.2?}]"),
            Ok(Outcome::Skip(msg)) => println!("criterion {id:>2} SKIP {name}: {msg}"),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {id:>2} FAIL {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
