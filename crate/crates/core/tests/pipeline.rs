use lqo_core::aaa_lqo::{run, AaaLqoConfig};
use lqo_core::samples::{conjugate_close, log_space_axis, sample_lqo};
use lqo_core::sim::{output_error, simulate_lqo, Signal};
use lqo_core::synthetic::{random_stable_lqo, SyntheticOptions};
use lqo_core::{BarycentricLqo, LqoStateSpace, SampleSet};

#[test]
fn files_round_trip_through_a_fit() {
    let dir = tempfile::tempdir().unwrap();
    let model = random_stable_lqo(4, 3, SyntheticOptions::default()).unwrap();
    model.save(dir.path().join("model.json")).unwrap();
    let model = LqoStateSpace::load(dir.path().join("model.json")).unwrap();

    let (pts, pair) = conjugate_close(&log_space_axis(-1.0, 1.5, 15).unwrap());
    sample_lqo(&model, &pts, Some(pair)).unwrap().save(dir.path().join("s.json")).unwrap();
    let samples = SampleSet::load(dir.path().join("s.json")).unwrap();
    assert!(samples.is_conjugate_closed());

    let cfg = AaaLqoConfig {
        nmax: 12,
        eps: 1e-9,
        pair_mode: true,
        ..Default::default()
    };
    let (bary, report) = run(&samples, &cfg).unwrap();
    assert!(report.converged);
    bary.save(dir.path().join("fit.json")).unwrap();
    let bary = BarycentricLqo::load(dir.path().join("fit.json")).unwrap();

    let reduced = bary.realize_real(1e-8).unwrap();
    for &s in samples.points() {
        let want = model.eval_h1(s).unwrap();
        assert!((reduced.eval_h1(s).unwrap() - want).norm() <= 1e-7 * (1.0 + want.norm()));
    }

    let u = Signal::Sin { amp: 1.0, omega: 0.7 };
    let yf = simulate_lqo(&model, &u, 20.0, 1e-2, None).unwrap();
    let yr = simulate_lqo(&reduced, &u, 20.0, 1e-2, None).unwrap();
    let (err, _) = output_error(&yf, &yr).unwrap();
    assert!(err <= 1e-6, "output error {err:e}");
}

#[test]
fn report_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let model = random_stable_lqo(2, 5, SyntheticOptions::default()).unwrap();
    let (pts, pair) = conjugate_close(&log_space_axis(-1.0, 1.0, 8).unwrap());
    let s = sample_lqo(&model, &pts, Some(pair)).unwrap();
    let (_, report) = run(&s, &AaaLqoConfig { pair_mode: true, ..Default::default() }).unwrap();
    let path = dir.path().join("report.csv");
    report.save_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let rows = text.lines().count() - 1;
    let points: usize = report.records.iter().map(|r| r.points.len().max(1)).sum();
    assert_eq!(rows, points);
}
