use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lqo_core::aaa::aaa_fit;
use lqo_core::aaa_lqo::{error_surfaces, run, AaaLqoConfig};
use lqo_core::loewner::{LoewnerBlocks, Partition, RhoMode};
use lqo_core::samples::{conjugate_close, fmt17, log_space_axis, sample_lqo};
use lqo_core::sim::{output_error, simulate_lqo, Signal};
use lqo_core::synthetic::{random_stable_lqo, SyntheticOptions};
use lqo_core::{BarycentricLqo, Complex64, SampleSet};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::source::ModelSource;
use crate::{Cli, Command, EvalArgs, FitArgs, SampleArgs, SimulateArgs};

pub fn dispatch(cli: &Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match &cli.command {
        Command::Sample(a) => sample(&cli.out, a),
        Command::Fit(a) => fit(&cli.out, a),
        Command::Simulate(a) => simulate(&cli.out, a),
        Command::Eval(a) => eval(&cli.out, a),
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| anyhow!("{what}: expected a number, got {s:?}"))
}

fn parse_axis(spec: &[String], conjugate: bool) -> Result<(Vec<Complex64>, Option<Vec<usize>>)> {
    let lo = parse_f64(&spec[0], "axis LO")?;
    let hi = parse_f64(&spec[1], "axis HI")?;
    let m: usize = spec[2].parse().map_err(|_| anyhow!("axis M: expected a count, got {:?}", spec[2]))?;
    let pts = if m == 0 { Vec::new() } else { log_space_axis(lo, hi, m)? };
    Ok(if conjugate {
        let (p, pair) = conjugate_close(&pts);
        (p, Some(pair))
    } else {
        (pts, None)
    })
}

struct SyntheticSpec {
    order: usize,
    seed: u64,
    opts: SyntheticOptions,
}

fn parse_synthetic(kv: &[String]) -> Result<SyntheticSpec> {
    let mut spec = SyntheticSpec {
        order: 0,
        seed: 0,
        opts: SyntheticOptions::default(),
    };
    for item in kv {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("synthetic spec {item:?} is not KEY=VALUE"))?;
        match k {
            "order" => spec.order = v.parse().context("order")?,
            "seed" => spec.seed = v.parse().context("seed")?,
            "linear" => spec.opts.linear_output = v.parse().context("linear")?,
            "freq_scale" => spec.opts.freq_scale = v.parse().context("freq_scale")?,
            _ => bail!("unknown synthetic key {k:?}"),
        }
    }
    if spec.order == 0 {
        bail!("synthetic spec needs order=K with K >= 1");
    }
    Ok(spec)
}

fn sample(out: &Path, a: &SampleArgs) -> Result<()> {
    let mut manifest = RunManifest::new("sample", out);
    let model = match (&a.model, &a.synthetic) {
        (_, Some(kv)) => {
            let spec = parse_synthetic(kv)?;
            manifest.seed = Some(spec.seed);
            manifest.config = json!({
                "synthetic": { "order": spec.order, "seed": spec.seed,
                    "linear": spec.opts.linear_output, "freq_scale": spec.opts.freq_scale },
            });
            random_stable_lqo(spec.order, spec.seed, spec.opts)?
        }
        (Some(path), None) => {
            manifest.inputs.push(path.clone());
            ModelSource::load(path)?.state_space()?
        }
        (None, None) => bail!("give a model file or --synthetic"),
    };
    let (points, pairing) = parse_axis(&a.log_axis, a.conjugate)?;
    let samples = sample_lqo(&model, &points, pairing).context("sampling the model")?;
    let path = out.join(&a.name);
    samples.save(&path)?;
    let stem = Path::new(&a.name).file_stem().and_then(|s| s.to_str()).unwrap_or("samples");
    samples.export_csv(out.join(format!("{stem}_h1.csv")), out.join(format!("{stem}_h2.csv")))?;
    if a.synthetic.is_some() {
        model.save(out.join("synthetic_model.json"))?;
        manifest.outputs.push("synthetic_model.json".into());
    }
    manifest.config["log_axis"] = json!(a.log_axis);
    manifest.config["conjugate"] = json!(a.conjugate);
    manifest.outputs.extend([a.name.clone(), format!("{stem}_h1.csv"), format!("{stem}_h2.csv")]);
    manifest.write()?;
    println!("wrote {} ({} points)", path.display(), samples.len());
    Ok(())
}

struct FitOutcome {
    converged: bool,
    order: usize,
    rel1: f64,
    rel2: f64,
}

fn fit(out: &Path, a: &FitArgs) -> Result<()> {
    let samples = SampleSet::load(&a.samples).with_context(|| format!("loading {}", a.samples.display()))?;
    let pair_mode = a.pair_mode.unwrap_or(samples.is_conjugate_closed());
    if pair_mode && !samples.is_conjugate_closed() {
        bail!("--pair-mode needs a conjugate-closed sample set");
    }
    let rho_mode: RhoMode = a.rho_mode.parse()?;
    let mut manifest = RunManifest::new("fit", out);
    manifest.inputs.push(a.samples.clone());
    manifest.config = json!({
        "tol": a.tol, "nmax": a.nmax, "linear_only": a.linear_only, "pair_mode": pair_mode,
        "rho_mode": a.rho_mode, "greedy_n": a.greedy_n, "extra_passes": a.extra_passes,
    });

    let sweep = a.tol.len() > 1;
    let mut table = String::from("tol,order,converged,eps1_rel,eps2_rel\n");
    for &tol in &a.tol {
        let dir = if sweep { out.join(format!("tol_{tol:e}")) } else { out.to_path_buf() };
        std::fs::create_dir_all(&dir)?;
        let res = if a.linear_only {
            fit_linear(&dir, &samples, tol, a.nmax, pair_mode)?
        } else {
            let cfg = AaaLqoConfig {
                nmax: a.nmax,
                eps: tol,
                pair_mode,
                rho_mode,
                greedy_n: a.greedy_n,
                extra_stage2_passes: a.extra_passes,
            };
            fit_lqo(&dir, &samples, &cfg, a.dump_blocks.as_deref())?
        };
        println!(
            "converged={} n={} eps1={} eps2={}",
            res.converged,
            res.order,
            fmt17(res.rel1),
            fmt17(res.rel2)
        );
        writeln!(table, "{},{},{},{},{}", fmt17(tol), res.order, res.converged, fmt17(res.rel1), fmt17(res.rel2))?;
        let prefix = if sweep { format!("tol_{tol:e}/") } else { String::new() };
        manifest
            .outputs
            .extend(["fit.json", "model.json", "report.csv"].map(|f| format!("{prefix}{f}")));
    }
    if sweep {
        std::fs::write(out.join("sweep.csv"), &table)?;
        manifest.outputs.push("sweep.csv".into());
        print!("{table}");
    }
    manifest.write()
}

fn write_realization(dir: &Path, bary: &BarycentricLqo, real: bool) -> Result<()> {
    if bary.is_constant() {
        log::warn!("constant model has no state-space realization; model.json not written");
        return Ok(());
    }
    let ss = if real { bary.realize_real(1e-8)? } else { bary.realize()? };
    ss.save(dir.join("model.json"))?;
    Ok(())
}

fn fit_lqo(dir: &Path, samples: &SampleSet, cfg: &AaaLqoConfig, dump: Option<&Path>) -> Result<FitOutcome> {
    let (bary, report) = run(samples, cfg)?;
    if let Some(msg) = &report.failure {
        log::warn!("fit stopped early: {msg}");
    }
    bary.save(dir.join("fit.json"))?;
    report.save_csv(dir.join("report.csv"))?;
    write_realization(dir, &bary, cfg.pair_mode)?;
    if let Some(dump) = dump {
        let support: Vec<usize> = report.records.iter().flat_map(|r| r.added.iter().copied()).collect();
        let p = Partition::new(samples.len(), support)?;
        if p.n() > 0 && p.m() > 0 {
            LoewnerBlocks::build(samples, &p)?.dump(dump)?;
        }
    }
    let last = report.last();
    Ok(FitOutcome {
        converged: report.converged,
        order: bary.order(),
        rel1: last.rel1,
        rel2: last.rel2,
    })
}

fn fit_linear(dir: &Path, samples: &SampleSet, tol: f64, nmax: usize, pair_mode: bool) -> Result<FitOutcome> {
    let pairing = if pair_mode { samples.pairing() } else { None };
    let m = aaa_fit(samples.points(), samples.h1().as_slice(), tol, nmax, pairing)?;
    // no quadratic part: r2 is identically zero
    let bary = m.to_barycentric()?;
    bary.save(dir.join("fit.json"))?;
    write_realization(dir, &bary, pair_mode)?;

    let mut csv = String::from("n,xi_re,xi_im,eps1_rel,eps2_rel,relaxed_obj\n");
    let mut added = m.support_idx.iter();
    let mut prev = 0;
    for (&n, &rel) in m.history_order.iter().zip(&m.history) {
        if n == 0 {
            writeln!(csv, "0,,,{},,", fmt17(rel))?;
        }
        for _ in prev..n {
            let s = samples.points()[*added.next().expect("support index per order step")];
            writeln!(csv, "{n},{},{},{},,", fmt17(s.re), fmt17(s.im), fmt17(rel))?;
        }
        prev = n;
    }
    std::fs::write(dir.join("report.csv"), csv)?;

    let e = error_surfaces(samples, &bary);
    let ratio = |x: f64, m: f64| if m > 0.0 { x / m } else { 0.0 };
    Ok(FitOutcome {
        converged: m.converged,
        order: m.order(),
        rel1: *m.history.last().unwrap_or(&0.0),
        rel2: ratio(e.eps2, samples.m2()),
    })
}

fn parse_signal(spec: &[String]) -> Result<Signal> {
    match spec[0].as_str() {
        "cos" | "sin" => {
            let amp = parse_f64(&spec[1], "input amplitude")?;
            let omega = parse_f64(&spec[2], "input frequency")?;
            Ok(if spec[0] == "cos" {
                Signal::Cos { amp, omega }
            } else {
                Signal::Sin { amp, omega }
            })
        }
        "file" => {
            let path = PathBuf::from(&spec[1]);
            let dt = parse_f64(&spec[2], "input dt")?;
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let values = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .enumerate()
                .map(|(i, l)| parse_f64(l, &format!("{} line {}", path.display(), i + 1)))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Signal::Sampled { dt, values })
        }
        k => bail!("unknown input kind {k:?}; use cos, sin or file"),
    }
}

fn simulate(out: &Path, a: &SimulateArgs) -> Result<()> {
    let signal = parse_signal(&a.input)?;
    let dt = match (a.dt, &signal) {
        (Some(dt), _) => dt,
        (None, Signal::Sampled { dt, .. }) => *dt,
        (None, s) => match s.omega() {
            Some(w) if w > 0.0 => 2.0 * std::f64::consts::PI / w / 50.0,
            _ => bail!("constant input: give --dt"),
        },
    };
    let full = ModelSource::load(&a.full)?.state_space()?;
    let reduced = ModelSource::load(&a.reduced)?.state_space()?;
    let yf = simulate_lqo(&full, &signal, a.tend, dt, None).context("simulating the full model")?;
    let yr = simulate_lqo(&reduced, &signal, a.tend, dt, None).context("simulating the reduced model")?;
    let (max, series) = output_error(&yf, &yr)?;
    yf.save_csv(out.join("full_trace.csv"))?;
    yr.save_csv(out.join("reduced_trace.csv"))?;
    let mut csv = String::from("t,abs_err\n");
    for (t, e) in yf.t.iter().zip(&series) {
        writeln!(csv, "{},{}", fmt17(*t), fmt17(*e))?;
    }
    std::fs::write(out.join("error.csv"), csv)?;

    let mut manifest = RunManifest::new("simulate", out);
    manifest.inputs = vec![a.full.clone(), a.reduced.clone()];
    manifest.config = json!({ "input": a.input, "tend": a.tend, "dt": dt });
    manifest.outputs = ["full_trace.csv", "reduced_trace.csv", "error.csv"].map(String::from).to_vec();
    manifest.write()?;
    println!("max_error={} max_output={}", fmt17(max), fmt17(yf.max_abs()));
    Ok(())
}

fn read_points(path: &Path) -> Result<Vec<Complex64>> {
    let mut r = csv_reader(path)?;
    let mut pts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| -> Result<f64> {
            let s = rec.get(k).ok_or_else(|| anyhow!("{} row {}: missing column {k}", path.display(), i + 1))?;
            parse_f64(s.trim(), &format!("{} row {}", path.display(), i + 1))
        };
        pts.push(Complex64::new(get(0)?, get(1)?));
    }
    Ok(pts)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))
}

fn eval(out: &Path, a: &EvalArgs) -> Result<()> {
    let points = match (&a.points, &a.grid) {
        (Some(p), _) => read_points(p)?,
        (None, Some(g)) => parse_axis(g, a.conjugate)?.0,
        (None, None) => bail!("give --points or --grid"),
    };
    let model = ModelSource::load(&a.model)?;
    let (h1, h2) = model.evaluate(&points, !a.no_h2);
    let cell = |v: &Option<Complex64>| match v {
        Some(v) => format!("{},{},0", fmt17(v.re), fmt17(v.im)),
        None => "NaN,NaN,1".to_string(),
    };
    let mut csv = String::from("i,s_re,s_im,h1_re,h1_im,pole\n");
    for (i, (s, v)) in points.iter().zip(&h1).enumerate() {
        writeln!(csv, "{i},{},{},{}", fmt17(s.re), fmt17(s.im), cell(v))?;
    }
    std::fs::write(out.join("eval_h1.csv"), csv)?;
    let mut outputs = vec!["eval_h1.csv".to_string()];
    if let Some(h2) = h2 {
        let mut csv = String::from("i,j,h2_re,h2_im,pole\n");
        for (i, row) in h2.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(csv, "{i},{j},{}", cell(v))?;
            }
        }
        std::fs::write(out.join("eval_h2.csv"), csv)?;
        outputs.push("eval_h2.csv".into());
    }
    let poles = h1.iter().filter(|v| v.is_none()).count();
    if poles > 0 {
        log::warn!("{poles} points hit a pole");
    }
    let mut manifest = RunManifest::new("eval", out);
    manifest.inputs.push(a.model.clone());
    if let Some(p) = &a.points {
        manifest.inputs.push(p.clone());
    }
    manifest.config = json!({ "grid": a.grid, "conjugate": a.conjugate, "h2": !a.no_h2 });
    manifest.outputs = outputs;
    manifest.write()?;
    println!("evaluated {} points ({poles} poles)", points.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn synthetic_spec() {
        let s = parse_synthetic(&strs(&["order=3", "seed=9", "linear=false"])).unwrap();
        assert_eq!((s.order, s.seed, s.opts.linear_output), (3, 9, false));
        assert!(parse_synthetic(&strs(&["seed=1"])).is_err());
        assert!(parse_synthetic(&strs(&["order"])).is_err());
        assert!(parse_synthetic(&strs(&["order=2", "colour=red"])).is_err());
    }

    #[test]
    fn axis_spec() {
        let (p, pair) = parse_axis(&strs(&["-1", "2", "60"]), true).unwrap();
        assert_eq!(p.len(), 120);
        assert_eq!(pair.unwrap()[0], 1);
        assert!(parse_axis(&strs(&["-1", "2", "0"]), false).unwrap().0.is_empty());
        assert!(parse_axis(&strs(&["x", "2", "3"]), false).is_err());
    }

    #[test]
    fn signal_spec() {
        let s = parse_signal(&strs(&["cos", "0.5", "12.566"])).unwrap();
        assert_eq!(s, Signal::Cos { amp: 0.5, omega: 12.566 });
        assert!(parse_signal(&strs(&["square", "1", "1"])).is_err());
    }
}
