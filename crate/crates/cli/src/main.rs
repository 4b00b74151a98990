//! `aaa-lqo`: sample LQO systems, fit reduced models, simulate and evaluate.

mod commands;
mod manifest;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "aaa-lqo", version, about = "Data-driven reduced models of linear systems with quadratic output")]
pub struct Cli {
    /// Directory for all output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample H1 and H2 of a model on an imaginary-axis grid.
    Sample(SampleArgs),
    /// Fit a reduced model to a sample set.
    Fit(FitArgs),
    /// Simulate a full and a reduced model and compare their outputs.
    Simulate(SimulateArgs),
    /// Evaluate a model's transfer functions on points or a grid.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// State-space JSON, barycentric JSON, or a directory of Matrix Market files.
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub model: Option<PathBuf>,

    /// Random stable real model, e.g. `order=6 seed=1 [linear=false] [freq_scale=3]`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub synthetic: Option<Vec<String>>,

    /// Points `i * 10^e` for `e` equispaced in `[LO, HI]`.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "M"], allow_negative_numbers = true, required = true)]
    pub log_axis: Vec<String>,

    /// Add the complex conjugate of every point.
    #[arg(long)]
    pub conjugate: bool,

    /// Output file name inside `--out`.
    #[arg(long, default_value = "samples.json")]
    pub name: String,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sample set JSON.
    pub samples: PathBuf,

    /// Relative tolerance; several values run a sweep.
    #[arg(long, num_args = 1.., default_values_t = [1e-6])]
    pub tol: Vec<f64>,

    #[arg(long, default_value_t = 40)]
    pub nmax: usize,

    /// Classical AAA on the H1 samples only.
    #[arg(long)]
    pub linear_only: bool,

    /// Add conjugate pairs together; defaults to on for conjugate-closed data.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub pair_mode: Option<bool>,

    /// `sqrt_both` or `matrix_only`.
    #[arg(long, default_value = "sqrt_both")]
    pub rho_mode: String,

    /// Greedy comparison constant; the number of samples by default.
    #[arg(long = "greedy-N")]
    pub greedy_n: Option<f64>,

    /// Additional relinearized stage-2 solves per step.
    #[arg(long, default_value_t = 0)]
    pub extra_passes: usize,

    /// Write the Loewner blocks of the final partition here.
    #[arg(long)]
    pub dump_blocks: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub full: PathBuf,
    pub reduced: PathBuf,

    /// `cos A W`, `sin A W`, or `file PATH DT` (one value per line).
    #[arg(long, num_args = 3, value_names = ["KIND", "P1", "P2"], required = true)]
    pub input: Vec<String>,

    #[arg(long, default_value_t = 10.0)]
    pub tend: f64,

    /// Step size; defaults to a fiftieth of the input period.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub model: PathBuf,

    /// CSV with columns `re,im`.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub points: Option<PathBuf>,

    /// Log-spaced imaginary-axis grid `LO HI M`.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "M"], allow_negative_numbers = true)]
    pub grid: Option<Vec<String>>,

    /// Add the complex conjugate of every grid point.
    #[arg(long)]
    pub conjugate: bool,

    /// Skip the H2 grid.
    #[arg(long)]
    pub no_h2: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
