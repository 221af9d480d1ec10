//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sensyn::bounds::DEFAULT_EPSILON;
use sensyn::dgsm::DEFAULT_H;
use sensyn::linalg::DEFAULT_THRESHOLD;
use sensyn::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "sensyn", version, about = "Global sensitivity analysis of built-in benchmark models")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate sensitivity measures and write a report.
    Analyze(AnalyzeArgs),
    /// Run every applicable bound check and write the report with its verdicts.
    Bounds(BoundsArgs),
    /// Track ranking agreement across sample sizes and seeds.
    Convergence(ConvergenceArgs),
    /// Draw a chart from a saved JSON report.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Example1,
    Example2,
    Example4,
    Linear,
    #[value(alias = "quadratic")]
    QuadraticNormal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Bars,
    Spectrum,
    Eigvec,
}

/// `auto` or an explicit subspace size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MChoice {
    Auto,
    Fixed(usize),
}

fn parse_m(s: &str) -> Result<MChoice, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(MChoice::Auto);
    }
    match s.parse::<usize>() {
        Ok(m) if m >= 1 => Ok(MChoice::Fixed(m)),
        _ => Err(format!("expected a positive integer or \"auto\", got {s:?}")),
    }
}

#[derive(Clone, Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,

    /// Additive noise scale k (example1 only).
    #[arg(long, short = 'k', default_value_t = 0.0)]
    pub noise: f64,

    /// Ridge direction for example2, comma separated; rescaled to unit length.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,

    /// Linear coefficients, or c1..c4 for example4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coefficients: Option<Vec<f64>>,

    /// Interaction coefficient for example4.
    #[arg(long, allow_hyphen_values = true)]
    pub c12: Option<f64>,

    /// Quadratic matrix: `diag:2,0` or rows `1,0.5;0.5,2`.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<String>,

    /// Quadratic linear term, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Sample size for Sobol', DGSM and gradient-matrix estimators [default: 10000,
    /// or M1 * M2 when --m1 is given].
    #[arg(long)]
    pub n: Option<usize>,

    /// Finite-slope base points; defaults to N / M2.
    #[arg(long)]
    pub m1: Option<usize>,

    /// Replacement vectors per base point.
    #[arg(long, default_value_t = 1)]
    pub m2: usize,

    /// Forward-difference increment.
    #[arg(long, default_value_t = DEFAULT_H)]
    pub h: f64,

    /// Subspace size, or `auto` for the cumulative-eigenvalue rule.
    #[arg(long, default_value = "auto", value_parser = parse_m)]
    pub m: MChoice,

    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,

    #[arg(long, env = "SENSYN_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Comma-separated subset of lower_sobol, upper_sobol, dgsm, as, gas; or `all`.
    #[arg(long, default_value = "all")]
    pub methods: String,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub run: RunArgs,

    /// Tail mass for the bounded-function check.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Comma-separated subset of upper_sobol, gas.
    #[arg(long, default_value = "upper_sobol,gas")]
    pub methods: String,

    /// Sample sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    pub sizes: Vec<usize>,

    /// Number of seeds, counted up from --seed.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,

    #[arg(long, env = "SENSYN_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Leading inputs compared in the soft agreement mode.
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,

    /// Subspace size for score studies; all eigenpairs when omitted.
    #[arg(long)]
    pub m: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Also write the chart to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// JSON report written by `analyze` or `bounds`.
    pub report: PathBuf,

    #[arg(long, value_enum, default_value = "bars")]
    pub kind: PlotKind,

    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "svg")]
    pub format: Format,
}
