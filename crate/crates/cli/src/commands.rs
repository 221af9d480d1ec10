//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sensyn::linalg::SymMatrix;
use sensyn::models::{analytic_anova, make_builtin, BuiltinName, BuiltinParams, Model};
use sensyn::randkit::RngStream;
use sensyn::report::{
    check_all_bounds, convergence_study, parse_methods, rank, reference_ranking, run_analysis, AnalysisConfig,
    ConvergenceTable, SensitivityReport, StudyConfig, StudyMethod,
};
use sensyn::variance::{upper_sobol, UPPER_STREAM};

use crate::args::{AnalyzeArgs, BoundsArgs, ConvergenceArgs, Format, MChoice, ModelArgs, ModelName, PlotArgs, PlotKind, RunArgs};
use crate::{json, svg, table, CliError};

/// Sample size of the Monte Carlo reference ranking for models without an oracle.
pub const REFERENCE_N: usize = 1_000_000;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn estimation(e: sensyn::Error) -> CliError {
    match e {
        sensyn::Error::DegenerateSpectrum => CliError::Runtime(format!(
            "{e} (no sample saw the function vary; try a larger --n or drop `as` from --methods)"
        )),
        e => runtime(e),
    }
}

/// Parses `diag:2,0`, or rows separated by `;` with comma-separated entries.
pub fn parse_matrix(spec: &str) -> Result<SymMatrix, CliError> {
    let parse_list = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("bad number {x:?} in --A"))))
            .collect()
    };
    if let Some(diag) = spec.strip_prefix("diag:") {
        return Ok(SymMatrix::from_diagonal(&parse_list(diag)?));
    }
    let body = spec.strip_prefix("rows:").unwrap_or(spec);
    let rows = body.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
    SymMatrix::from_rows(&rows).map_err(usage)
}

pub fn build_model(args: &ModelArgs) -> Result<Model, CliError> {
    let name = match args.model {
        ModelName::Example1 => BuiltinName::Example1,
        ModelName::Example2 => BuiltinName::Example2,
        ModelName::Example4 => BuiltinName::Example4,
        ModelName::Linear => BuiltinName::Linear,
        ModelName::QuadraticNormal => BuiltinName::QuadraticNormal,
    };
    if let Some(theta) = &args.theta {
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            eprintln!("warning: theta has length {norm}; rescaling to unit length");
        }
    }
    let params = BuiltinParams {
        noise: 0.0,
        theta: args.theta.clone(),
        coefficients: args.coefficients.clone(),
        c12: args.c12,
        a: args.a.as_deref().map(parse_matrix).transpose()?,
        b: args.b.clone(),
        marginals: None,
    };
    make_builtin(name, &params)
        .and_then(|m| m.with_noise(args.noise))
        .map_err(usage)
}

fn analysis_config(run: &RunArgs, methods: &str, d: usize) -> Result<AnalysisConfig, CliError> {
    if run.m2 == 0 {
        return Err(usage("--m2 must be at least 1"));
    }
    let (n, m1) = match (run.n, run.m1) {
        (Some(n), Some(m1)) if n != m1 * run.m2 => {
            return Err(usage(format!("N = {n} but M1 * M2 = {}", m1 * run.m2)));
        }
        (Some(n), Some(m1)) => (n, m1),
        (None, Some(m1)) => (m1 * run.m2, m1),
        (n, None) => {
            let n = n.unwrap_or(10_000);
            if n % run.m2 != 0 {
                return Err(usage(format!("N = {n} is not a multiple of M2 = {}", run.m2)));
            }
            (n, n / run.m2)
        }
    };
    let config = AnalysisConfig {
        methods: parse_methods(methods).map_err(usage)?,
        n,
        m1,
        m2: run.m2,
        h: run.h,
        m: match run.m {
            MChoice::Auto => None,
            MChoice::Fixed(m) => Some(m),
        },
        threshold: run.threshold,
        seed: run.seed,
    };
    config.validate(d).map_err(usage)?;
    Ok(config)
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| runtime(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| runtime(format!("cannot write to stdout: {e}"))),
    }
}

fn oracle_shares(model: &Model) -> Option<Vec<f64>> {
    analytic_anova(model).ok().map(|a| a.upper)
}

fn render_report(report: &SensitivityReport, model: &Model, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json::to_string(report).map_err(runtime),
        Format::Csv => table::report_csv(report, oracle_shares(model).as_deref()).map_err(runtime),
        Format::Svg => Ok(svg::bars(report)),
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let model = build_model(&args.model)?;
    let config = analysis_config(&args.run, &args.methods, model.dim())?;
    let analysis = run_analysis(&model, &config).map_err(estimation)?;
    let out = render_report(&analysis.report, &model, args.output.format)?;
    emit(args.output.out.as_deref(), &out)
}

pub fn bounds(args: &BoundsArgs) -> Result<(), CliError> {
    if !(args.epsilon > 0.0 && args.epsilon < 0.5) {
        return Err(usage(format!("--epsilon must be in (0, 0.5), got {}", args.epsilon)));
    }
    let model = build_model(&args.model)?;
    let config = analysis_config(&args.run, "all", model.dim())?;
    let analysis = run_analysis(&model, &config).map_err(estimation)?;
    let checks = check_all_bounds(&model, &analysis, config.m, args.epsilon).map_err(runtime)?;
    for c in &checks {
        match c.check() {
            Some(b) => {
                let m = b.params.get("m").map_or(String::new(), |m| format!(" m={m}"));
                let verdict = if b.passed() { "pass" } else { "FAIL" };
                eprintln!("{}{m}: {verdict}", b.name);
            }
            None => {
                if let sensyn::bounds::BoundOutcome::Skipped { name, reason } = c {
                    eprintln!("{name}: skipped ({reason})");
                }
            }
        }
    }
    let mut report = analysis.report;
    let out = match args.output.format {
        Format::Csv => table::bounds_csv(&checks).map_err(runtime)?,
        f => {
            report.bounds = Some(checks);
            render_report(&report, &model, f)?
        }
    };
    emit(args.output.out.as_deref(), &out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMeta {
    pub model: String,
    pub noise: Option<f64>,
    pub base_seed: u64,
    pub seed_count: u64,
    pub sizes: Vec<usize>,
    pub top_k: usize,
    /// `analytic` or `monte_carlo`.
    pub reference_source: String,
    pub protocol: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOutput {
    pub meta: ConvergenceMeta,
    pub tables: Vec<ConvergenceTable>,
}

/// Analytic ranking when an oracle exists, else a large pick-freeze run.
fn study_reference(model: &Model, seed: u64) -> Result<(Vec<usize>, &'static str), CliError> {
    match reference_ranking(model) {
        Ok(r) => Ok((r, "analytic")),
        Err(_) => {
            let est = upper_sobol(model, REFERENCE_N, &RngStream::new(seed, UPPER_STREAM)).map_err(runtime)?;
            Ok((rank(&est.indices), "monte_carlo"))
        }
    }
}

pub fn convergence(args: &ConvergenceArgs) -> Result<(), CliError> {
    let model = build_model(&args.model)?;
    if args.sizes.is_empty() {
        return Err(usage("--sizes must not be empty"));
    }
    if args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--sizes must be strictly increasing"));
    }
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let methods = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| match s.trim() {
            "upper_sobol" | "upper" | "sobol" => Ok(StudyMethod::UpperSobol),
            "gas" | "gas_scores" => Ok(StudyMethod::GasScores),
            other => Err(usage(format!("convergence supports upper_sobol and gas, got {other:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(usage("--methods must not be empty"));
    }
    if methods.contains(&StudyMethod::UpperSobol) && args.sizes[0] < sensyn::mc::BATCHES {
        return Err(usage(format!("upper Sobol' studies need sizes >= {}", sensyn::mc::BATCHES)));
    }
    let (reference, source) = study_reference(&model, args.seed)?;
    let config = StudyConfig {
        sizes: args.sizes.clone(),
        seeds: (0..args.seeds).map(|i| args.seed.wrapping_add(i)).collect(),
        reference,
        top_k: args.top_k,
        m: args.m,
    };
    let tables = methods
        .iter()
        .map(|&m| convergence_study(&model, m, &config))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e {
            sensyn::Error::InvalidInput(_) => usage(e),
            e => runtime(e),
        })?;
    let output = ConvergenceOutput {
        meta: ConvergenceMeta {
            model: model.label().to_string(),
            noise: model.noise_scale(),
            base_seed: args.seed,
            seed_count: args.seeds,
            sizes: args.sizes.clone(),
            top_k: args.top_k,
            reference_source: source.to_string(),
            protocol: "fraction of consecutive seeds whose ranking matches the reference".into(),
        },
        tables,
    };
    let chart = svg::convergence(&output.tables);
    let out = match args.output.format {
        Format::Json => json::to_string(&output).map_err(runtime)?,
        Format::Csv => table::convergence_csv(&output.tables).map_err(runtime)?,
        Format::Svg => chart.clone(),
    };
    emit(args.output.out.as_deref(), &out)?;
    if let Some(p) = &args.svg {
        emit(Some(p), &chart)?;
    }
    Ok(())
}

pub fn plot(args: &PlotArgs) -> Result<(), CliError> {
    if args.format != Format::Svg {
        return Err(usage("plot only writes svg"));
    }
    let text = fs::read_to_string(&args.report)
        .map_err(|e| runtime(format!("cannot read {}: {e}", args.report.display())))?;
    let report: SensitivityReport =
        serde_json::from_str(&text).map_err(|e| runtime(format!("malformed report: {e}")))?;
    let out = match args.kind {
        PlotKind::Bars => svg::bars(&report),
        PlotKind::Spectrum => svg::spectrum(&report),
        PlotKind::Eigvec => svg::eigvec(&report),
    };
    emit(args.out.as_deref(), &out)
}
