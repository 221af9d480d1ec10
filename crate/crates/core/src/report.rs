//! Normalization, rankings, full analyses and convergence studies.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_dgsm_bounds, check_gas_bound_general, check_gas_bound_uniform, quadratic_as_bound,
    quadratic_identity, BoundOutcome,
};
use crate::dgsm::{gradient_outer_products, DgsmEstimate, DEFAULT_H, GRADIENT_STREAM};
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_THRESHOLD;
use crate::models::{analytic_anova, Builtin, Model};
use crate::randkit::RngStream;
use crate::subspace::{finite_slope_outer_products, MatrixKind, SubspaceResult, GAS_STREAM};
use crate::variance::{lower_sobol, upper_sobol, IndexEstimate, LOWER_STREAM, UPPER_STREAM};
use crate::DEFAULT_SEED;

/// `scores / sum(scores)`, or `None` when the sum is not positive.
pub fn normalize(scores: &[f64]) -> Result<Option<Vec<f64>>> {
    if let Some(i) = scores.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "normalize",
            index: i,
        });
    }
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Ok(None);
    }
    Ok(Some(scores.iter().map(|x| x / total).collect()))
}

/// Zero-based input indices from the largest score to the smallest. Ties
/// keep the lower index first.
pub fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Ranking by the analytic upper indices of an oracle-supported model.
pub fn reference_ranking(model: &Model) -> Result<Vec<usize>> {
    Ok(rank(&analytic_anova(model)?.upper))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LowerSobol,
    UpperSobol,
    Dgsm,
    As,
    Gas,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::LowerSobol,
        Method::UpperSobol,
        Method::Dgsm,
        Method::As,
        Method::Gas,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::LowerSobol => "lower_sobol",
            Method::UpperSobol => "upper_sobol",
            Method::Dgsm => "dgsm",
            Method::As => "as",
            Method::Gas => "gas",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "lower_sobol" | "lower" => Ok(Method::LowerSobol),
            "upper_sobol" | "upper" | "sobol" => Ok(Method::UpperSobol),
            "dgsm" => Ok(Method::Dgsm),
            "as" | "activity" => Ok(Method::As),
            "gas" | "global_activity" => Ok(Method::Gas),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

/// Parses a comma-separated method list; `all` selects every method.
pub fn parse_methods(list: &str) -> Result<BTreeSet<Method>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.into_iter().collect());
    }
    let set: BTreeSet<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if set.is_empty() {
        return Err(Error::InvalidInput("at least one method is required".into()));
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub methods: BTreeSet<Method>,
    /// Sample size for the Sobol', DGSM and gradient-matrix estimators.
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub h: f64,
    /// Subspace size; `None` picks it by the threshold rule.
    pub m: Option<usize>,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.into_iter().collect(),
            n: 10_000,
            m1: 10_000,
            m2: 1,
            h: DEFAULT_H,
            m: None,
            threshold: DEFAULT_THRESHOLD,
            seed: DEFAULT_SEED,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("at least one method is required".into()));
        }
        if self.n < crate::mc::BATCHES || self.m1 < crate::mc::BATCHES {
            return Err(Error::TooFewReplicates {
                needed: crate::mc::BATCHES,
                got: self.n.min(self.m1),
            });
        }
        if self.m2 == 0 {
            return Err(Error::InvalidInput("M2 must be at least 1".into()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidInput(format!("h must be > 0, got {}", self.h)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must be in (0, 1), got {}",
                self.threshold
            )));
        }
        if let Some(m) = self.m {
            if m == 0 || m > d {
                return Err(Error::InvalidInput(format!("m must be in 1..={d}, got {m}")));
            }
        }
        Ok(())
    }
}

/// One per-input measure as stored in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    /// `lower_sobol`, `upper_sobol`, `dgsm`, `alpha_m`, `alpha_d`, `gamma_m` or `gamma_d`.
    pub name: String,
    pub raw: Vec<f64>,
    /// Absent for Sobol' indices, which are reported as-is, and for all-zero scores.
    pub normalized: Option<Vec<f64>>,
    pub se: Option<Vec<f64>>,
    /// One-based input numbers from most to least important.
    pub ranking: Vec<usize>,
}

impl ScoreVector {
    fn new(name: &str, raw: Vec<f64>, se: Option<Vec<f64>>, normalized: bool) -> Result<Self> {
        let normalized = if normalized { normalize(&raw)? } else { None };
        let ranking = rank(&raw).into_iter().map(|i| i + 1).collect();
        Ok(Self {
            name: name.to_string(),
            raw,
            normalized,
            se,
            ranking,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub kind: MatrixKind,
    pub eigenvalues: Vec<f64>,
    pub normalized_cumsum: Vec<f64>,
    /// Eigenvectors as columns: `eigenvectors[j]` pairs with `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub m_selected: usize,
    /// The `m` actually used for the scores.
    pub m_used: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub model: String,
    pub dim: usize,
    /// Additive noise scale `k`, if any.
    pub noise: Option<f64>,
    pub methods: Vec<Method>,
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub h: f64,
    pub threshold: f64,
    pub m_override: Option<usize>,
    pub m_as: Option<usize>,
    pub m_gas: Option<usize>,
    pub sigma2_hat: Option<f64>,
    pub seed: u64,
    /// `|<u_1, theta>|` for ridge models analyzed with the finite-slope matrix.
    pub theta_alignment: Option<f64>,
    /// Ridge direction of the model, when it has one.
    pub theta: Option<Vec<f64>>,
}

/// Everything computed for one model, configuration and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub meta: ReportMeta,
    pub scores: Vec<ScoreVector>,
    pub spectra: Vec<SpectrumSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<BoundOutcome>>,
}

impl SensitivityReport {
    pub fn score(&self, name: &str) -> Option<&ScoreVector> {
        self.scores.iter().find(|s| s.name == name)
    }

    pub fn spectrum(&self, kind: MatrixKind) -> Option<&SpectrumSummary> {
        self.spectra.iter().find(|s| s.kind == kind)
    }
}

/// Raw estimator outputs behind a report.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub upper: Option<IndexEstimate>,
    pub lower: Option<IndexEstimate>,
    pub dgsm: Option<DgsmEstimate>,
    pub active: Option<SubspaceResult>,
    pub global: Option<SubspaceResult>,
    pub report: SensitivityReport,
}

fn summarize(sub: &SubspaceResult, m_used: usize) -> Result<SpectrumSummary> {
    Ok(SpectrumSummary {
        kind: sub.kind,
        eigenvalues: sub.spectrum.eigenvalues().to_vec(),
        normalized_cumsum: sub.spectrum.normalized_cumsum()?,
        eigenvectors: sub.spectrum.eigenvectors(),
        m_selected: sub.m_selected,
        m_used,
        samples: sub.samples,
    })
}

/// Runs the configured estimators. Each method draws from its own root
/// stream, so adding or removing a method leaves the others unchanged.
pub fn run_analysis(model: &Model, config: &AnalysisConfig) -> Result<Analysis> {
    let d = model.dim();
    config.validate(d)?;
    let seed = config.seed;
    let wants = |m: Method| config.methods.contains(&m);

    let upper = wants(Method::UpperSobol)
        .then(|| upper_sobol(model, config.n, &RngStream::new(seed, UPPER_STREAM)))
        .transpose()?;
    let lower = wants(Method::LowerSobol)
        .then(|| lower_sobol(model, config.n, &RngStream::new(seed, LOWER_STREAM)))
        .transpose()?;

    let (dgsm, active) = if wants(Method::Dgsm) || wants(Method::As) {
        let acc = gradient_outer_products(model, config.n, config.h, &RngStream::new(seed, GRADIENT_STREAM))?;
        let v = wants(Method::Dgsm).then(|| DgsmEstimate::from_outer_products(&acc, d, config.h));
        let a = wants(Method::As)
            .then(|| SubspaceResult::from_accumulated(MatrixKind::As, &acc, d, config.threshold))
            .transpose()?;
        (v, a)
    } else {
        (None, None)
    };

    let global = wants(Method::Gas)
        .then(|| -> Result<SubspaceResult> {
            let acc = finite_slope_outer_products(model, config.m1, config.m2, &RngStream::new(seed, GAS_STREAM))?;
            SubspaceResult::from_accumulated(MatrixKind::Gas, &acc, d, config.threshold)
        })
        .transpose()?;

    let mut scores = Vec::new();
    if let Some(l) = &lower {
        scores.push(ScoreVector::new("lower_sobol", l.indices.clone(), Some(l.se()), false)?);
    }
    if let Some(u) = &upper {
        scores.push(ScoreVector::new("upper_sobol", u.indices.clone(), Some(u.se()), false)?);
    }
    if let Some(v) = &dgsm {
        scores.push(ScoreVector::new("dgsm", v.values.clone(), v.se.clone(), true)?);
    }
    let mut spectra = Vec::new();
    for (sub, label) in [(&active, "alpha"), (&global, "gamma")] {
        if let Some(sub) = sub {
            let m = config.m.unwrap_or(sub.m_selected);
            scores.push(ScoreVector::new(
                &format!("{label}_m"),
                sub.scores(m)?,
                sub.scores_se(m).ok(),
                true,
            )?);
            scores.push(ScoreVector::new(
                &format!("{label}_d"),
                sub.scores(d)?,
                sub.scores_se(d).ok(),
                true,
            )?);
            spectra.push(summarize(sub, m)?);
        }
    }

    let theta_alignment = match (&global, model.ridge_direction()) {
        (Some(g), Some(theta)) => Some(g.alignment(theta)),
        _ => None,
    };
    let meta = ReportMeta {
        model: model.label().to_string(),
        dim: d,
        noise: model.noise_scale(),
        methods: config.methods.iter().copied().collect(),
        n: config.n,
        m1: config.m1,
        m2: config.m2,
        h: config.h,
        threshold: config.threshold,
        m_override: config.m,
        m_as: active.as_ref().map(|a| a.m_selected),
        m_gas: global.as_ref().map(|g| g.m_selected),
        sigma2_hat: upper.as_ref().or(lower.as_ref()).map(|e| e.sigma2),
        seed,
        theta_alignment,
        theta: model.ridge_direction().map(<[f64]>::to_vec),
    };
    Ok(Analysis {
        upper,
        lower,
        dgsm,
        active,
        global,
        report: SensitivityReport {
            meta,
            scores,
            spectra,
            bounds: None,
        },
    })
}

/// Runs the configured estimators and assembles the report.
pub fn analyze(model: &Model, config: &AnalysisConfig) -> Result<SensitivityReport> {
    Ok(run_analysis(model, config)?.report)
}

fn skip(name: &str, reason: impl Into<String>) -> BoundOutcome {
    BoundOutcome::Skipped {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Every bound check applicable to the analysis.
///
/// Subspace bounds run at the selected (or overridden) `m` and, when that is
/// smaller, again at `m = d`. Checks whose estimates are missing or whose
/// hypotheses fail are reported as skipped.
pub fn check_all_bounds(model: &Model, analysis: &Analysis, m: Option<usize>, epsilon: f64) -> Result<Vec<BoundOutcome>> {
    let d = model.dim();
    let mut out = Vec::new();
    let Some(upper) = &analysis.upper else {
        out.push(skip("all", "upper Sobol' indices were not estimated"));
        return Ok(out);
    };

    match &analysis.global {
        Some(gas) => {
            let m_gas = m.unwrap_or(gas.m_selected);
            let ms: Vec<usize> = if m_gas < d { vec![m_gas, d] } else { vec![d] };
            for &k in &ms {
                match check_gas_bound_uniform(upper, gas, model.marginals(), k) {
                    Ok(c) => out.push(BoundOutcome::Checked(c)),
                    Err(Error::Domain(r)) => out.push(skip("gas_uniform", r)),
                    Err(e) => return Err(e),
                }
            }
            for &k in &ms {
                match check_gas_bound_general(upper, gas, model, epsilon, k) {
                    Ok(c) => out.push(BoundOutcome::Checked(c)),
                    Err(Error::Domain(r)) => out.push(skip("gas_bounded", r)),
                    Err(e) => return Err(e),
                }
            }
        }
        None => {
            out.push(skip("gas_uniform", "global activity scores were not estimated"));
            out.push(skip("gas_bounded", "global activity scores were not estimated"));
        }
    }

    let quadratic = matches!(model.builtin_kind(), Some(Builtin::QuadraticNormal { .. })) && !model.is_stochastic();
    if quadratic {
        match &analysis.global {
            Some(g) => out.push(BoundOutcome::Checked(quadratic_identity(upper, g)?)),
            None => out.push(skip("quadratic_identity", "global activity scores were not estimated")),
        }
        match &analysis.active {
            Some(a) => out.push(BoundOutcome::Checked(quadratic_as_bound(upper, a)?)),
            None => out.push(skip("quadratic_as_bound", "activity scores were not estimated")),
        }
    } else {
        out.push(skip("quadratic_identity", "model is not a quadratic in standard normal inputs"));
        out.push(skip("quadratic_as_bound", "model is not a quadratic in standard normal inputs"));
    }

    match &analysis.dgsm {
        Some(v) => {
            let active = analysis
                .active
                .as_ref()
                .map(|a| (a, m.unwrap_or(a.m_selected)));
            out.extend(check_dgsm_bounds(upper, v, active, model)?);
        }
        None => out.push(skip("dgsm", "DGSM was not estimated")),
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyMethod {
    UpperSobol,
    GasScores,
}

impl StudyMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyMethod::UpperSobol => "upper_sobol",
            StudyMethod::GasScores => "gas_scores",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCell {
    pub seed: u64,
    pub scores: Vec<f64>,
    /// One-based input numbers, most important first.
    pub ranking: Vec<usize>,
    pub full_match: bool,
    pub top_k_match: bool,
}

/// Rank agreement with a reference ordering across sample sizes and seeds.
///
/// The seed protocol (consecutive seeds from a base) is this crate's own choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub model: String,
    pub method: StudyMethod,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// One-based reference ranking.
    pub reference: Vec<usize>,
    pub top_k: usize,
    /// Subspace size for score studies.
    pub m: Option<usize>,
    /// `cells[size][seed]`
    pub cells: Vec<Vec<ConvergenceCell>>,
    /// Per size, the fraction of seeds whose full ranking equals the reference.
    pub full_fraction: Vec<f64>,
    /// Per size, the fraction of seeds whose leading `top_k` inputs match in order.
    pub top_k_fraction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Zero-based reference ranking.
    pub reference: Vec<usize>,
    pub top_k: usize,
    /// Subspace size for score studies; `None` means all `d` eigenpairs.
    pub m: Option<usize>,
}

fn estimate_scores(model: &Model, method: StudyMethod, n: usize, seed: u64, m: Option<usize>) -> Result<Vec<f64>> {
    match method {
        StudyMethod::UpperSobol => Ok(upper_sobol(model, n, &RngStream::new(seed, UPPER_STREAM))?.indices),
        StudyMethod::GasScores => {
            let acc = finite_slope_outer_products(model, n, 1, &RngStream::new(seed, GAS_STREAM))?;
            let sub = SubspaceResult::from_accumulated(MatrixKind::Gas, &acc, model.dim(), DEFAULT_THRESHOLD)?;
            sub.scores(m.unwrap_or(model.dim()))
        }
    }
}

fn is_permutation(p: &[usize], d: usize) -> bool {
    let mut seen = vec![false; d];
    p.len() == d && p.iter().all(|&i| i < d && !std::mem::replace(&mut seen[i], true))
}

/// Runs `method` at every size and seed with `M1 = N`, `M2 = 1`.
pub fn convergence_study(model: &Model, method: StudyMethod, config: &StudyConfig) -> Result<ConvergenceTable> {
    let d = model.dim();
    if config.sizes.is_empty() {
        return Err(Error::InvalidInput("sizes must not be empty".into()));
    }
    if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("sizes must be strictly increasing".into()));
    }
    if config.seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    if !is_permutation(&config.reference, d) {
        return Err(Error::InvalidInput(format!("reference must be a permutation of 0..{d}")));
    }
    if config.top_k == 0 || config.top_k > d {
        return Err(Error::InvalidInput(format!("top_k must be in 1..={d}")));
    }
    let k = config.top_k;
    let mut cells = Vec::with_capacity(config.sizes.len());
    let mut full_fraction = Vec::new();
    let mut top_k_fraction = Vec::new();
    for &n in &config.sizes {
        let row = config
            .seeds
            .iter()
            .map(|&seed| {
                let scores = estimate_scores(model, method, n, seed, config.m)?;
                let order = rank(&scores);
                Ok(ConvergenceCell {
                    seed,
                    full_match: order == config.reference,
                    top_k_match: order[..k] == config.reference[..k],
                    ranking: order.iter().map(|i| i + 1).collect(),
                    scores,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let s = row.len() as f64;
        full_fraction.push(row.iter().filter(|c| c.full_match).count() as f64 / s);
        top_k_fraction.push(row.iter().filter(|c| c.top_k_match).count() as f64 / s);
        cells.push(row);
    }
    Ok(ConvergenceTable {
        model: model.label().to_string(),
        method,
        sizes: config.sizes.clone(),
        seeds: config.seeds.clone(),
        reference: config.reference.iter().map(|i| i + 1).collect(),
        top_k: k,
        m: match method {
            StudyMethod::GasScores => Some(config.m.unwrap_or(d)),
            StudyMethod::UpperSobol => None,
        },
        cells,
        full_fraction,
        top_k_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    #[test]
    fn normalize_examples() {
        let n = normalize(&[2.0, 3.0, 5.0]).unwrap().unwrap();
        assert!((n[0] - 0.2).abs() < 1e-15 && (n[1] - 0.3).abs() < 1e-15 && (n[2] - 0.5).abs() < 1e-15);
        assert_eq!(normalize(&[0.0, 0.0, 0.0]).unwrap(), None);
        assert!(normalize(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[0.1, 0.9, 0.5]), vec![1, 2, 0]);
        assert_eq!(rank(&[1.0; 4]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn method_parsing() {
        assert_eq!(parse_methods("all").unwrap().len(), 5);
        let s = parse_methods("gas, upper_sobol").unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![Method::UpperSobol, Method::Gas]);
        assert!(parse_methods("").is_err());
        assert!(parse_methods("gas,nope").is_err());
    }

    #[test]
    fn example1_reference_permutation() {
        let r = reference_ranking(&Model::example1(0.0).unwrap()).unwrap();
        assert_eq!(r, vec![9, 8, 7, 6, 5, 4, 3, 1, 0, 2]);
    }

    #[test]
    fn report_scores_normalized_except_sobol() {
        let m = Model::example4().unwrap();
        let cfg = AnalysisConfig {
            n: 2000,
            m1: 2000,
            ..Default::default()
        };
        let r = analyze(&m, &cfg).unwrap();
        let names: Vec<&str> = r.scores.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["lower_sobol", "upper_sobol", "dgsm", "alpha_m", "alpha_d", "gamma_m", "gamma_d"]
        );
        for s in &r.scores {
            match s.name.as_str() {
                "lower_sobol" | "upper_sobol" => assert!(s.normalized.is_none()),
                _ => {
                    let total: f64 = s.normalized.as_ref().unwrap().iter().sum();
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
            let mut sorted = s.ranking.clone();
            sorted.sort();
            assert_eq!(sorted, vec![1, 2, 3, 4]);
        }
        assert_eq!(r.spectra.len(), 2);
        assert_eq!(r.meta.m_gas, Some(2));
        assert_eq!(r, analyze(&m, &cfg).unwrap());
    }

    #[test]
    fn methods_use_independent_streams() {
        let m = Model::example4().unwrap();
        let all = analyze(&m, &AnalysisConfig { n: 500, m1: 500, ..Default::default() }).unwrap();
        let only = analyze(
            &m,
            &AnalysisConfig {
                n: 500,
                m1: 500,
                methods: [Method::Gas].into_iter().collect(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(all.score("gamma_d"), only.score("gamma_d"));
        assert!(only.score("upper_sobol").is_none());
    }

    #[test]
    fn bad_config_rejected() {
        let m = Model::example4().unwrap();
        for cfg in [
            AnalysisConfig { m: Some(5), ..Default::default() },
            AnalysisConfig { n: 3, ..Default::default() },
            AnalysisConfig { threshold: 1.0, ..Default::default() },
            AnalysisConfig { methods: BTreeSet::new(), ..Default::default() },
        ] {
            assert!(analyze(&m, &cfg).is_err());
        }
    }

    #[test]
    fn bounds_for_quadratic_include_identity() {
        let m = Model::quadratic_normal(SymMatrix::from_diagonal(&[2.0, 0.0]), vec![0.0, 1.0]).unwrap();
        let a = run_analysis(&m, &AnalysisConfig { n: 20_000, m1: 20_000, ..Default::default() }).unwrap();
        let b = check_all_bounds(&m, &a, None, 0.01).unwrap();
        let eq = b.iter().find(|o| o.name() == "quadratic_identity").unwrap();
        assert!(eq.check().unwrap().passed(), "{eq:?}");
        assert!(b.iter().any(|o| o.name() == "gas_uniform" && o.check().is_none()));
    }

    #[test]
    fn convergence_on_linear_model() {
        let m = Model::linear_unit((1..=5).map(f64::from).collect()).unwrap();
        let reference = reference_ranking(&m).unwrap();
        let cfg = StudyConfig {
            sizes: vec![10, 1000],
            seeds: (0..5).collect(),
            reference,
            top_k: 3,
            m: None,
        };
        let t = convergence_study(&m, StudyMethod::GasScores, &cfg).unwrap();
        // Slopes of a linear model are exact, so every run ranks correctly.
        assert_eq!(t.full_fraction, vec![1.0, 1.0]);
        assert_eq!(t.reference, vec![5, 4, 3, 2, 1]);
        let bad = StudyConfig { sizes: vec![], ..cfg.clone() };
        assert!(convergence_study(&m, StudyMethod::UpperSobol, &bad).is_err());
        let bad = StudyConfig { sizes: vec![100, 10], ..cfg.clone() };
        assert!(convergence_study(&m, StudyMethod::UpperSobol, &bad).is_err());
        let bad = StudyConfig { reference: vec![0, 0, 1, 2, 3], ..cfg };
        assert!(convergence_study(&m, StudyMethod::UpperSobol, &bad).is_err());
    }
}
