//! Numerical checks of the inequalities and identities linking Sobol' indices,
//! DGSM, activity scores and global activity scores.
//!
//! Every check compares Monte Carlo estimates, so a verdict allows a slack of
//! [`TOLERANCE_SE`] combined standard errors, where the combined error is
//! `sqrt(se_lhs^2 + se_rhs^2)` from batch means.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dgsm::{DgsmEstimate, DEFAULT_H, GRADIENT_STREAM};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, DEFAULT_THRESHOLD};
use crate::models::Model;
use crate::randkit::{InputDistribution, RngStream};
use crate::subspace::{active_subspace, global_active_subspace, SubspaceResult, GAS_STREAM};
use crate::variance::{upper_sobol, IndexEstimate, UPPER_STREAM};

/// Allowed violation, in combined standard errors.
pub const TOLERANCE_SE: f64 = 5.0;

/// Default tail mass for the bounded-function check.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `rhs - lhs >= -tolerance`.
    Inequality,
    /// Passes when `|rhs - lhs| <= tolerance`.
    Equality,
}

/// Per-input comparison of two estimated quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs - lhs`
    pub slack: Vec<f64>,
    /// [`TOLERANCE_SE`] times the combined standard error, per input.
    pub tolerance: Vec<f64>,
    pub pass: Vec<bool>,
    /// Constants used by the check (`m`, `kappa`, interval ends, ...).
    pub params: BTreeMap<String, f64>,
}

impl BoundCheck {
    pub fn new(
        name: &str,
        kind: CheckKind,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        se_lhs: &[f64],
        se_rhs: &[f64],
    ) -> Self {
        let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
        let tolerance: Vec<f64> = se_lhs
            .iter()
            .zip(se_rhs)
            .map(|(a, b)| TOLERANCE_SE * (a * a + b * b).sqrt())
            .collect();
        let pass = slack
            .iter()
            .zip(&tolerance)
            .map(|(&s, &t)| match kind {
                CheckKind::Inequality => s >= -t,
                CheckKind::Equality => s.abs() <= t,
            })
            .collect();
        Self {
            name: name.to_string(),
            kind,
            lhs,
            rhs,
            slack,
            tolerance,
            pass,
            params: BTreeMap::new(),
        }
    }

    fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }

    /// `|rhs - lhs| / |rhs|` per input (absolute residual where `rhs = 0`).
    pub fn relative_residuals(&self) -> Vec<f64> {
        self.slack
            .iter()
            .zip(&self.rhs)
            .map(|(s, r)| if *r != 0.0 { (s / r).abs() } else { s.abs() })
            .collect()
    }
}

/// A check that ran, or one whose hypotheses the model does not meet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundOutcome {
    Checked(BoundCheck),
    Skipped { name: String, reason: String },
}

impl BoundOutcome {
    pub fn name(&self) -> &str {
        match self {
            BoundOutcome::Checked(c) => &c.name,
            BoundOutcome::Skipped { name, .. } => name,
        }
    }

    pub fn check(&self) -> Option<&BoundCheck> {
        match self {
            BoundOutcome::Checked(c) => Some(c),
            BoundOutcome::Skipped { .. } => None,
        }
    }
}

fn scaled(v: &[f64], factor: f64) -> Vec<f64> {
    v.iter().map(|x| x * factor).collect()
}

/// `(a, b)` when every marginal is the same uniform law.
fn common_uniform(marginals: &[InputDistribution]) -> Option<(f64, f64)> {
    match marginals.first()? {
        &InputDistribution::Uniform { lower, upper } if marginals.iter().all(|m| *m == marginals[0]) => {
            Some((lower, upper))
        }
        _ => None,
    }
}

fn upper_se(upper: &IndexEstimate) -> Vec<f64> {
    upper.se()
}

/// `S_i <= (b - a)^2 (gamma_i(m) + [m < d] lambda_{m+1}) / (2 sigma^2)` for
/// inputs sharing one uniform law on `(a, b)`.
///
/// On the unit cube the factor `(b - a)^2` is 1.
pub fn check_gas_bound_uniform(
    upper: &IndexEstimate,
    gas: &SubspaceResult,
    marginals: &[InputDistribution],
    m: usize,
) -> Result<BoundCheck> {
    let (a, b) = common_uniform(marginals).ok_or_else(|| {
        Error::Domain("the uniform bound needs identical uniform marginals".into())
    })?;
    let factor = (b - a).powi(2) / (2.0 * upper.sigma2);
    let rhs = scaled(&gas.bound_terms(m)?, factor);
    let se_rhs = scaled(&gas.bound_terms_se(m)?, factor);
    Ok(BoundCheck::new(
        "gas_uniform",
        CheckKind::Inequality,
        upper.indices.clone(),
        rhs,
        &upper_se(upper),
        &se_rhs,
    )
    .with_param("m", m as f64))
}

/// Symmetric interval `(a', b')` carrying mass `1 - epsilon` under the product law.
///
/// Each coordinate gets coverage `(1 - epsilon)^(1/d)`, centered on the
/// median (both supported families are symmetric).
pub fn truncation_interval(marginal: &InputDistribution, d: usize, epsilon: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon must be in (0, 0.5), got {epsilon}")));
    }
    // 1 - (1 - eps)^(1/d) without cancellation
    let outside = -((-epsilon).ln_1p() / d as f64).exp_m1();
    let tail = 0.5 * outside;
    let a_prime = marginal.inverse_cdf(tail)?;
    Ok((a_prime, 2.0 * marginal.median() - a_prime))
}

/// `kappa = (2 eps - eps^2) / (b' - a')^2 * (max f - min f)^2`.
pub fn kappa(epsilon: f64, a_prime: f64, b_prime: f64, output_range: (f64, f64)) -> f64 {
    let spread = output_range.1 - output_range.0;
    (2.0 * epsilon - epsilon * epsilon) / (b_prime - a_prime).powi(2) * spread * spread
}

/// Bound for bounded functions under identical marginals:
/// `S_i <= ((b' - a')^2 / 2) (gamma_i(m) + [m < d] lambda_{m+1} + kappa) / sigma^2`.
pub fn check_gas_bound_general(
    upper: &IndexEstimate,
    gas: &SubspaceResult,
    model: &Model,
    epsilon: f64,
    m: usize,
) -> Result<BoundCheck> {
    let range = model
        .output_range()
        .ok_or_else(|| Error::Domain("the bounded-function check needs a model with a known output range".into()))?;
    let marginals = model.marginals();
    if marginals.iter().any(|x| *x != marginals[0]) {
        return Err(Error::Domain("the bounded-function check needs identical marginals".into()));
    }
    let (a_prime, b_prime) = truncation_interval(&marginals[0], model.dim(), epsilon)?;
    let kappa = kappa(epsilon, a_prime, b_prime, range);
    let factor = 0.5 * (b_prime - a_prime).powi(2) / upper.sigma2;
    let rhs = gas.bound_terms(m)?.iter().map(|t| (t + kappa) * factor).collect();
    let se_rhs = scaled(&gas.bound_terms_se(m)?, factor);
    Ok(BoundCheck::new(
        "gas_bounded",
        CheckKind::Inequality,
        upper.indices.clone(),
        rhs,
        &upper_se(upper),
        &se_rhs,
    )
    .with_param("m", m as f64)
    .with_param("epsilon", epsilon)
    .with_param("a_prime", a_prime)
    .with_param("b_prime", b_prime)
    .with_param("kappa", kappa))
}

/// `sigma^2 S_i = gamma_i(d)`, the equality for quadratics in normal inputs.
///
/// Compared unnormalized: the pick-freeze numerator against the full score.
pub fn quadratic_identity(upper: &IndexEstimate, gas: &SubspaceResult) -> Result<BoundCheck> {
    let d = gas.dim();
    Ok(BoundCheck::new(
        "quadratic_identity",
        CheckKind::Equality,
        upper.numerators.clone(),
        gas.scores(d)?,
        &upper.numerator_se,
        &gas.scores_se(d)?,
    ))
}

/// `sigma^2 S_i <= alpha_i(d)` for quadratics in normal inputs.
pub fn quadratic_as_bound(upper: &IndexEstimate, as_: &SubspaceResult) -> Result<BoundCheck> {
    let d = as_.dim();
    Ok(BoundCheck::new(
        "quadratic_as_bound",
        CheckKind::Inequality,
        upper.numerators.clone(),
        as_.scores(d)?,
        &upper.numerator_se,
        &as_.scores_se(d)?,
    ))
}

/// Both quadratic checks for `z^T A z / 2 + b^T z` with `n` samples per estimator.
///
/// Returns the equality check followed by the gradient-score inequality.
pub fn check_quadratic_identity(a: &SymMatrix, b: &[f64], n: usize, seed: u64) -> Result<[BoundCheck; 2]> {
    let model = Model::quadratic_normal(a.clone(), b.to_vec())?;
    let upper = upper_sobol(&model, n, &RngStream::new(seed, UPPER_STREAM))?;
    let gas = global_active_subspace(&model, n, 1, DEFAULT_THRESHOLD, &RngStream::new(seed, GAS_STREAM))?;
    let as_ = active_subspace(&model, n, DEFAULT_H, DEFAULT_THRESHOLD, &RngStream::new(seed, GRADIENT_STREAM))?;
    Ok([quadratic_identity(&upper, &gas)?, quadratic_as_bound(&upper, &as_)?])
}

fn skipped(name: &str, reason: &str) -> BoundOutcome {
    BoundOutcome::Skipped {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

fn uniform_widths(marginals: &[InputDistribution]) -> Option<Vec<f64>> {
    marginals
        .iter()
        .map(|m| match *m {
            InputDistribution::Uniform { lower, upper } => Some(upper - lower),
            _ => None,
        })
        .collect()
}

/// The derivative-based bounds, each run only where its hypotheses hold:
///
/// * `dgsm_linear`: `S_i = w_i^2 v_i / (12 sigma^2)` for noiseless models affine
///   in each input, with uniform inputs of width `w_i`;
/// * `dgsm_poincare`: `S_i <= w_i^2 v_i / (pi^2 sigma^2)` for uniform inputs;
/// * `dgsm_cheeger`: `S_i <= D(F_i) v_i / sigma^2` for any marginals;
/// * `as_poincare`, `as_cheeger`: the same two with `v_i` replaced by
///   `alpha_i(m) + [m < d] lambda_{m+1}`, when a gradient subspace is given.
pub fn check_dgsm_bounds(
    upper: &IndexEstimate,
    dgsm: &DgsmEstimate,
    as_: Option<(&SubspaceResult, usize)>,
    model: &Model,
) -> Result<Vec<BoundOutcome>> {
    let marginals = model.marginals();
    let se_v = dgsm.se.clone().ok_or(Error::TooFewReplicates {
        needed: crate::mc::BATCHES,
        got: dgsm.n,
    })?;
    let inv_s2 = 1.0 / upper.sigma2;
    let se_l = upper_se(upper);
    let widths = uniform_widths(marginals);
    let cheeger: Vec<f64> = marginals.iter().map(|m| m.cheeger_constant()).collect();
    let weighted = |values: &[f64], w: &[f64]| -> Vec<f64> {
        values.iter().zip(w).map(|(v, c)| v * c * inv_s2).collect()
    };
    let mut out = Vec::new();

    match &widths {
        Some(w) if model.is_multilinear() => {
            let c: Vec<f64> = w.iter().map(|w| w * w / 12.0).collect();
            out.push(BoundOutcome::Checked(BoundCheck::new(
                "dgsm_linear",
                CheckKind::Equality,
                upper.indices.clone(),
                weighted(&dgsm.values, &c),
                &se_l,
                &weighted(&se_v, &c),
            )));
        }
        Some(_) => out.push(skipped("dgsm_linear", "model is not affine in each input")),
        None => out.push(skipped("dgsm_linear", "needs uniform marginals")),
    }

    let poincare: Option<Vec<f64>> = widths.map(|w| w.iter().map(|w| w * w / (PI * PI)).collect());
    match &poincare {
        Some(c) => out.push(BoundOutcome::Checked(BoundCheck::new(
            "dgsm_poincare",
            CheckKind::Inequality,
            upper.indices.clone(),
            weighted(&dgsm.values, c),
            &se_l,
            &weighted(&se_v, c),
        ))),
        None => out.push(skipped("dgsm_poincare", "needs uniform marginals")),
    }

    out.push(BoundOutcome::Checked(BoundCheck::new(
        "dgsm_cheeger",
        CheckKind::Inequality,
        upper.indices.clone(),
        weighted(&dgsm.values, &cheeger),
        &se_l,
        &weighted(&se_v, &cheeger),
    )));

    match as_ {
        Some((sub, m)) => {
            let terms = sub.bound_terms(m)?;
            let terms_se = sub.bound_terms_se(m)?;
            match &poincare {
                Some(c) => out.push(BoundOutcome::Checked(
                    BoundCheck::new(
                        "as_poincare",
                        CheckKind::Inequality,
                        upper.indices.clone(),
                        weighted(&terms, c),
                        &se_l,
                        &weighted(&terms_se, c),
                    )
                    .with_param("m", m as f64),
                )),
                None => out.push(skipped("as_poincare", "needs uniform marginals")),
            }
            out.push(BoundOutcome::Checked(
                BoundCheck::new(
                    "as_cheeger",
                    CheckKind::Inequality,
                    upper.indices.clone(),
                    weighted(&terms, &cheeger),
                    &se_l,
                    &weighted(&terms_se, &cheeger),
                )
                .with_param("m", m as f64),
            ));
        }
        None => {
            out.push(skipped("as_poincare", "no gradient subspace estimated"));
            out.push(skipped("as_cheeger", "no gradient subspace estimated"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgsm::dgsm;
    use crate::randkit::normal_cdf;

    #[test]
    fn verdict_rules() {
        let c = BoundCheck::new(
            "t",
            CheckKind::Inequality,
            vec![1.0, 1.0, 1.0],
            vec![2.0, 0.9, 0.5],
            &[0.01; 3],
            &[0.0; 3],
        );
        assert_eq!(c.pass, vec![true, false, false]);
        let c = BoundCheck::new("t", CheckKind::Inequality, vec![1.0], vec![0.96], &[0.006], &[0.008]);
        // tolerance 5 * 0.01
        assert!(c.passed());
        let e = BoundCheck::new("e", CheckKind::Equality, vec![1.0, 1.0], vec![1.04, 1.2], &[0.01; 2], &[0.0; 2]);
        assert_eq!(e.pass, vec![true, false]);
    }

    #[test]
    fn truncation_interval_for_ten_normals() {
        let (a, b) = truncation_interval(&InputDistribution::standard_normal(), 10, 0.01).unwrap();
        assert_eq!(a, -b);
        // Per-dimension mass (0.99)^(1/10).
        let mass = normal_cdf(b) - normal_cdf(a);
        assert!((mass - 0.99f64.powf(0.1)).abs() < 1e-14);
        assert!((b - 3.29).abs() < 0.005, "{b}");
        let k = kappa(0.01, a, b, (0.0, 1.0));
        assert!((k - 4.6e-4).abs() < 5e-6, "{k}");
    }

    #[test]
    fn epsilon_guard() {
        let n = InputDistribution::standard_normal();
        assert!(matches!(truncation_interval(&n, 10, 0.5), Err(Error::Domain(_))));
        assert!(matches!(truncation_interval(&n, 10, 0.0), Err(Error::Domain(_))));
        assert!(matches!(truncation_interval(&n, 10, 0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn single_input_linear_uniform_slack() {
        // f = x_1 on the unit cube: S = 1, gamma(d) / (2 sigma^2) = 1 / (2/12) = 6.
        let m = Model::linear_unit(vec![1.0]).unwrap();
        let upper = upper_sobol(&m, 10_000, &RngStream::new(1, UPPER_STREAM)).unwrap();
        let gas = global_active_subspace(&m, 1000, 1, 0.9, &RngStream::new(1, GAS_STREAM)).unwrap();
        let c = check_gas_bound_uniform(&upper, &gas, m.marginals(), 1).unwrap();
        assert!(c.passed());
        assert!((c.lhs[0] - 1.0).abs() < 0.05);
        assert!((c.rhs[0] - 6.0).abs() < 0.2, "{c:?}");
        assert!((c.slack[0] - 5.0).abs() < 0.2);
    }

    #[test]
    fn uniform_bound_rejects_normal_inputs() {
        let m = Model::example2().unwrap();
        let upper = upper_sobol(&m, 100, &RngStream::new(1, 1)).unwrap();
        let gas = global_active_subspace(&m, 100, 1, 0.9, &RngStream::new(1, 4)).unwrap();
        assert!(matches!(
            check_gas_bound_uniform(&upper, &gas, m.marginals(), 1),
            Err(Error::Domain(_))
        ));
        let lin = Model::linear_unit(vec![1.0; 10]).unwrap();
        assert!(matches!(
            check_gas_bound_general(&upper, &gas, &lin, 0.01, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quadratic_oracle_case() {
        let a = SymMatrix::from_diagonal(&[2.0, 0.0]);
        let [eq, as_] = check_quadratic_identity(&a, &[0.0, 1.0], 100_000, 5).unwrap();
        assert!(eq.passed(), "{eq:?}");
        assert!(as_.passed(), "{as_:?}");
        assert!((eq.rhs[0] - 2.0).abs() < 0.04 && (eq.rhs[1] - 1.0).abs() < 0.02, "{eq:?}");
    }

    #[test]
    fn linear_dgsm_identity_and_skips() {
        let m = Model::linear_unit(vec![1.0, 2.0, 3.0]).unwrap();
        let upper = upper_sobol(&m, 20_000, &RngStream::new(2, UPPER_STREAM)).unwrap();
        let v = dgsm(&m, 100, DEFAULT_H, &RngStream::new(2, GRADIENT_STREAM)).unwrap();
        let out = check_dgsm_bounds(&upper, &v, None, &m).unwrap();
        let names: Vec<&str> = out.iter().map(|o| o.name()).collect();
        assert_eq!(
            names,
            vec!["dgsm_linear", "dgsm_poincare", "dgsm_cheeger", "as_poincare", "as_cheeger"]
        );
        for o in &out[..3] {
            assert!(o.check().unwrap().passed(), "{o:?}");
        }
        assert!(out[3].check().is_none());

        let q = Model::quadratic_normal(SymMatrix::from_diagonal(&[1.0, 0.5]), vec![0.2, 0.0]).unwrap();
        let upper = upper_sobol(&q, 20_000, &RngStream::new(2, UPPER_STREAM)).unwrap();
        let v = dgsm(&q, 20_000, DEFAULT_H, &RngStream::new(2, GRADIENT_STREAM)).unwrap();
        let out = check_dgsm_bounds(&upper, &v, None, &q).unwrap();
        assert!(out[0].check().is_none() && out[1].check().is_none());
        assert!(out[2].check().unwrap().passed());
    }
}
