//! Models under analysis: dimension, marginals, evaluation map and optional
//! additive noise, plus the built-in benchmark functions and their closed-form
//! ANOVA variances.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::randkit::{normal_quantile, InputDistribution, RngStream};

/// Ridge direction of the discontinuous benchmark, as printed to three decimals.
/// It is renormalized to unit length when the model is built.
pub const EXAMPLE2_THETA: [f64; 10] = [
    0.143, 0.708, 0.491, -0.297, -0.124, 0.248, 0.058, -0.032, 0.131, -0.227,
];

/// `E[(x - 1/2)^10]` for `x ~ U(0, 1)`.
const CENTERED_UNIFORM_TENTH_MOMENT: f64 = 1.0 / 11_264.0;

/// One term `coefficient * prod_i x_i^powers[i]` of a polynomial model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: f64, powers: Vec<u32>) -> Self {
        Self {
            coefficient,
            powers,
        }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(z)
            .fold(self.coefficient, |acc, (&p, &x)| acc * x.powi(p as i32))
    }
}

/// The closed-form families shipped with the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `sum_i i z_i + 10 (z_1 z_2 - z_9 z_10)` on `U(-1/2, 1/2)^10`.
    Example1,
    /// `1{theta^T z > 0}` under standard normal inputs.
    Example2 { theta: Vec<f64> },
    /// `sum_i c_i (x_i - 1/2) + c12 (x_1 - 1/2)(x_2 - 1/2)^5` on `U(0, 1)^4`.
    Example4 { c: [f64; 4], c12: f64 },
    Linear { coefficients: Vec<f64> },
    /// `z^T A z / 2 + b^T z` under standard normal inputs.
    QuadraticNormal { a: SymMatrix, b: Vec<f64> },
    Polynomial { terms: Vec<Monomial> },
    Constant { value: f64 },
}

/// Names by which built-ins are addressed from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    Example1,
    Example2,
    Example4,
    Linear,
    QuadraticNormal,
}

impl BuiltinName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BuiltinName::Example1 => "example1",
            BuiltinName::Example2 => "example2",
            BuiltinName::Example4 => "example4",
            BuiltinName::Linear => "linear",
            BuiltinName::QuadraticNormal => "quadratic_normal",
        }
    }
}

/// Optional parameters for [`make_builtin`]; unset fields take the family default.
#[derive(Clone, Debug, Default)]
pub struct BuiltinParams {
    /// Additive noise scale `k` (example1 only).
    pub noise: f64,
    pub theta: Option<Vec<f64>>,
    /// Linear coefficients, or example4's `c_1..c_4`.
    pub coefficients: Option<Vec<f64>>,
    pub c12: Option<f64>,
    pub a: Option<SymMatrix>,
    pub b: Option<Vec<f64>>,
    /// Marginals for the linear family (default `U(0, 1)`).
    pub marginals: Option<Vec<InputDistribution>>,
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Builtin(Builtin),
    Custom(EvalFn),
}

/// A real-valued function of `d` independent random inputs.
#[derive(Clone)]
pub struct Model {
    label: String,
    marginals: Vec<InputDistribution>,
    kind: Kind,
    noise: Option<f64>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind: &dyn fmt::Debug = match &self.kind {
            Kind::Builtin(b) => b,
            Kind::Custom(_) => &"<custom>",
        };
        f.debug_struct("Model")
            .field("label", &self.label)
            .field("marginals", &self.marginals)
            .field("kind", kind)
            .field("noise", &self.noise)
            .finish()
    }
}

fn validate_marginals(marginals: &[InputDistribution]) -> Result<()> {
    if marginals.is_empty() {
        return Err(Error::InvalidInput("a model needs at least one input".into()));
    }
    marginals.iter().try_for_each(|m| m.validate())
}

impl Model {
    fn builtin(label: impl Into<String>, marginals: Vec<InputDistribution>, b: Builtin) -> Result<Self> {
        validate_marginals(&marginals)?;
        Ok(Self {
            label: label.into(),
            marginals,
            kind: Kind::Builtin(b),
            noise: None,
        })
    }

    /// A model backed by an arbitrary closure. No analytic oracle is available.
    pub fn from_fn<F>(label: impl Into<String>, marginals: Vec<InputDistribution>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        validate_marginals(&marginals)?;
        Ok(Self {
            label: label.into(),
            marginals,
            kind: Kind::Custom(Arc::new(f)),
            noise: None,
        })
    }

    /// Noisy benchmark with inputs on `U(-1/2, 1/2)^10`; `noise` is the scale `k`.
    pub fn example1(noise: f64) -> Result<Self> {
        let marginals = vec![InputDistribution::uniform(-0.5, 0.5)?; 10];
        Self::builtin("example1", marginals, Builtin::Example1)?.with_noise(noise)
    }

    /// Discontinuous ridge indicator with the default ten-dimensional direction.
    pub fn example2() -> Result<Self> {
        Self::example2_with_theta(&EXAMPLE2_THETA)
    }

    /// Ridge indicator along `theta`, which is rescaled to unit length.
    pub fn example2_with_theta(theta: &[f64]) -> Result<Self> {
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("theta must be a nonzero finite vector".into()));
        }
        let theta: Vec<f64> = theta.iter().map(|t| t / norm).collect();
        let marginals = vec![InputDistribution::standard_normal(); theta.len()];
        Self::builtin("example2", marginals, Builtin::Example2 { theta })
    }

    pub fn example4() -> Result<Self> {
        Self::example4_with([1.0; 4], 50.0)
    }

    pub fn example4_with(c: [f64; 4], c12: f64) -> Result<Self> {
        if c.iter().chain(std::iter::once(&c12)).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("example4 coefficients must be finite".into()));
        }
        let marginals = vec![InputDistribution::unit_uniform(); 4];
        Self::builtin("example4", marginals, Builtin::Example4 { c, c12 })
    }

    /// `sum_i c_i x_i` over the given marginals.
    pub fn linear(coefficients: Vec<f64>, marginals: Vec<InputDistribution>) -> Result<Self> {
        if coefficients.len() != marginals.len() {
            return Err(Error::DimensionMismatch {
                expected: marginals.len(),
                got: coefficients.len(),
            });
        }
        Self::builtin("linear", marginals, Builtin::Linear { coefficients })
    }

    /// `sum_i c_i x_i` on the unit cube.
    pub fn linear_unit(coefficients: Vec<f64>) -> Result<Self> {
        let d = coefficients.len();
        Self::linear(coefficients, vec![InputDistribution::unit_uniform(); d])
    }

    /// `z^T A z / 2 + b^T z` with standard normal inputs.
    pub fn quadratic_normal(a: SymMatrix, b: Vec<f64>) -> Result<Self> {
        if a.dim() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.len(),
            });
        }
        let marginals = vec![InputDistribution::standard_normal(); b.len()];
        Self::builtin("quadratic_normal", marginals, Builtin::QuadraticNormal { a, b })
    }

    pub fn polynomial(terms: Vec<Monomial>, marginals: Vec<InputDistribution>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.powers.len() != marginals.len()) {
            return Err(Error::DimensionMismatch {
                expected: marginals.len(),
                got: t.powers.len(),
            });
        }
        Self::builtin("polynomial", marginals, Builtin::Polynomial { terms })
    }

    pub fn constant(value: f64, marginals: Vec<InputDistribution>) -> Result<Self> {
        Self::builtin("constant", marginals, Builtin::Constant { value })
    }

    /// Adds `k * eps`, `eps ~ N(0, 1)` drawn fresh on every evaluation. `k = 0` removes noise.
    pub fn with_noise(mut self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidInput(format!("noise scale must be >= 0, got {k}")));
        }
        self.noise = (k > 0.0).then_some(k);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[InputDistribution] {
        &self.marginals
    }

    pub fn noise_scale(&self) -> Option<f64> {
        self.noise
    }

    pub fn is_stochastic(&self) -> bool {
        self.noise.is_some()
    }

    pub fn builtin_kind(&self) -> Option<&Builtin> {
        match &self.kind {
            Kind::Builtin(b) => Some(b),
            Kind::Custom(_) => None,
        }
    }

    /// Unit ridge direction for the indicator benchmark.
    pub fn ridge_direction(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Builtin(Builtin::Example2 { theta }) => Some(theta),
            _ => None,
        }
    }

    /// Declared `(min, max)` of the output, known only for bounded built-ins.
    pub fn output_range(&self) -> Option<(f64, f64)> {
        if self.noise.is_some() {
            return None;
        }
        match &self.kind {
            Kind::Builtin(Builtin::Example2 { .. }) => Some((0.0, 1.0)),
            Kind::Builtin(Builtin::Constant { value }) => Some((*value, *value)),
            _ => None,
        }
    }

    /// Whether the noiseless map is affine in each coordinate separately.
    pub fn is_multilinear(&self) -> bool {
        if self.noise.is_some() {
            return false;
        }
        match &self.kind {
            Kind::Builtin(b) => match b {
                Builtin::Example1 | Builtin::Linear { .. } | Builtin::Constant { .. } => true,
                Builtin::Polynomial { terms } => {
                    terms.iter().all(|t| t.powers.iter().all(|&p| p <= 1))
                }
                Builtin::QuadraticNormal { a, .. } => a.diagonal().iter().all(|&x| x == 0.0),
                Builtin::Example2 { .. } | Builtin::Example4 { .. } => false,
            },
            Kind::Custom(_) => false,
        }
    }

    /// The noiseless map `f(z)`; `z.len()` is assumed to equal `dim()`.
    #[inline]
    pub fn eval_clean(&self, z: &[f64]) -> f64 {
        match &self.kind {
            Kind::Custom(f) => f(z),
            Kind::Builtin(b) => match b {
                Builtin::Example1 => {
                    let linear: f64 = z.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
                    linear + 10.0 * (z[0] * z[1] - z[8] * z[9])
                }
                Builtin::Example2 { theta } => {
                    let s: f64 = theta.iter().zip(z).map(|(t, x)| t * x).sum();
                    if s > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Builtin::Example4 { c, c12 } => {
                    let centered: f64 = c.iter().zip(z).map(|(ci, x)| ci * (x - 0.5)).sum();
                    centered + c12 * (z[0] - 0.5) * (z[1] - 0.5).powi(5)
                }
                Builtin::Linear { coefficients } => {
                    coefficients.iter().zip(z).map(|(c, x)| c * x).sum()
                }
                Builtin::QuadraticNormal { a, b } => {
                    0.5 * a.quadratic_form(z) + b.iter().zip(z).map(|(bi, x)| bi * x).sum::<f64>()
                }
                Builtin::Polynomial { terms } => terms.iter().map(|t| t.eval(z)).sum(),
                Builtin::Constant { value } => *value,
            },
        }
    }

    /// `f(z)`, plus `k * eps` with `eps` drawn from `noise` when the model is stochastic.
    pub fn evaluate(&self, z: &[f64], noise: Option<&mut RngStream>) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let clean = self.eval_clean(z);
        match (self.noise, noise) {
            (None, _) => Ok(clean),
            (Some(k), Some(rng)) => Ok(clean + k * normal_quantile(rng.next_open01())),
            (Some(_), None) => Err(Error::InvalidInput(
                "stochastic model evaluated without a noise stream".into(),
            )),
        }
    }

    /// Draws one input point from the product of marginals.
    pub fn sample_point(&self, rng: &mut RngStream) -> Vec<f64> {
        self.marginals.iter().map(|m| m.sample_one(rng)).collect()
    }

    /// The point of marginal medians.
    pub fn center(&self) -> Vec<f64> {
        self.marginals.iter().map(|m| m.median()).collect()
    }
}

/// Builds a named built-in with optional parameter overrides.
pub fn make_builtin(name: BuiltinName, params: &BuiltinParams) -> Result<Model> {
    match name {
        BuiltinName::Example1 => Model::example1(params.noise),
        BuiltinName::Example2 => match &params.theta {
            Some(theta) => Model::example2_with_theta(theta),
            None => Model::example2(),
        },
        BuiltinName::Example4 => {
            let c = match &params.coefficients {
                Some(c) => <[f64; 4]>::try_from(c.as_slice()).map_err(|_| Error::DimensionMismatch {
                    expected: 4,
                    got: c.len(),
                })?,
                None => [1.0; 4],
            };
            Model::example4_with(c, params.c12.unwrap_or(50.0))
        }
        BuiltinName::Linear => {
            let c = params
                .coefficients
                .clone()
                .ok_or_else(|| Error::InvalidInput("linear model needs coefficients".into()))?;
            let marginals = params
                .marginals
                .clone()
                .unwrap_or_else(|| vec![InputDistribution::unit_uniform(); c.len()]);
            Model::linear(c, marginals)
        }
        BuiltinName::QuadraticNormal => {
            let a = params
                .a
                .clone()
                .ok_or_else(|| Error::InvalidInput("quadratic model needs a matrix A".into()))?;
            let b = params.b.clone().unwrap_or_else(|| vec![0.0; a.dim()]);
            Model::quadratic_normal(a, b)
        }
    }
}

/// Closed-form ANOVA variances of a built-in model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticAnova {
    pub sigma2: f64,
    /// Main-effect (lower) indices.
    pub lower: Vec<f64>,
    /// Total-effect (upper) indices.
    pub upper: Vec<f64>,
    /// `sigma_u^2` keyed by the sorted zero-based index set `u`; absent sets are zero.
    pub component_variances: BTreeMap<Vec<usize>, f64>,
}

impl AnalyticAnova {
    fn from_components(d: usize, components: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let sigma2: f64 = components.values().sum();
        if !(sigma2 > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let lower = (0..d)
            .map(|i| components.get(&vec![i]).copied().unwrap_or(0.0) / sigma2)
            .collect();
        let upper = (0..d)
            .map(|i| {
                components
                    .iter()
                    .filter(|(u, _)| u.contains(&i))
                    .map(|(_, v)| v)
                    .sum::<f64>()
                    / sigma2
            })
            .collect();
        Ok(Self {
            sigma2,
            lower,
            upper,
            component_variances: components,
        })
    }

    /// Unnormalized total effect `sigma^2 * upper_i`.
    pub fn total_effect_variance(&self, i: usize) -> f64 {
        self.sigma2 * self.upper[i]
    }
}

/// Analytic ANOVA of the noiseless part of a supported built-in.
///
/// Supported: example1, example4, linear (any marginals), quadratic_normal.
pub fn analytic_anova(model: &Model) -> Result<AnalyticAnova> {
    let d = model.dim();
    let mut comp: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let builtin = model
        .builtin_kind()
        .ok_or_else(|| Error::Unsupported("no analytic ANOVA for custom models".into()))?;
    match builtin {
        Builtin::Example1 => {
            // Var(z) = 1/12 on (-1/2, 1/2); each bilinear term has variance 100 / 144.
            for i in 0..10 {
                comp.insert(vec![i], ((i + 1) * (i + 1)) as f64 / 12.0);
            }
            comp.insert(vec![0, 1], 100.0 / 144.0);
            comp.insert(vec![8, 9], 100.0 / 144.0);
        }
        Builtin::Example4 { c, c12 } => {
            // With a_i = x_i - 1/2: E[a] = E[a^5] = 0, so the interaction term has
            // no main-effect projection and variance c12^2 E[a^2] E[a^10].
            for (i, ci) in c.iter().enumerate() {
                comp.insert(vec![i], ci * ci / 12.0);
            }
            comp.insert(vec![0, 1], c12 * c12 / 12.0 * CENTERED_UNIFORM_TENTH_MOMENT);
        }
        Builtin::Linear { coefficients } => {
            for (i, (c, m)) in coefficients.iter().zip(model.marginals()).enumerate() {
                comp.insert(vec![i], c * c * m.variance());
            }
        }
        Builtin::QuadraticNormal { a, b } => {
            // Hermite expansion: f_i = A_ii (z_i^2 - 1) / 2 + b_i z_i, f_ij = A_ij z_i z_j.
            for (i, bi) in b.iter().enumerate() {
                comp.insert(vec![i], 0.5 * a.get(i, i).powi(2) + bi * bi);
                for j in (i + 1)..d {
                    comp.insert(vec![i, j], a.get(i, j).powi(2));
                }
            }
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no analytic ANOVA for {}",
                match other {
                    Builtin::Example2 { .. } => "example2",
                    Builtin::Polynomial { .. } => "polynomial",
                    _ => "constant",
                }
            )))
        }
    }
    comp.retain(|_, v| *v != 0.0);
    AnalyticAnova::from_components(d, comp)
}
