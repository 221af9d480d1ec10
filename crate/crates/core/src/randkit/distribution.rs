use serde::{Deserialize, Serialize};

use super::normal::{normal_cdf, normal_pdf, normal_quantile, sqrt_two_pi};
use super::RngStream;
use crate::error::{Error, Result};

/// Number of quantiles scanned by [`InputDistribution::cheeger_constant_grid`].
pub const CHEEGER_GRID_POINTS: usize = 1_000_000;
const CHEEGER_GRID_EDGE: f64 = 1e-6;

/// Marginal law of a single model input.
///
/// Build values through [`InputDistribution::uniform`] and
/// [`InputDistribution::normal`], which check the parameters; models re-check
/// every marginal on construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDistribution {
    Uniform { lower: f64, upper: f64 },
    Normal { mean: f64, sd: f64 },
}

impl InputDistribution {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        let d = InputDistribution::Uniform { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let d = InputDistribution::Normal { mean, sd };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_uniform() -> Self {
        InputDistribution::Uniform {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn standard_normal() -> Self {
        InputDistribution::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InputDistribution::Uniform { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::InvalidInput(format!(
                        "uniform marginal needs finite lower < upper, got ({lower}, {upper})"
                    )));
                }
            }
            InputDistribution::Normal { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "normal marginal needs finite mean and sd > 0, got ({mean}, {sd})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_unit_uniform(&self) -> bool {
        matches!(*self, InputDistribution::Uniform { lower, upper } if lower == 0.0 && upper == 1.0)
    }

    pub fn is_standard_normal(&self) -> bool {
        matches!(*self, InputDistribution::Normal { mean, sd } if mean == 0.0 && sd == 1.0)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => 0.5 * (lower + upper),
            InputDistribution::Normal { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => (upper - lower).powi(2) / 12.0,
            InputDistribution::Normal { sd, .. } => sd * sd,
        }
    }

    pub fn median(&self) -> f64 {
        self.mean()
    }

    /// Characteristic length: interval width for uniforms, standard deviation for normals.
    pub fn scale(&self) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => upper - lower,
            InputDistribution::Normal { sd, .. } => sd,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => {
                ((x - lower) / (upper - lower)).clamp(0.0, 1.0)
            }
            InputDistribution::Normal { mean, sd } => normal_cdf((x - mean) / sd),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            InputDistribution::Normal { mean, sd } => normal_pdf((x - mean) / sd) / sd,
        }
    }

    /// `F^{-1}(u)` for `u` strictly inside `(0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "inverse_cdf needs 0 < u < 1, got {u}"
            )));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => lower + u * (upper - lower),
            InputDistribution::Normal { mean, sd } => mean + sd * normal_quantile(u),
        }
    }

    /// One draw by inversion of an open-interval uniform.
    #[inline]
    pub fn sample_one(&self, rng: &mut RngStream) -> f64 {
        self.quantile_unchecked(rng.next_open01())
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// The constant `D(F) = 4 [sup_x min(F(x), 1 - F(x)) / f(x)]^2` in closed form.
    ///
    /// Uniform on `(a, b)`: the ratio peaks at the midpoint, giving `(b - a)^2`.
    /// Normal with standard deviation `s`: the ratio peaks at the mean, giving
    /// `4 (s sqrt(2 pi) / 2)^2 = 2 pi s^2`.
    pub fn cheeger_constant(&self) -> f64 {
        match *self {
            InputDistribution::Uniform { lower, upper } => (upper - lower).powi(2),
            InputDistribution::Normal { sd, .. } => {
                let ratio = 0.5 * sd * sqrt_two_pi();
                4.0 * ratio * ratio
            }
        }
    }

    /// The same constant by brute-force search over equally spaced quantiles
    /// in `[1e-6, 1 - 1e-6]`.
    pub fn cheeger_constant_grid(&self, points: usize) -> f64 {
        assert!(points >= 2, "grid needs at least two points");
        let span = 1.0 - 2.0 * CHEEGER_GRID_EDGE;
        let step = span / (points - 1) as f64;
        let sup = (0..points)
            .map(|k| {
                let q = CHEEGER_GRID_EDGE + k as f64 * step;
                let x = self.quantile_unchecked(q);
                q.min(1.0 - q) / self.pdf(x)
            })
            .fold(0.0_f64, f64::max);
        4.0 * sup * sup
    }
}
