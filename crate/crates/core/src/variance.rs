//! Output variance and Sobol' indices by Monte Carlo.
//!
//! Outputs are shifted by the model value at the marginal medians before
//! squaring, which keeps the variance pass accurate when the mean is large
//! relative to the spread.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{accumulate, Accumulated};
use crate::models::Model;
use crate::randkit::{EvalStreams, RngStream};

/// Root stream ids used by [`sobol_indices`].
pub const UPPER_STREAM: u64 = 1;
pub const LOWER_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub sigma2: f64,
    pub n: usize,
}

fn pilot(model: &Model) -> f64 {
    let p = model.eval_clean(&model.center());
    if p.is_finite() {
        p
    } else {
        0.0
    }
}

fn check_finite(y: f64, index: usize) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite {
            context: "model evaluation",
            index,
        })
    }
}

/// Evaluates at `z` drawing noise from `noise`; non-finite outputs are errors.
fn eval(model: &Model, z: &[f64], noise: &mut RngStream, index: usize) -> Result<f64> {
    check_finite(model.evaluate(z, Some(noise))?, index)
}

fn variance_from_moments(n: usize, m1: f64, m2: f64) -> f64 {
    // m1, m2: means of the shifted output and its square.
    let nf = n as f64;
    ((m2 - m1 * m1) * nf / (nf - 1.0)).max(0.0)
}

/// Unbiased sample variance of `n` independent outputs.
pub fn estimate_variance(model: &Model, n: usize, rng: &RngStream) -> Result<VarianceEstimate> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("variance needs n >= 2, got {n}")));
    }
    let p = pilot(model);
    let acc = accumulate(n, 2, |r, out| {
        let mut s = EvalStreams::for_replicate(rng, r as u64);
        let z = model.sample_point(&mut s.sampling);
        let y = eval(model, &z, &mut s.noise, 0)? - p;
        out[0] = y;
        out[1] = y * y;
        Ok(())
    })?;
    Ok(VarianceEstimate {
        mean: acc.mean[0] + p,
        sigma2: variance_from_moments(n, acc.mean[0], acc.mean[1]),
        n,
    })
}

/// Index estimates together with their unnormalized numerators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    /// `numerators[i] / sigma2`.
    pub indices: Vec<f64>,
    /// Estimates of the unnormalized effects (`sigma^2` times the index).
    pub numerators: Vec<f64>,
    /// Batch-means standard errors of `numerators`.
    pub numerator_se: Vec<f64>,
    /// Output variance from the same base sample.
    pub sigma2: f64,
    pub n: usize,
}

impl IndexEstimate {
    /// Standard errors of `indices`, ignoring the uncertainty in `sigma2`.
    pub fn se(&self) -> Vec<f64> {
        self.numerator_se.iter().map(|s| s / self.sigma2).collect()
    }
}

fn finish(acc: Accumulated, d: usize, n: usize) -> Result<IndexEstimate> {
    let sigma2 = variance_from_moments(n, acc.mean[0], acc.mean[1]);
    if !(sigma2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let numerators: Vec<f64> = acc.mean[2..2 + d].to_vec();
    let numerator_se = (0..d)
        .map(|i| acc.se_of(|b| b[2 + i]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(IndexEstimate {
        indices: numerators.iter().map(|t| t / sigma2).collect(),
        numerators,
        numerator_se,
        sigma2,
        n,
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < crate::mc::BATCHES {
        return Err(Error::TooFewReplicates {
            needed: crate::mc::BATCHES,
            got: n,
        });
    }
    Ok(())
}

/// Upper (total-effect) indices by pick-freeze.
///
/// Each replicate draws a base point `z` and an independent point `v`, then
/// evaluates `f(z)` and `f(v_i, z_-i)` for every `i`: `n (d + 1)` evaluations.
/// The estimate of the unnormalized effect is `mean (f(z) - f(v_i, z_-i))^2 / 2`,
/// nonnegative by construction.
pub fn upper_sobol(model: &Model, n: usize, rng: &RngStream) -> Result<IndexEstimate> {
    check_n(n)?;
    let d = model.dim();
    let p = pilot(model);
    let acc = accumulate(n, 2 + d, |r, out| {
        let mut s = EvalStreams::for_replicate(rng, r as u64);
        let mut z = model.sample_point(&mut s.sampling);
        let v = model.sample_point(&mut s.sampling);
        let fz = eval(model, &z, &mut s.noise, 0)?;
        out[0] = fz - p;
        out[1] = (fz - p) * (fz - p);
        for i in 0..d {
            let zi = z[i];
            z[i] = v[i];
            let fi = eval(model, &z, &mut s.noise, i)?;
            z[i] = zi;
            out[2 + i] = 0.5 * (fz - fi) * (fz - fi);
        }
        Ok(())
    })?;
    finish(acc, d, n)
}

/// Lower (main-effect) indices with a three-point correlation estimator.
///
/// Independent points `x`, `y`, `z` give
/// `mean (f(x) - f(z_i, x_-i)) (f(x_i, y_-i) - f(y))`, which is unbiased for
/// the unnormalized main effect: the two factors share only coordinate `i`.
/// Costs `n (2d + 2)` evaluations. Small negative values are returned as-is.
pub fn lower_sobol(model: &Model, n: usize, rng: &RngStream) -> Result<IndexEstimate> {
    check_n(n)?;
    let d = model.dim();
    let p = pilot(model);
    let acc = accumulate(n, 2 + d, |r, out| {
        let mut s = EvalStreams::for_replicate(rng, r as u64);
        let mut x = model.sample_point(&mut s.sampling);
        let mut y = model.sample_point(&mut s.sampling);
        let z = model.sample_point(&mut s.sampling);
        let fx = eval(model, &x, &mut s.noise, 0)?;
        let fy = eval(model, &y, &mut s.noise, 0)?;
        out[0] = fx - p;
        out[1] = (fx - p) * (fx - p);
        for i in 0..d {
            let xi = x[i];
            x[i] = z[i];
            let f_zx = eval(model, &x, &mut s.noise, i)?;
            x[i] = xi;
            let yi = y[i];
            y[i] = xi;
            let f_xy = eval(model, &y, &mut s.noise, i)?;
            y[i] = yi;
            out[2 + i] = (fx - f_zx) * (f_xy - fy);
        }
        Ok(())
    })?;
    finish(acc, d, n)
}

/// Lower and upper Sobol' indices from one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolEstimate {
    pub lower: IndexEstimate,
    pub upper: IndexEstimate,
    /// Variance from the upper-index base sample.
    pub sigma2_hat: f64,
    pub n: usize,
    pub seed: u64,
}

pub fn sobol_indices(model: &Model, n: usize, seed: u64) -> Result<SobolEstimate> {
    let upper = upper_sobol(model, n, &RngStream::new(seed, UPPER_STREAM))?;
    let lower = lower_sobol(model, n, &RngStream::new(seed, LOWER_STREAM))?;
    Ok(SobolEstimate {
        sigma2_hat: upper.sigma2,
        lower,
        upper,
        n,
        seed,
    })
}
