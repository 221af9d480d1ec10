//! Forward-difference gradients and derivative-based global sensitivity measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{accumulate, Accumulated};
use crate::models::Model;
use crate::randkit::{EvalStreams, RngStream};

/// Forward-difference increment.
pub const DEFAULT_H: f64 = 0.001;

/// Root stream id for gradient sampling; shared by DGSM and the gradient matrix.
pub const GRADIENT_STREAM: u64 = 3;

/// A point and its finite-difference gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub point: Vec<f64>,
    pub gradient: Vec<f64>,
    pub h: f64,
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("increment h must be > 0, got {h}")))
    }
}

/// `g_i = (f(z + h e_i) - f(z)) / h`, `d + 1` evaluations.
///
/// For stochastic models every evaluation draws its own noise from `noise`.
pub fn fd_gradient(model: &Model, z: &[f64], h: f64, mut noise: Option<&mut RngStream>) -> Result<Vec<f64>> {
    check_h(h)?;
    let base = model.evaluate(z, noise.as_deref_mut())?;
    if !base.is_finite() {
        return Err(Error::NonFinite {
            context: "fd_gradient base point",
            index: 0,
        });
    }
    let mut x = z.to_vec();
    let mut g = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let zi = x[i];
        x[i] = zi + h;
        let fi = model.evaluate(&x, noise.as_deref_mut())?;
        x[i] = zi;
        let gi = (fi - base) / h;
        if !gi.is_finite() {
            return Err(Error::NonFinite {
                context: "fd_gradient",
                index: i,
            });
        }
        g.push(gi);
    }
    Ok(g)
}

/// Draws one point and its gradient for replicate `r` of `root`.
pub fn gradient_sample(model: &Model, h: f64, root: &RngStream, r: u64) -> Result<GradientSample> {
    let mut s = EvalStreams::for_replicate(root, r);
    let point = model.sample_point(&mut s.sampling);
    let gradient = fd_gradient(model, &point, h, Some(&mut s.noise))?;
    Ok(GradientSample { point, gradient, h })
}

/// Mean of `g g^T` over `n` sampled gradients, packed as the upper triangle.
///
/// The DGSM values are the diagonal of this accumulation.
pub fn gradient_outer_products(model: &Model, n: usize, h: f64, rng: &RngStream) -> Result<Accumulated> {
    check_h(h)?;
    let d = model.dim();
    accumulate(n, d * (d + 1) / 2, |r, out| {
        let g = gradient_sample(model, h, rng, r as u64)?.gradient;
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                out[k] = g[i] * g[j];
                k += 1;
            }
        }
        Ok(())
    })
}

/// Position of `(i, i)` in the packed upper triangle of a `d x d` matrix.
pub(crate) fn packed_diag_index(d: usize, i: usize) -> usize {
    i * d - i * i.saturating_sub(1) / 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgsmEstimate {
    /// `v_i`, the mean squared partial derivative.
    pub values: Vec<f64>,
    /// Batch-means standard errors; absent for fewer than ten samples.
    pub se: Option<Vec<f64>>,
    pub n: usize,
    pub h: f64,
}

impl DgsmEstimate {
    pub(crate) fn from_outer_products(acc: &Accumulated, d: usize, h: f64) -> Self {
        let idx: Vec<usize> = (0..d).map(|i| packed_diag_index(d, i)).collect();
        let values = idx.iter().map(|&k| acc.mean[k]).collect();
        let se = idx
            .iter()
            .map(|&k| acc.se_of(|b| b[k]))
            .collect::<Result<Vec<f64>>>()
            .ok();
        Self {
            values,
            se,
            n: acc.n,
            h,
        }
    }
}

/// Monte Carlo DGSM from `n` forward-difference gradients.
pub fn dgsm(model: &Model, n: usize, h: f64, rng: &RngStream) -> Result<DgsmEstimate> {
    let acc = gradient_outer_products(model, n, h, rng)?;
    Ok(DgsmEstimate::from_outer_products(&acc, model.dim(), h))
}
