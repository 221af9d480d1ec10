//! Gradient and finite-slope outer-product matrices, their spectra, and the
//! activity scores derived from them.

use serde::{Deserialize, Serialize};

use crate::dgsm::gradient_outer_products;
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, SpectralDecomposition, SymMatrix};
use crate::mc::{accumulate, batch_se, Accumulated};
use crate::models::Model;
use crate::randkit::{EvalStreams, RngStream};

/// Root stream id for finite-slope sampling.
pub const GAS_STREAM: u64 = 4;

/// Redraws allowed when a replacement coordinate lands on the base point.
pub const MAX_RESAMPLES: usize = 100;

/// `|v_i - z_i|` below this multiple of the marginal scale counts as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// Gradient outer products.
    As,
    /// Finite-slope outer products.
    Gas,
}

/// `D_i = (f(v_i, z_-i) - f(z)) / (v_i - z_i)` for every `i`.
///
/// `f(z)` is evaluated once. A `v_i` closer to `z_i` than the coincidence
/// tolerance is redrawn from its marginal using `sampling`, and the accepted
/// value is written back into `v`.
pub fn finite_slope(
    model: &Model,
    v: &mut [f64],
    z: &[f64],
    sampling: &mut RngStream,
    mut noise: Option<&mut RngStream>,
) -> Result<Vec<f64>> {
    let d = model.dim();
    if v.len() != d || z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if v.len() != d { v.len() } else { z.len() },
        });
    }
    let base = model.evaluate(z, noise.as_deref_mut())?;
    if !base.is_finite() {
        return Err(Error::NonFinite {
            context: "finite_slope base point",
            index: 0,
        });
    }
    let mut x = z.to_vec();
    let mut slopes = Vec::with_capacity(d);
    for i in 0..d {
        let marginal = &model.marginals()[i];
        let delta = COINCIDENCE_TOLERANCE * marginal.scale();
        let mut tries = 0;
        while (v[i] - z[i]).abs() < delta {
            if tries == MAX_RESAMPLES {
                return Err(Error::ResampleExhausted { index: i });
            }
            v[i] = marginal.sample_one(sampling);
            tries += 1;
        }
        x[i] = v[i];
        let fi = model.evaluate(&x, noise.as_deref_mut())?;
        x[i] = z[i];
        let s = (fi - base) / (v[i] - z[i]);
        if !s.is_finite() {
            return Err(Error::NonFinite {
                context: "finite_slope",
                index: i,
            });
        }
        slopes.push(s);
    }
    Ok(slopes)
}

/// Mean of `D D^T` packed as the upper triangle, averaged over `m1` base
/// points and `m2` fresh replacement vectors per base point.
pub fn finite_slope_outer_products(model: &Model, m1: usize, m2: usize, rng: &RngStream) -> Result<Accumulated> {
    if m2 == 0 {
        return Err(Error::InvalidInput("M2 must be at least 1".into()));
    }
    let d = model.dim();
    let inv_m2 = 1.0 / m2 as f64;
    accumulate(m1, d * (d + 1) / 2, |r, out| {
        let mut s = EvalStreams::for_replicate(rng, r as u64);
        let z = model.sample_point(&mut s.sampling);
        for _ in 0..m2 {
            let mut v = model.sample_point(&mut s.sampling);
            let slope = finite_slope(model, &mut v, &z, &mut s.sampling, Some(&mut s.noise))?;
            let mut k = 0;
            for i in 0..d {
                for j in i..d {
                    out[k] += slope[i] * slope[j] * inv_m2;
                    k += 1;
                }
            }
        }
        Ok(())
    })
}

/// Monte Carlo estimate of the finite-slope matrix from `m1 * m2` slope vectors.
pub fn estimate_c_gas(model: &Model, m1: usize, m2: usize, rng: &RngStream) -> Result<SymMatrix> {
    let acc = finite_slope_outer_products(model, m1, m2, rng)?;
    Ok(SymMatrix::from_upper_triangle(model.dim(), &acc.mean))
}

/// Monte Carlo estimate of the gradient matrix from `n` forward-difference gradients.
pub fn estimate_c_as(model: &Model, n: usize, h: f64, rng: &RngStream) -> Result<SymMatrix> {
    let acc = gradient_outer_products(model, n, h, rng)?;
    Ok(SymMatrix::from_upper_triangle(model.dim(), &acc.mean))
}

fn check_m(m: usize, d: usize) -> Result<()> {
    if m == 0 || m > d {
        return Err(Error::InvalidInput(format!("m must be in 1..={d}, got {m}")));
    }
    Ok(())
}

/// `score_i(m) = sum_{j <= m} lambda_j u_ij^2`.
pub fn scores(spec: &SpectralDecomposition, m: usize) -> Result<Vec<f64>> {
    let d = spec.dim();
    check_m(m, d)?;
    let lambda = spec.eigenvalues();
    Ok((0..d)
        .map(|i| (0..m).map(|j| lambda[j] * spec.component(i, j).powi(2)).sum())
        .collect())
}

/// `lambda_{m+1}`, or zero when `m = d`.
pub fn lambda_after(spec: &SpectralDecomposition, m: usize) -> f64 {
    spec.eigenvalues().get(m).copied().unwrap_or(0.0)
}

/// A decomposed sensitivity matrix with its per-batch estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceResult {
    pub kind: MatrixKind,
    pub matrix: SymMatrix,
    pub spectrum: SpectralDecomposition,
    pub threshold: f64,
    /// Smallest `m` whose normalized cumulative eigenvalue sum exceeds `threshold`.
    pub m_selected: usize,
    /// Number of outer Monte Carlo replicates.
    pub samples: usize,
    batch_matrices: Vec<SymMatrix>,
}

impl SubspaceResult {
    pub fn from_accumulated(kind: MatrixKind, acc: &Accumulated, d: usize, threshold: f64) -> Result<Self> {
        let matrix = SymMatrix::from_upper_triangle(d, &acc.mean);
        let spectrum = sym_eig(&matrix)?;
        let m_selected = spectrum.select_m(threshold)?;
        let batch_matrices = acc
            .batch_means
            .iter()
            .map(|b| SymMatrix::from_upper_triangle(d, b))
            .collect();
        Ok(Self {
            kind,
            matrix,
            spectrum,
            threshold,
            m_selected,
            samples: acc.n,
            batch_matrices,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn scores(&self, m: usize) -> Result<Vec<f64>> {
        scores(&self.spectrum, m)
    }

    pub fn lambda_after(&self, m: usize) -> f64 {
        lambda_after(&self.spectrum, m)
    }

    /// `score_i(m) + [m < d] lambda_{m+1}`, the numerator of the subspace bounds.
    pub fn bound_terms(&self, m: usize) -> Result<Vec<f64>> {
        let extra = self.lambda_after(m);
        Ok(self.scores(m)?.into_iter().map(|s| s + extra).collect())
    }

    /// Batch-means standard errors of [`Self::bound_terms`], from the
    /// decomposition of each batch matrix.
    pub fn bound_terms_se(&self, m: usize) -> Result<Vec<f64>> {
        check_m(m, self.dim())?;
        let per_batch = self
            .batch_matrices
            .iter()
            .map(|b| {
                let spec = sym_eig(b)?;
                let extra = lambda_after(&spec, m);
                Ok(scores(&spec, m)?.into_iter().map(|s| s + extra).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        (0..self.dim())
            .map(|i| batch_se(&per_batch.iter().map(|b| b[i]).collect::<Vec<_>>()))
            .collect()
    }

    /// Batch-means standard errors of the scores.
    pub fn scores_se(&self, m: usize) -> Result<Vec<f64>> {
        check_m(m, self.dim())?;
        let per_batch = self
            .batch_matrices
            .iter()
            .map(|b| scores(&sym_eig(b)?, m))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        (0..self.dim())
            .map(|i| batch_se(&per_batch.iter().map(|b| b[i]).collect::<Vec<_>>()))
            .collect()
    }

    /// `|<u_1, direction>|` for a unit `direction`.
    pub fn alignment(&self, direction: &[f64]) -> f64 {
        self.spectrum
            .eigenvector(0)
            .iter()
            .zip(direction)
            .map(|(u, t)| u * t)
            .sum::<f64>()
            .abs()
    }
}

/// Decomposed finite-slope matrix with `M1 = m1`, `M2 = m2`.
pub fn global_active_subspace(
    model: &Model,
    m1: usize,
    m2: usize,
    threshold: f64,
    rng: &RngStream,
) -> Result<SubspaceResult> {
    let acc = finite_slope_outer_products(model, m1, m2, rng)?;
    SubspaceResult::from_accumulated(MatrixKind::Gas, &acc, model.dim(), threshold)
}

/// Decomposed gradient matrix from `n` samples.
pub fn active_subspace(model: &Model, n: usize, h: f64, threshold: f64, rng: &RngStream) -> Result<SubspaceResult> {
    let acc = gradient_outer_products(model, n, h, rng)?;
    SubspaceResult::from_accumulated(MatrixKind::As, &acc, model.dim(), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_THRESHOLD;
    use crate::randkit::InputDistribution;

    #[test]
    fn slope_of_linear_is_coefficient() {
        let m = Model::linear_unit(vec![1.5, -2.0, 0.25]).unwrap();
        let mut rng = RngStream::new(0, 0);
        let mut v = vec![0.9, 0.1, 0.3];
        let s = finite_slope(&m, &mut v, &[0.2, 0.7, 0.8], &mut rng, None).unwrap();
        for (a, b) in s.iter().zip([1.5, -2.0, 0.25]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn slope_of_square_is_midpoint_derivative() {
        let m = Model::from_fn("sq", vec![InputDistribution::unit_uniform()], |z| z[0] * z[0]).unwrap();
        let mut rng = RngStream::new(0, 0);
        let s = finite_slope(&m, &mut [0.8], &[0.2], &mut rng, None).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_slope_vanishes_on_one_side() {
        let m = Model::example2().unwrap();
        let theta = m.ridge_direction().unwrap().to_vec();
        let z: Vec<f64> = theta.iter().map(|t| 3.0 * t).collect();
        let mut v: Vec<f64> = z.iter().map(|x| x + 0.01).collect();
        let mut rng = RngStream::new(0, 0);
        let s = finite_slope(&m, &mut v, &z, &mut rng, None).unwrap();
        assert!(s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn coincident_coordinates_are_redrawn() {
        let m = Model::linear_unit(vec![1.0, 2.0]).unwrap();
        let mut rng = RngStream::new(4, 4);
        let z = [0.3, 0.6];
        let mut v = [0.3, 0.1];
        let s = finite_slope(&m, &mut v, &z, &mut rng, None).unwrap();
        assert!(v[0] != 0.3);
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_marginal_exhausts_resampling() {
        // The spread is far below one ulp of the mean, so every redraw rounds back to z.
        let narrow = InputDistribution::normal(1e300, 1e280).unwrap();
        let m = Model::from_fn("n", vec![narrow], |z| z[0]).unwrap();
        let mut rng = RngStream::new(0, 0);
        let err = finite_slope(&m, &mut [1e300], &[1e300], &mut rng, None).unwrap_err();
        assert_eq!(err, Error::ResampleExhausted { index: 0 });
    }

    #[test]
    fn linear_matrices_are_exact_outer_products() {
        let c = [1.0, 2.0, 3.0];
        let m = Model::linear_unit(c.to_vec()).unwrap();
        let gas = estimate_c_gas(&m, 50, 2, &RngStream::new(1, GAS_STREAM)).unwrap();
        let as_ = estimate_c_as(&m, 50, 0.001, &RngStream::new(1, 3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((gas.get(i, j) - c[i] * c[j]).abs() < 1e-12);
                assert!((as_.get(i, j) - c[i] * c[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn constant_model_gives_zero_matrix() {
        let m = Model::constant(1.0, vec![InputDistribution::unit_uniform(); 3]).unwrap();
        let gas = estimate_c_gas(&m, 20, 1, &RngStream::new(1, GAS_STREAM)).unwrap();
        assert_eq!(gas, SymMatrix::zeros(3));
        assert_eq!(
            global_active_subspace(&m, 20, 1, DEFAULT_THRESHOLD, &RngStream::new(1, GAS_STREAM)),
            Err(Error::DegenerateSpectrum)
        );
    }

    #[test]
    fn bilinear_gradient_moments() {
        let m = Model::from_fn("xy", vec![InputDistribution::unit_uniform(); 2], |z| z[0] * z[1]).unwrap();
        let c = estimate_c_as(&m, 200_000, 0.001, &RngStream::new(2, 3)).unwrap();
        assert!((c.get(0, 0) - 1.0 / 3.0).abs() < 0.005);
        assert!((c.get(1, 1) - 1.0 / 3.0).abs() < 0.005);
        assert!((c.get(0, 1) - 0.25).abs() < 0.005);
    }

    #[test]
    fn score_examples() {
        let spec = SpectralDecomposition::from_parts(vec![2.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(scores(&spec, 1).unwrap(), vec![2.0, 0.0]);
        assert_eq!(scores(&spec, 2).unwrap(), vec![2.0, 1.0]);
        assert!(scores(&spec, 0).is_err());
        assert!(scores(&spec, 3).is_err());
        assert_eq!(lambda_after(&spec, 1), 1.0);
        assert_eq!(lambda_after(&spec, 2), 0.0);
    }

    #[test]
    fn full_scores_reproduce_diagonal_and_grow_with_m() {
        let m = Model::example4().unwrap();
        let r = global_active_subspace(&m, 2000, 1, DEFAULT_THRESHOLD, &RngStream::new(9, GAS_STREAM)).unwrap();
        let full = r.scores(4).unwrap();
        for (s, dgl) in full.iter().zip(r.matrix.diagonal()) {
            assert!((s - dgl).abs() < 1e-10);
        }
        for k in 1..4 {
            let a = r.scores(k).unwrap();
            let b = r.scores(k + 1).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| *x <= y + 1e-10));
            let bound = r.bound_terms(k).unwrap();
            assert!(bound.iter().zip(&full).all(|(x, y)| x + 1e-10 >= *y));
        }
        assert_eq!(r.bound_terms_se(2).unwrap().len(), 4);
    }
}
