//! Deterministic parallel Monte Carlo accumulation with batch-means errors.
//!
//! Replicates `0..n` are split into [`BATCHES`] contiguous batches and each
//! batch into chunks of [`CHUNK`] replicates. Chunks run in parallel; their
//! sums are combined in index order, so the result does not depend on the
//! thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 10;

/// Replicates summed serially inside one parallel task.
pub const CHUNK: usize = 256;

/// Per-replicate vectors of width `width`, averaged overall and per batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulated {
    pub n: usize,
    pub mean: Vec<f64>,
    /// Mean over each batch, in batch order. Fewer than [`BATCHES`] entries when `n < BATCHES`.
    pub batch_means: Vec<Vec<f64>>,
}

impl Accumulated {
    pub fn width(&self) -> usize {
        self.mean.len()
    }

    /// Batch-means standard error of a derived quantity `g(mean)`.
    ///
    /// `g` is applied to every batch mean; the error is the sample standard
    /// deviation of those values over `sqrt(batches)`.
    pub fn se_of<G: Fn(&[f64]) -> f64>(&self, g: G) -> Result<f64> {
        let values: Vec<f64> = self.batch_means.iter().map(|b| g(b)).collect();
        batch_se(&values)
    }

    /// Batch-means standard error of every component of the mean.
    pub fn se(&self) -> Result<Vec<f64>> {
        (0..self.width()).map(|k| self.se_of(|b| b[k])).collect()
    }
}

/// `sd(values) / sqrt(len)` with the `len - 1` divisor.
pub fn batch_se(values: &[f64]) -> Result<f64> {
    let b = values.len();
    if b < 2 {
        return Err(Error::TooFewReplicates {
            needed: BATCHES,
            got: b,
        });
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((ss / (b - 1) as f64 / b as f64).sqrt())
}

/// Boundaries of batch `k` out of `batches` over `n` replicates.
fn batch_range(n: usize, batches: usize, k: usize) -> (usize, usize) {
    (k * n / batches, (k + 1) * n / batches)
}

/// Averages `f(r, out)` over replicates `r = 0..n`.
///
/// `f` receives a zeroed buffer of length `width` and writes the replicate's
/// contribution. The first error in replicate order is returned.
pub fn accumulate<F>(n: usize, width: usize, f: F) -> Result<Accumulated>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let batches = BATCHES.min(n);
    let mut tasks = Vec::new();
    for k in 0..batches {
        let (lo, hi) = batch_range(n, batches, k);
        let mut start = lo;
        while start < hi {
            let end = (start + CHUNK).min(hi);
            tasks.push((k, start, end));
            start = end;
        }
    }

    let chunk_sums: Vec<Result<Vec<f64>>> = tasks
        .par_iter()
        .map(|&(_, start, end)| {
            let mut acc = vec![0.0; width];
            let mut buf = vec![0.0; width];
            for r in start..end {
                buf.iter_mut().for_each(|x| *x = 0.0);
                f(r, &mut buf)?;
                for (a, x) in acc.iter_mut().zip(&buf) {
                    *a += x;
                }
            }
            Ok(acc)
        })
        .collect();

    let mut batch_sums = vec![vec![0.0; width]; batches];
    for (&(k, _, _), sum) in tasks.iter().zip(chunk_sums) {
        let sum = sum?;
        for (a, x) in batch_sums[k].iter_mut().zip(&sum) {
            *a += x;
        }
    }

    let mut total = vec![0.0; width];
    let mut batch_means = Vec::with_capacity(batches);
    for (k, sums) in batch_sums.iter().enumerate() {
        let (lo, hi) = batch_range(n, batches, k);
        let len = (hi - lo) as f64;
        for (t, s) in total.iter_mut().zip(sums) {
            *t += s;
        }
        batch_means.push(sums.iter().map(|s| s / len).collect());
    }
    let mean = total.iter().map(|t| t / n as f64).collect();
    Ok(Accumulated {
        n,
        mean,
        batch_means,
    })
}
