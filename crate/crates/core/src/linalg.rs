//! Dense symmetric matrices, a cyclic Jacobi eigensolver, and the spectrum
//! utilities used to pick the subspace dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sweep limit for [`sym_eig`].
pub const MAX_SWEEPS: usize = 100;
/// Stop once the off-diagonal Frobenius norm is below this fraction of `||A||_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;
/// Eigenvector components within this distance of the largest magnitude count
/// as tied when fixing the sign.
const SIGN_TIE_TOLERANCE: f64 = 1e-10;

/// Default cutoff for the cumulative eigenvalue rule.
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// A `d x d` real symmetric matrix, stored row-major with both triangles.
///
/// All mutators write `(i, j)` and `(j, i)` together, so the stored matrix is
/// exactly symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = x;
        }
        m
    }

    /// Builds the matrix from its upper triangle: `f(i, j)` is called for `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts rows only if they form an exactly symmetric square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("matrix rows must form a square".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        context: "matrix entry",
                        index: i * dim + j,
                    });
                }
                if x != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j}): {x} vs {}",
                        rows[j][i]
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Reassembles a matrix from the packed upper triangle produced by
    /// [`SymMatrix::upper_triangle`].
    pub fn from_upper_triangle(dim: usize, packed: &[f64]) -> Self {
        debug_assert_eq!(packed.len(), dim * (dim + 1) / 2);
        let mut it = packed.iter();
        Self::from_fn(dim, |_, _| *it.next().unwrap())
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            out.extend_from_slice(&self.data[i * self.dim + i..(i + 1) * self.dim]);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Eigenvalues in descending order with the matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Row-major `d x d`; column `j` is the eigenvector for `eigenvalues[j]`.
    eigenvectors: Vec<f64>,
}

impl SpectralDecomposition {
    /// Wraps an already-sorted decomposition. `vectors[j]` is the j-th eigenvector.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: &[Vec<f64>]) -> Result<Self> {
        let d = eigenvalues.len();
        if vectors.len() != d || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: vectors.len(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("eigenvalues must be descending".into()));
        }
        let mut eigenvectors = vec![0.0; d * d];
        for (j, v) in vectors.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                eigenvectors[i * d + j] = x;
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.eigenvectors[i * self.dim() + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.component(i, j)).collect()
    }

    pub fn eigenvectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.eigenvector(j)).collect()
    }

    /// `U diag(lambda) U^T`
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim();
        SymMatrix::from_fn(d, |i, k| {
            (0..d)
                .map(|j| self.eigenvalues[j] * self.component(i, j) * self.component(k, j))
                .sum()
        })
    }

    /// `max |U^T U - I|`
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = (0..d).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn normalized_cumsum(&self) -> Result<Vec<f64>> {
        normalized_cumsum(&self.eigenvalues)
    }

    pub fn select_m(&self, threshold: f64) -> Result<usize> {
        select_m(&self.eigenvalues, threshold)
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order (ties keep their diagonal order).
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive; among near-tied components the first index decides.
pub fn sym_eig(a: &SymMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim;
    if let Some(k) = a.data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "matrix entry",
            index: k,
        });
    }
    let mut m = a.data.clone();
    let mut v = SymMatrix::identity(n).data;

    let tol = OFF_DIAGONAL_TOLERANCE * a.frobenius_norm();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = off_norm(&m) <= tol;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m[k * n + p] = new_kp;
                    m[p * n + k] = new_kp;
                    m[k * n + q] = new_kq;
                    m[q * n + k] = new_kq;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_norm(&m) <= tol;
    }
    if !converged {
        return Err(Error::NotConverged { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y * n + y].total_cmp(&m[x * n + x]).then(x.cmp(&y)));

    let eigenvalues: Vec<f64> = order.iter().map(|&j| m[j * n + j]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &j) in order.iter().enumerate() {
        let vec: Vec<f64> = (0..n).map(|i| v[i * n + j]).collect();
        let largest = vec.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let lead = vec
            .iter()
            .position(|x| x.abs() >= largest - SIGN_TIE_TOLERANCE)
            .unwrap_or(0);
        let sign = if vec[lead] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in vec.iter().enumerate() {
            eigenvectors[i * n + col] = sign * x;
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Entry `m - 1` is `sum_{k <= m} lambda_k / sum_k lambda_k`.
///
/// Round-off negatives in a PSD spectrum are counted as zero so the result is
/// nondecreasing and ends at exactly 1.
pub fn normalized_cumsum(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    let clipped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    let mut acc = 0.0;
    let mut out: Vec<f64> = clipped
        .iter()
        .map(|l| {
            acc += l;
            acc / total
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    Ok(out)
}

/// Smallest `m` whose normalized cumulative sum is strictly greater than `threshold`.
///
/// Falls back to `d` when the threshold is at or above 1.
pub fn select_m(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    let cum = normalized_cumsum(eigenvalues)?;
    Ok(cum
        .iter()
        .position(|&c| c > threshold)
        .map_or(cum.len(), |k| k + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues(), &[1.0, 1.0, 1.0]);
        assert_eq!(e.eigenvector(0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn diagonal_sorted_descending() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues(), &[3.0, 1.0]);
        assert_eq!(e.eigenvector(0), vec![0.0, 1.0]);
        assert_eq!(e.eigenvector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn two_by_two_hand_solution() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(e.eigenvalues()[0], 3.0, 1e-14));
        assert!(close(e.eigenvalues()[1], 1.0, 1e-14));
        let u1 = e.eigenvector(0);
        let u2 = e.eigenvector(1);
        assert!(close(u1[0], r, 1e-14) && close(u1[1], r, 1e-14));
        assert!(close(u2[0], r, 1e-14) && close(u2[1], -r, 1e-14));
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let mut a = SymMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert!(matches!(sym_eig(&a), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn asymmetric_rows_rejected() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn zero_matrix_is_fine_but_cumsum_is_degenerate() {
        let e = sym_eig(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(e.eigenvalues(), &[0.0, 0.0, 0.0]);
        assert_eq!(e.normalized_cumsum(), Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn cumsum_examples() {
        assert_eq!(
            normalized_cumsum(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            vec![0.25, 0.5, 0.75, 1.0]
        );
        let c = normalized_cumsum(&[9.0, 0.5, 0.5]).unwrap();
        assert!(close(c[0], 0.9, 1e-15) && close(c[1], 0.95, 1e-15) && c[2] == 1.0);
        assert_eq!(normalized_cumsum(&[5.0, 0.0, 0.0]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn select_m_uses_strict_inequality() {
        assert_eq!(select_m(&[9.0, 0.5, 0.5], 0.9).unwrap(), 2);
        assert_eq!(select_m(&[99.0, 1.0], 0.9).unwrap(), 1);
        assert_eq!(select_m(&[1.0; 5], 0.9).unwrap(), 5);
        assert_eq!(select_m(&[1.0; 5], 1.0).unwrap(), 5);
    }

    #[test]
    fn rank_one_outer_product() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let a = SymMatrix::from_fn(4, |i, j| c[i] * c[j]);
        let e = sym_eig(&a).unwrap();
        let norm2: f64 = c.iter().map(|x| x * x).sum();
        assert!(close(e.eigenvalues()[0], norm2, 1e-10));
        // Largest component is 3.0 (positive), so u1 = +c/|c|.
        let u1 = e.eigenvector(0);
        for (u, x) in u1.iter().zip(&c) {
            assert!(close(*u, x / norm2.sqrt(), 1e-10));
        }
    }

    #[test]
    fn packed_upper_triangle_round_trips() {
        let a = SymMatrix::from_fn(3, |i, j| (i * 3 + j) as f64);
        let packed = a.upper_triangle();
        assert_eq!(packed, vec![0.0, 1.0, 2.0, 4.0, 5.0, 8.0]);
        assert_eq!(SymMatrix::from_upper_triangle(3, &packed), a);
    }
}
