//! Principal component analysis via eigendecomposition of the covariance
//! (or Gram) matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted PCA basis: centering mean, orthonormal component rows, and the
/// explained variance per component in descending order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Row-major `num_components x input_dim`.
    pub components: Vec<f64>,
    pub explained_variance: Vec<f64>,
    pub num_components: usize,
    pub input_dim: usize,
}

impl PcaModel {
    /// Project one input row onto the component basis.
    pub fn project(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::InvalidArgument(format!(
                "row of length {} vs fitted input dimension {}",
                row.len(),
                self.input_dim
            )));
        }
        let centered: Vec<f64> = row.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok((0..self.num_components)
            .map(|c| {
                let comp = &self.components[c * self.input_dim..(c + 1) * self.input_dim];
                comp.iter().zip(&centered).map(|(a, b)| a * b).sum()
            })
            .collect())
    }
}

/// Fit the top-`k` principal components of `rows` (row-major `n x d`).
///
/// Eigendecomposes the d x d covariance when `n >= d`, otherwise the n x n
/// Gram matrix (same nonzero spectrum, components recovered by back
/// projection). Component signs follow a fixed convention: the
/// largest-magnitude entry of each component is positive.
pub fn fit_pca(rows: &[f64], n: usize, d: usize, k: usize) -> Result<PcaModel> {
    if n * d != rows.len() {
        return Err(Error::InvalidArgument(format!(
            "buffer of {} values does not match {n}x{d}",
            rows.len()
        )));
    }
    if k > d {
        return Err(Error::InvalidArgument(format!(
            "cannot extract {k} components from {d}-dimensional data"
        )));
    }
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "need more than {k} rows to fit {k} components, got {n}"
        )));
    }

    let mut mean = vec![0.0; d];
    for row in rows.chunks_exact(d) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i * d + j] - mean[j]);

    let (mut pairs, used_gram) = if n >= d {
        (covariance_eigens(&centered, n, d, k), false)
    } else {
        match gram_eigens(&centered, n, d, k) {
            Some(p) => (p, true),
            // Rank-deficient beyond k in the Gram route; the covariance
            // route handles zero-variance directions cleanly.
            None => (covariance_eigens(&centered, n, d, k), false),
        }
    };
    let _ = used_gram;

    // Fixed sign convention keeps refits byte-identical.
    for (_, v) in &mut pairs {
        let mut idx = 0;
        let mut best = 0.0;
        for (i, &x) in v.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                idx = i;
            }
        }
        if v[idx] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }

    let mut components = Vec::with_capacity(k * d);
    let mut explained_variance = Vec::with_capacity(k);
    for (lambda, v) in pairs {
        explained_variance.push(lambda.max(0.0));
        components.extend(v.iter());
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        num_components: k,
        input_dim: d,
    })
}

/// Top-k eigenpairs of the d x d covariance matrix.
fn covariance_eigens(centered: &DMatrix<f64>, n: usize, d: usize, k: usize) -> Vec<(f64, DVector<f64>)> {
    let cov = centered.transpose() * centered / (n as f64 - 1.0);
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect()
}

/// Top-k eigenpairs via the n x n Gram matrix; `None` when a requested
/// component has (numerically) zero variance.
fn gram_eigens(centered: &DMatrix<f64>, n: usize, _d: usize, k: usize) -> Option<Vec<(f64, DVector<f64>)>> {
    let gram = centered * centered.transpose() / (n as f64 - 1.0);
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let mut out = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        if lambda <= top * 1e-12 || lambda <= 0.0 {
            return None;
        }
        let u = eig.eigenvectors.column(i);
        let mut v = centered.transpose() * u;
        let norm = v.norm();
        v /= norm;
        out.push((lambda, v));
    }
    Some(out)
}
