//! Normalized spectral clustering: Gaussian affinity, symmetric Laplacian,
//! row-normalized eigenvector embedding, then k-means.

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};

use super::{kmeans_fit, sq_dist, Partition, KMEANS_DEFAULT_MAX_ITER};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

const DEGREE_FLOOR: f64 = 1e-12;
const EIGEN_EPS: f64 = 1e-13;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub k: usize,
    /// `None` selects the median pairwise distance.
    pub kernel_width: Option<f64>,
    pub seed: u64,
}

pub fn spectral_clustering(data: &DataMatrix, cfg: &SpectralConfig) -> Result<Partition> {
    let n = data.n_rows();
    if cfg.k < 2 {
        return Err(Error::contract(format!("spectral clustering needs k >= 2, got {}", cfg.k)));
    }
    if cfg.k > n {
        return Err(Error::contract(format!("k = {} exceeds {n} instances", cfg.k)));
    }
    let embedding = spectral_embedding(data.values().view(), cfg.k, cfg.kernel_width)?;
    Ok(kmeans_fit(embedding.view(), cfg.k, cfg.seed, KMEANS_DEFAULT_MAX_ITER)?.partition)
}

/// Rows of the `k` smallest-eigenvalue eigenvectors of
/// L = I − D^{-1/2} A D^{-1/2}, each scaled to unit length.
pub fn spectral_embedding(
    x: ArrayView2<f64>,
    k: usize,
    kernel_width: Option<f64>,
) -> Result<Array2<f64>> {
    let n = x.nrows();
    let mut dist2 = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let d = sq_dist(x.row(i), x.row(j));
            dist2[[i, j]] = d;
            dist2[[j, i]] = d;
        }
    }
    let sigma = match kernel_width {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => return Err(Error::contract(format!("kernel width {w} must be > 0"))),
        None => median_distance(&dist2),
    };
    let denom = 2.0 * sigma * sigma;

    let mut degree = vec![0.0; n];
    let mut affinity = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let a = (-dist2[[i, j]] / denom).exp();
                affinity[[i, j]] = a;
                degree[i] += a;
            }
        }
    }
    if degree.iter().any(|&d| d < DEGREE_FLOOR) {
        warn!("spectral clustering: isolated point(s), degree floored at {DEGREE_FLOOR:e}");
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| 1.0 / d.max(DEGREE_FLOOR).sqrt())
        .collect();

    let laplacian = DMatrix::from_fn(n, n, |i, j| {
        let m = inv_sqrt[i] * affinity[[i, j]] * inv_sqrt[j];
        if i == j {
            1.0 - m
        } else {
            -m
        }
    });
    let eig = SymmetricEigen::try_new(laplacian, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut embedding = Array2::zeros((n, k));
    for (c, &col) in order.iter().take(k).enumerate() {
        for i in 0..n {
            embedding[[i, c]] = eig.eigenvectors[(i, col)];
        }
    }
    for mut row in embedding.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    if embedding.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite spectral embedding".into()));
    }
    Ok(embedding)
}

/// Median over unordered pairs; falls back to 1 when every distance is zero.
fn median_distance(dist2: &Array2<f64>) -> f64 {
    let n = dist2.nrows();
    let mut d: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(dist2[[i, j]].sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    if med > 0.0 {
        med
    } else {
        warn!("spectral clustering: median pairwise distance is zero, using width 1");
        1.0
    }
}
