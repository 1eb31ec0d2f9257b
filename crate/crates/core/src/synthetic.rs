//! Gaussian blob generator for tests, demos and benchmarks.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub n_per_blob: usize,
    pub dim: usize,
    pub n_blobs: usize,
    /// Per-coordinate standard deviation inside a blob.
    pub spread: f64,
    /// Distance between blob centers (between neighbouring centers when
    /// they are laid out on a polygon or a line).
    pub center_distance: f64,
}

#[derive(Debug, Clone)]
pub struct Blobs {
    pub values: Array2<f64>,
    pub labels: Vec<usize>,
    pub centers: Array2<f64>,
}

/// Scaled unit axes when `dim >= n_blobs` (all pairs equidistant), otherwise
/// a regular polygon in the first two coordinates, or a line when `dim == 1`.
pub fn blob_centers(spec: &BlobSpec) -> Array2<f64> {
    let BlobSpec {
        dim,
        n_blobs,
        center_distance: dist,
        ..
    } = *spec;
    let mut centers = Array2::zeros((n_blobs, dim));
    if dim >= n_blobs {
        let scale = dist / std::f64::consts::SQRT_2;
        for b in 0..n_blobs {
            centers[[b, b]] = scale;
        }
    } else if dim >= 2 {
        let radius = dist / (2.0 * (std::f64::consts::PI / n_blobs as f64).sin());
        for b in 0..n_blobs {
            let angle = 2.0 * std::f64::consts::PI * b as f64 / n_blobs as f64;
            centers[[b, 0]] = radius * angle.cos();
            centers[[b, 1]] = radius * angle.sin();
        }
    } else if dim == 1 {
        for b in 0..n_blobs {
            centers[[b, 0]] = dist * b as f64;
        }
    }
    centers
}

/// Samples `n_per_blob` points around each center; rows are grouped by blob.
pub fn gaussian_blobs(spec: &BlobSpec, seed: u64) -> Blobs {
    let centers = blob_centers(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_per_blob * spec.n_blobs;
    let mut values = Array2::zeros((n, spec.dim));
    let mut labels = Vec::with_capacity(n);
    for b in 0..spec.n_blobs {
        let center: Array1<f64> = centers.row(b).to_owned();
        for r in 0..spec.n_per_blob {
            let row = b * spec.n_per_blob + r;
            for c in 0..spec.dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                values[[row, c]] = center[c] + spec.spread * z;
            }
            labels.push(b);
        }
    }
    Blobs {
        values,
        labels,
        centers,
    }
}
