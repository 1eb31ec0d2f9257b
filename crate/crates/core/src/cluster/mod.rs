//! The three base clusterers whose partitions feed the voting stage.

mod affinity;
mod kmeans;
mod spectral;

use serde::{Deserialize, Serialize};

pub use affinity::{
    affinity_propagation, affinity_propagation_similarity, AffinityConfig, Preference,
};
pub use kmeans::{kmeans, kmeans_fit, KMeansFit, DEFAULT_MAX_ITER as KMEANS_DEFAULT_MAX_ITER};
pub use spectral::{spectral_clustering, spectral_embedding, SpectralConfig};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// A full labeling of N instances into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Checks that every label lies in `0..k` and every cluster is used.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::contract(format!(
                    "label {l} at instance {i} outside 0..{k}"
                )));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::contract(format!("cluster {missing} is empty")));
        }
        Ok(Self { labels, k })
    }

    /// Relabels arbitrary ids densely in order of first appearance.
    pub fn from_raw(labels: &[usize]) -> Self {
        let labels = crate::data::densify(labels);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub kmeans_max_iter: usize,
    pub affinity: AffinityConfig,
    /// `None` selects the median pairwise distance.
    pub kernel_width: Option<f64>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            kmeans_max_iter: KMEANS_DEFAULT_MAX_ITER,
            affinity: AffinityConfig::default(),
            kernel_width: None,
        }
    }
}

/// The three clustering partitions, always in this order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub kmeans: Partition,
    pub affinity: Partition,
    pub spectral: Partition,
}

impl Ensemble {
    pub const NAMES: [&'static str; 3] = ["kmeans", "affinity_propagation", "spectral"];

    pub fn as_array(&self) -> [&Partition; 3] {
        [&self.kmeans, &self.affinity, &self.spectral]
    }
}

/// Runs k-means, affinity propagation and spectral clustering on the same data.
pub fn run_ensemble(data: &DataMatrix, k: usize, seed: u64, cfg: &EnsembleConfig) -> Result<Ensemble> {
    let km = kmeans(data, k, seed, cfg.kmeans_max_iter)?;
    let ap = affinity_propagation(data, &cfg.affinity)?;
    let sc = spectral_clustering(
        data,
        &SpectralConfig {
            k,
            kernel_width: cfg.kernel_width,
            seed,
        },
    )?;
    Ok(Ensemble {
        kmeans: km,
        affinity: ap,
        spectral: sc,
    })
}

pub(crate) fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
