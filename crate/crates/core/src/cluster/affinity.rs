//! Affinity propagation (responsibility/availability message passing).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{sq_dist, Partition};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityConfig {
    pub damping: f64,
    pub preference: Preference,
    pub max_iter: usize,
    pub convergence_window: usize,
    /// When the exemplar set never stabilizes (message oscillation), rerun
    /// with the damping raised in steps of 0.1, up to 0.9.
    pub escalate_damping: bool,
}

impl Default for AffinityConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            preference: Preference::Median,
            max_iter: 200,
            convergence_window: 15,
            escalate_damping: true,
        }
    }
}

impl AffinityConfig {
    fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(Error::contract(format!(
                "damping {} outside [0.5, 1)",
                self.damping
            )));
        }
        if self.convergence_window < 1 || self.max_iter < self.convergence_window {
            return Err(Error::contract(
                "need max_iter >= convergence_window >= 1",
            ));
        }
        if let Preference::Value(p) = self.preference {
            if !p.is_finite() {
                return Err(Error::contract("preference must be finite"));
            }
        }
        Ok(())
    }
}

/// Clusters on s(i, j) = −‖x_i − x_j‖². The number of clusters is emergent.
///
/// Data whose rows are all identical yields a single cluster.
pub fn affinity_propagation(data: &DataMatrix, cfg: &AffinityConfig) -> Result<Partition> {
    cfg.validate()?;
    let x = data.values();
    let n = x.nrows();
    if n == 0 {
        return Err(Error::contract("affinity propagation needs at least one row"));
    }
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let d = -sq_dist(x.row(i), x.row(j));
            s[[i, j]] = d;
            s[[j, i]] = d;
        }
    }
    if s.iter().all(|&v| v == 0.0) {
        return Ok(Partition::from_raw(&vec![0; n]));
    }
    let pref = match cfg.preference {
        Preference::Median => median_off_diagonal(&s),
        Preference::Value(p) => p,
    };
    for i in 0..n {
        s[[i, i]] = pref;
    }
    affinity_propagation_similarity(s, cfg)
}

/// Message passing on a precomputed similarity matrix whose diagonal holds
/// the preferences.
///
/// When every off-diagonal similarity and every preference coincide the
/// messages never leave zero; that case is resolved directly: one cluster if
/// the preference is below the similarity, singletons otherwise.
pub fn affinity_propagation_similarity(s: Array2<f64>, cfg: &AffinityConfig) -> Result<Partition> {
    cfg.validate()?;
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::contract("similarity matrix must be square"));
    }
    if n == 1 {
        return Ok(Partition::from_raw(&[0]));
    }
    if let Some((sim, pref)) = uniform_similarities(&s) {
        let labels: Vec<usize> = if pref < sim { vec![0; n] } else { (0..n).collect() };
        return Ok(Partition::from_raw(&labels));
    }

    let mut damping = cfg.damping;
    let (mut exemplars, mut converged) = pass_messages(&s, damping, cfg);
    while !converged && cfg.escalate_damping && damping < 0.85 {
        damping = (damping + 0.1).min(0.9);
        log::debug!("affinity propagation oscillating, retrying with damping {damping:.1}");
        (exemplars, converged) = pass_messages(&s, damping, cfg);
    }
    if !converged {
        log::warn!("affinity propagation did not converge; using last exemplar set");
    }

    if exemplars.is_empty() {
        return Err(Error::DegenerateClustering(
            "affinity propagation produced no exemplar".into(),
        ));
    }
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if let Some(pos) = exemplars.iter().position(|&e| e == i) {
                return pos;
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (c, &e) in exemplars.iter().enumerate() {
                if s[[i, e]] > best.1 {
                    best = (c, s[[i, e]]);
                }
            }
            best.0
        })
        .collect();
    Ok(Partition::from_raw(&labels))
}

/// Runs the message updates at a fixed damping. Returns the final exemplar
/// indices and whether they were stable for `convergence_window` iterations.
fn pass_messages(s: &Array2<f64>, lambda: f64, cfg: &AffinityConfig) -> (Vec<usize>, bool) {
    let n = s.nrows();
    let mut r = Array2::<f64>::zeros((n, n));
    let mut a = Array2::<f64>::zeros((n, n));
    let mut last: Option<Vec<bool>> = None;
    let mut stable = 0usize;
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        for i in 0..n {
            let (mut first, mut first_k, mut second) =
                (f64::NEG_INFINITY, 0usize, f64::NEG_INFINITY);
            for k in 0..n {
                let v = a[[i, k]] + s[[i, k]];
                if v > first {
                    second = first;
                    first = v;
                    first_k = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == first_k { second } else { first };
                let fresh = s[[i, k]] - competitor;
                r[[i, k]] = lambda * r[[i, k]] + (1.0 - lambda) * fresh;
            }
        }

        for k in 0..n {
            let mut support = 0.0;
            for i in 0..n {
                if i != k {
                    support += r[[i, k]].max(0.0);
                }
            }
            for i in 0..n {
                let fresh = if i == k {
                    support
                } else {
                    (r[[k, k]] + support - r[[i, k]].max(0.0)).min(0.0)
                };
                a[[i, k]] = lambda * a[[i, k]] + (1.0 - lambda) * fresh;
            }
        }

        let exemplars: Vec<bool> = (0..n).map(|k| a[[k, k]] + r[[k, k]] > 0.0).collect();
        if last.as_ref() == Some(&exemplars) {
            stable += 1;
        } else {
            stable = 1;
        }
        let any = exemplars.iter().any(|&e| e);
        last = Some(exemplars);
        if any && stable >= cfg.convergence_window {
            converged = true;
            break;
        }
    }

    let exemplars = last
        .unwrap_or_default()
        .iter()
        .enumerate()
        .filter_map(|(k, &e)| e.then_some(k))
        .collect();
    (exemplars, converged)
}

fn median_off_diagonal(s: &Array2<f64>) -> f64 {
    let n = s.nrows();
    let mut vals: Vec<f64> = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                vals.push(s[[i, j]]);
            }
        }
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    if m % 2 == 1 {
        vals[m / 2]
    } else {
        0.5 * (vals[m / 2 - 1] + vals[m / 2])
    }
}

fn uniform_similarities(s: &Array2<f64>) -> Option<(f64, f64)> {
    let n = s.nrows();
    let sim = s[[0, 1]];
    let pref = s[[0, 0]];
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { pref } else { sim };
            if s[[i, j]] != expected {
                return None;
            }
        }
    }
    Some((sim, pref))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{gaussian_blobs, BlobSpec};
    use ndarray::array;

    #[test]
    fn two_distinct_points_are_two_exemplars() {
        let data = DataMatrix::new(array![[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let p = affinity_propagation(&data, &AffinityConfig::default()).unwrap();
        assert_eq!(p.k(), 2);
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let data = DataMatrix::new(Array2::from_elem((5, 2), 3.0)).unwrap();
        let p = affinity_propagation(&data, &AffinityConfig::default()).unwrap();
        assert_eq!(p.k(), 1);
        assert_eq!(p.len(), 5);
    }

    #[test]
    fn three_blobs_three_clusters() {
        let spec = BlobSpec {
            n_per_blob: 30,
            dim: 2,
            n_blobs: 3,
            spread: 0.1,
            center_distance: 10.0,
        };
        let blobs = gaussian_blobs(&spec, 4);
        let data = DataMatrix::new(blobs.values).unwrap();
        let p = affinity_propagation(&data, &AffinityConfig::default()).unwrap();
        assert_eq!(p.labels(), Partition::from_raw(&blobs.labels).labels());
    }

    #[test]
    fn shift_of_all_similarities_is_irrelevant() {
        let spec = BlobSpec {
            n_per_blob: 12,
            dim: 3,
            n_blobs: 3,
            spread: 0.8,
            center_distance: 4.0,
        };
        let blobs = gaussian_blobs(&spec, 17);
        let x = &blobs.values;
        let n = x.nrows();
        let mut s = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                s[[i, j]] = -sq_dist(x.row(i), x.row(j));
            }
        }
        let pref = median_off_diagonal(&s);
        for i in 0..n {
            s[[i, i]] = pref;
        }
        let cfg = AffinityConfig::default();
        let base = affinity_propagation_similarity(s.clone(), &cfg).unwrap();
        let shifted = affinity_propagation_similarity(s.mapv(|v| v + 8.0), &cfg).unwrap();
        assert_eq!(base, shifted);
    }

    #[test]
    fn rejects_bad_config() {
        let data = DataMatrix::new(array![[0.0], [1.0]]).unwrap();
        let mut cfg = AffinityConfig {
            damping: 0.3,
            ..AffinityConfig::default()
        };
        assert!(affinity_propagation(&data, &cfg).is_err());
        cfg.damping = 0.5;
        cfg.convergence_window = 0;
        assert!(affinity_propagation(&data, &cfg).is_err());
    }

    #[test]
    fn no_exemplar_is_degenerate() {
        let data = DataMatrix::new(array![[0.0], [1.0], [5.0], [5.5]]).unwrap();
        let cfg = AffinityConfig {
            preference: Preference::Value(-1e9),
            max_iter: 1,
            convergence_window: 1,
            escalate_damping: false,
            ..AffinityConfig::default()
        };
        assert!(matches!(
            affinity_propagation(&data, &cfg),
            Err(Error::DegenerateClustering(_))
        ));
    }
}
