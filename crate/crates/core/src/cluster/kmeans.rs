//! Lloyd's k-means with k-means++ seeding.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sq_dist, Partition};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    pub centers: Array2<f64>,
    /// Within-cluster sum of squares after each center update.
    pub inertia_history: Vec<f64>,
    pub converged: bool,
    /// Number of empty-cluster repairs performed.
    pub repairs: usize,
}

pub fn kmeans(data: &DataMatrix, k: usize, seed: u64, max_iter: usize) -> Result<Partition> {
    Ok(kmeans_fit(data.values().view(), k, seed, max_iter)?.partition)
}

/// Runs Lloyd iterations until the assignment stops changing or `max_iter`
/// is reached. An empty cluster takes over the point farthest from its
/// current center, so the result always has exactly `k` clusters.
pub fn kmeans_fit(x: ArrayView2<f64>, k: usize, seed: u64, max_iter: usize) -> Result<KMeansFit> {
    let n = x.nrows();
    if k < 2 {
        return Err(Error::contract(format!("k-means needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::contract(format!("k = {k} exceeds {n} instances")));
    }
    if max_iter == 0 {
        return Err(Error::contract("max_iter must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_seeds(x, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut repairs = 0;

    for _ in 0..max_iter {
        let mut next: Vec<usize> = (0..n).map(|i| nearest(x, &centers, i).0).collect();
        repairs += repair_empty(x, &centers, &mut next, k);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
        update_centers(x, &labels, &mut centers);
        let inertia = inertia(x, &centers, &labels);
        if let Some(&prev) = history.last() {
            debug_assert!(
                inertia <= prev + 1e-9 * prev.abs().max(1.0),
                "k-means objective increased: {prev} -> {inertia}"
            );
        }
        history.push(inertia);
    }

    Ok(KMeansFit {
        partition: Partition::new(labels, k)?,
        centers,
        inertia_history: history,
        converged,
        repairs,
    })
}

/// Greedy k-means++: each new center is the best of `2 + ln k` D²-weighted
/// candidates, judged by the resulting potential.
fn plus_plus_seeds<R: Rng>(x: ArrayView2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let n = x.nrows();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            let pick = (0..n).find(|i| !chosen.contains(i)).unwrap_or(0);
            chosen.push(pick);
            continue;
        }
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = weighted_pick(&d2, rng.random::<f64>() * total);
            let next: Vec<f64> = d2
                .iter()
                .enumerate()
                .map(|(i, &d)| d.min(sq_dist(x.row(i), x.row(cand))))
                .collect();
            let potential: f64 = next.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.1) {
                best = Some((cand, potential, next));
            }
        }
        let (pick, _, next) = best.expect("at least one trial");
        chosen.push(pick);
        d2 = next;
    }
    let mut centers = Array2::zeros((k, x.ncols()));
    for (c, &i) in chosen.iter().enumerate() {
        centers.row_mut(c).assign(&x.row(i));
    }
    centers
}

fn weighted_pick(d2: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    for (i, &d) in d2.iter().enumerate() {
        acc += d;
        if d > 0.0 && acc >= target {
            return i;
        }
    }
    // rounding can leave `target` just above the final sum
    d2.iter().rposition(|&d| d > 0.0).unwrap_or(0)
}

/// Nearest center (lowest index on ties) and its squared distance.
fn nearest(x: ArrayView2<f64>, centers: &Array2<f64>, i: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.rows().into_iter().enumerate() {
        let d = sq_dist(x.row(i), center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn repair_empty(x: ArrayView2<f64>, centers: &Array2<f64>, labels: &mut [usize], k: usize) -> usize {
    let mut repairs = 0;
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let d = sq_dist(x.row(i), centers.row(l));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n guarantees a cluster with two or more points");
        sizes[labels[i]] -= 1;
        labels[i] = empty;
        sizes[empty] = 1;
        repairs += 1;
    }
    repairs
}

fn update_centers(x: ArrayView2<f64>, labels: &[usize], centers: &mut Array2<f64>) {
    let mut counts = vec![0usize; centers.nrows()];
    centers.fill(0.0);
    for (i, &l) in labels.iter().enumerate() {
        let mut row = centers.row_mut(l);
        row += &x.row(i);
        counts[l] += 1;
    }
    for (mut row, &c) in centers.rows_mut().into_iter().zip(&counts) {
        if c > 0 {
            row /= c as f64;
        }
    }
}

fn inertia(x: ArrayView2<f64>, centers: &Array2<f64>, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x.row(i), centers.row(l)))
        .sum()
}
