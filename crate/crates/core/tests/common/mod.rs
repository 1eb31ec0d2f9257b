//! Independent reference implementations shared by the integration tests.
//! Everything here is written as directly as possible, with no reuse of the
//! library's internals.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;

use mirbm_core::rbm::RbmParams;
use mirbm_core::voting::LocalClusterPartition;

pub fn naive_sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// h_j(x) = σ(b_j + Σ_i x_i w_ij)
pub fn naive_hidden(params: &RbmParams, x: &[f64]) -> Vec<f64> {
    (0..params.n_hidden())
        .map(|j| {
            let mut z = 0.0;
            for (i, xi) in x.iter().enumerate() {
                z += xi * params.weights[[i, j]];
            }
            naive_sigmoid(params.hidden_bias[j] + z)
        })
        .collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The guidance penalty on a fixed visible set, as an explicit double loop
/// over within-cluster pairs and over center pairs.
pub fn naive_penalty(params: &RbmParams, x: &Array2<f64>, lcp: &LocalClusterPartition) -> f64 {
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut within = 0.0;
    let mut n_h = 0usize;
    let mut codes = Vec::new();
    for members in lcp.clusters() {
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                let ha = naive_hidden(params, &rows[members[a]]);
                let hb = naive_hidden(params, &rows[members[b]]);
                within += sq(&ha, &hb);
                n_h += 1;
            }
        }
        let mut center = vec![0.0; x.ncols()];
        for &s in members {
            for (c, v) in center.iter_mut().zip(&rows[s]) {
                *c += v;
            }
        }
        for c in center.iter_mut() {
            *c /= members.len() as f64;
        }
        codes.push(naive_hidden(params, &center));
    }
    let mut between = 0.0;
    let mut n_c = 0usize;
    for p in 0..codes.len() {
        for q in p + 1..codes.len() {
            between += sq(&codes[p], &codes[q]);
            n_c += 1;
        }
    }
    within / n_h as f64 - between / n_c as f64
}

/// Random LCP over `n` instances with `k` clusters of at least two members;
/// roughly a quarter of the instances stay uncovered.
pub fn random_lcp<R: Rng>(n: usize, k: usize, rng: &mut R) -> LocalClusterPartition {
    assert!(n >= 2 * k);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut clusters = vec![Vec::new(); k];
    for c in 0..k {
        clusters[c].push(order[2 * c]);
        clusters[c].push(order[2 * c + 1]);
    }
    for &i in &order[2 * k..] {
        if rng.random::<f64>() < 0.75 {
            clusters[rng.random_range(0..k)].push(i);
        }
    }
    LocalClusterPartition::new(clusters, n).unwrap()
}

/// All labelings of `n` items with at most `k_max` labels, in restricted
/// growth form (dense from 0, labels introduced in order).
pub fn all_partitions(n: usize, k_max: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, k_max: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for l in 0..=used.min(k_max - 1) {
            prefix.push(l);
            rec(prefix, n, k_max, used.max(l + 1), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, k_max, 0, &mut out);
    out
}

pub fn n_labels(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// All injective maps from `0..from` into `0..to`.
pub fn injections(from: usize, to: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, from: usize, to: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == from {
            out.push(cur.clone());
            return;
        }
        for t in 0..to {
            if !cur.contains(&t) {
                cur.push(t);
                rec(cur, from, to, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), from, to, &mut out);
    out
}

/// Best number of agreements over every one-to-one label map.
pub fn brute_force_matches(truth: &[usize], pred: &[usize]) -> usize {
    let (kt, kp) = (n_labels(truth), n_labels(pred));
    let count = |f: &dyn Fn(usize, usize) -> bool| {
        truth.iter().zip(pred).filter(|(&t, &p)| f(t, p)).count()
    };
    if kp <= kt {
        injections(kp, kt)
            .iter()
            .map(|m| count(&|t, p| m[p] == t))
            .max()
            .unwrap_or(0)
    } else {
        injections(kt, kp)
            .iter()
            .map(|m| count(&|t, p| m[t] == p))
            .max()
            .unwrap_or(0)
    }
}

/// (tp, fp, fn, tn) by enumerating every unordered pair.
pub fn brute_pair_counts(truth: &[usize], pred: &[usize]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for a in 0..truth.len() {
        for b in a + 1..truth.len() {
            match (truth[a] == truth[b], pred[a] == pred[b]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, fn_, tn)
}

pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(1e-4))
        .fold(0.0, f64::max)
}
