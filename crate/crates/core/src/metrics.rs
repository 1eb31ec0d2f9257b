//! External clustering indices against ground-truth labels: accuracy under
//! the best one-to-one label map, purity, and the pair-counting
//! Fowlkes–Mallows and Jaccard indices.

use serde::{Deserialize, Serialize};

use crate::assignment::{contingency, matched_weight};
use crate::error::{Error, Result};

/// Ground truth and predicted labels over the same instances, both dense from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPair<'a> {
    truth: &'a [usize],
    predicted: &'a [usize],
    k_truth: usize,
    k_pred: usize,
}

impl<'a> LabeledPair<'a> {
    pub fn new(truth: &'a [usize], predicted: &'a [usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::contract(format!(
                "truth has {} labels, prediction {}",
                truth.len(),
                predicted.len()
            )));
        }
        if truth.is_empty() {
            return Err(Error::contract("empty labeling"));
        }
        Ok(Self {
            truth,
            predicted,
            k_truth: dense_k(truth, "truth")?,
            k_pred: dense_k(predicted, "predicted")?,
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Rows are predicted clusters, columns truth classes.
    fn table(&self) -> Vec<Vec<i64>> {
        contingency(self.predicted, self.k_pred, self.truth, self.k_truth)
    }
}

fn dense_k(labels: &[usize], what: &str) -> Result<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; k];
    for &l in labels {
        seen[l] = true;
    }
    if let Some(gap) = seen.iter().position(|s| !s) {
        return Err(Error::contract(format!(
            "{what} labels are not dense: {gap} unused below {k}"
        )));
    }
    Ok(k)
}

/// Unordered instance-pair agreement counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    /// same truth, same prediction
    pub tp: u64,
    /// different truth, same prediction
    pub fp: u64,
    /// same truth, different prediction
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Fraction of instances correctly labeled under the best one-to-one map
/// from predicted clusters to classes.
pub fn accuracy(pair: &LabeledPair) -> f64 {
    matched_weight(&pair.table()) as f64 / pair.len() as f64
}

/// (1/n) Σ over predicted clusters of the majority-class count.
pub fn purity(pair: &LabeledPair) -> f64 {
    let majority: i64 = pair
        .table()
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    majority as f64 / pair.len() as f64
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Pair counts from contingency marginals in O(N + K_t·K_p).
pub fn pair_counts(pair: &LabeledPair) -> PairCounts {
    let table = pair.table();
    let n = pair.len() as u64;
    let same_both: u64 = table.iter().flatten().map(|&c| choose2(c as u64)).sum();
    let same_pred: u64 = table
        .iter()
        .map(|row| choose2(row.iter().sum::<i64>() as u64))
        .sum();
    let same_truth: u64 = (0..pair.k_truth)
        .map(|t| choose2(table.iter().map(|row| row[t]).sum::<i64>() as u64))
        .sum();
    let tp = same_both;
    let fp = same_pred - tp;
    let fn_ = same_truth - tp;
    PairCounts {
        tp,
        fp,
        fn_,
        tn: choose2(n) - tp - fp - fn_,
    }
}

/// sqrt(precision · recall) over instance pairs.
pub fn fmi(pair: &LabeledPair) -> Result<f64> {
    let c = pair_counts(pair);
    if c.tp + c.fp == 0 || c.tp + c.fn_ == 0 {
        return Err(Error::MetricUndefined("FMI needs a same-cluster and a same-class pair"));
    }
    let precision = c.tp as f64 / (c.tp + c.fp) as f64;
    let recall = c.tp as f64 / (c.tp + c.fn_) as f64;
    Ok((precision * recall).sqrt())
}

/// tp / (tp + fn + fp) over instance pairs.
pub fn jaccard(pair: &LabeledPair) -> Result<f64> {
    let c = pair_counts(pair);
    let denom = c.tp + c.fn_ + c.fp;
    if denom == 0 {
        return Err(Error::MetricUndefined("Jaccard needs at least one co-clustered pair"));
    }
    Ok(c.tp as f64 / denom as f64)
}

/// All four indices for one labeling; undefined pair indices are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub purity: f64,
    pub fmi: Option<f64>,
    pub jaccard: Option<f64>,
}

pub fn evaluate(truth: &[usize], predicted: &[usize]) -> Result<EvalReport> {
    let pair = LabeledPair::new(truth, predicted)?;
    Ok(EvalReport {
        accuracy: accuracy(&pair),
        purity: purity(&pair),
        fmi: fmi(&pair).ok(),
        jaccard: jaccard(&pair).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair<'a>(t: &'a [usize], p: &'a [usize]) -> LabeledPair<'a> {
        LabeledPair::new(t, p).unwrap()
    }

    #[test]
    fn perfect_and_permuted_predictions() {
        let t = [0, 0, 1, 1, 2, 2];
        let p = [2, 2, 0, 0, 1, 1];
        for pred in [&t, &p] {
            let pr = pair(&t, pred);
            assert_eq!(accuracy(&pr), 1.0);
            assert_eq!(purity(&pr), 1.0);
            assert_eq!(fmi(&pr).unwrap(), 1.0);
            assert_eq!(jaccard(&pr).unwrap(), 1.0);
        }
    }

    #[test]
    fn accuracy_hand_case() {
        let pr = pair(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 1, 0]);
        assert!((accuracy(&pr) - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn purity_hand_cases() {
        // clusters {a,a,b} and {b,b}
        let pr = pair(&[0, 0, 1, 1, 1], &[0, 0, 0, 1, 1]);
        assert!((purity(&pr) - 0.8).abs() < 1e-15);
        let pr = pair(&[0, 0, 1, 1, 2, 2], &[0; 6]);
        assert!((purity(&pr) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pair_count_hand_cases() {
        let c = pair_counts(&pair(&[0, 0], &[0, 0]));
        assert_eq!(c, PairCounts { tp: 1, fp: 0, fn_: 0, tn: 0 });
        let c = pair_counts(&pair(&[0, 1, 2], &[0, 1, 2]));
        assert_eq!(c, PairCounts { tp: 0, fp: 0, fn_: 0, tn: 3 });
    }

    #[test]
    fn crossed_labeling_scores_zero() {
        let pr = pair(&[0, 0, 1, 1], &[0, 1, 0, 1]);
        let c = pair_counts(&pr);
        assert_eq!((c.tp, c.fp, c.fn_), (0, 2, 2));
        assert_eq!(fmi(&pr).unwrap(), 0.0);
        assert_eq!(jaccard(&pr).unwrap(), 0.0);
    }

    #[test]
    fn undefined_indices() {
        let pr = pair(&[0, 1, 2], &[0, 1, 2]);
        assert!(matches!(fmi(&pr), Err(Error::MetricUndefined(_))));
        assert!(matches!(jaccard(&pr), Err(Error::MetricUndefined(_))));
        let r = evaluate(&[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(r.fmi, None);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(LabeledPair::new(&[0, 1], &[0]).is_err());
        assert!(LabeledPair::new(&[0, 2], &[0, 1]).is_err());
        assert!(LabeledPair::new(&[], &[]).is_err());
    }
}
