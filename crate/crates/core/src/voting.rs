//! Label alignment across base partitions and unanimous voting into a
//! local cluster partition (LCP).

use serde::{Deserialize, Serialize};

use crate::assignment::{contingency, max_weight_matching};
use crate::cluster::Partition;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 2;

/// `other` relabeled into the reference label space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aligned {
    pub labels: Vec<usize>,
    /// `mapping[c]` is the reference label assigned to `other` cluster `c`.
    pub mapping: Vec<usize>,
}

/// Maps the clusters of `other` onto reference labels.
///
/// With no more clusters than the reference the mapping is the
/// maximum-overlap one-to-one assignment. Otherwise each cluster goes to the
/// reference cluster it overlaps most (lowest label on ties), so several
/// clusters may share a reference label.
pub fn align_partition(reference: &Partition, other: &Partition) -> Result<Aligned> {
    if reference.len() != other.len() {
        return Err(Error::contract(format!(
            "cannot align partitions of length {} and {}",
            reference.len(),
            other.len()
        )));
    }
    let table = contingency(other.labels(), other.k(), reference.labels(), reference.k());
    let mapping: Vec<usize> = if other.k() <= reference.k() {
        max_weight_matching(&table)
            .into_iter()
            .map(|m| m.expect("every row is matched when rows <= columns"))
            .collect()
    } else {
        table
            .iter()
            .map(|row| {
                let mut best = 0;
                for (r, &count) in row.iter().enumerate() {
                    if count > row[best] {
                        best = r;
                    }
                }
                best
            })
            .collect()
    };
    let labels = other.labels().iter().map(|&l| mapping[l]).collect();
    Ok(Aligned { labels, mapping })
}

/// K disjoint clusters of instance indices over a subset of `0..n_total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalClusterPartition {
    clusters: Vec<Vec<usize>>,
    n_total: usize,
}

impl LocalClusterPartition {
    /// Validates disjointness, index range, K >= 2 and sizes >= 2.
    pub fn new(mut clusters: Vec<Vec<usize>>, n_total: usize) -> Result<Self> {
        if clusters.len() < 2 {
            return Err(Error::InsufficientConsensus {
                surviving: clusters.len(),
            });
        }
        let mut seen = vec![false; n_total];
        for (c, members) in clusters.iter_mut().enumerate() {
            if members.len() < 2 {
                return Err(Error::contract(format!(
                    "LCP cluster {c} has {} member(s), need at least 2",
                    members.len()
                )));
            }
            members.sort_unstable();
            for &i in members.iter() {
                if i >= n_total {
                    return Err(Error::contract(format!("instance {i} outside 0..{n_total}")));
                }
                if seen[i] {
                    return Err(Error::contract(format!("instance {i} in two LCP clusters")));
                }
                seen[i] = true;
            }
        }
        Ok(Self { clusters, n_total })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn covered(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Per-instance cluster index, `None` for uncovered instances.
    pub fn membership(&self) -> Vec<Option<usize>> {
        let mut m = vec![None; self.n_total];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                m[i] = Some(c);
            }
        }
        m
    }

    pub fn stats(&self) -> LcpStats {
        lcp_stats(self)
    }
}

/// Keeps the instances on which all three aligned partitions agree.
///
/// Partitions are aligned to `partitions[reference_index]`. Clusters with
/// fewer than `min_cluster_size` members are dropped and the rest renumbered
/// densely in order of their reference label.
pub fn unanimous_vote(
    partitions: [&Partition; 3],
    reference_index: usize,
    min_cluster_size: usize,
) -> Result<LocalClusterPartition> {
    if reference_index >= 3 {
        return Err(Error::contract(format!(
            "reference index {reference_index} outside 0..3"
        )));
    }
    if min_cluster_size < 2 {
        return Err(Error::contract("min_cluster_size must be >= 2"));
    }
    let reference = partitions[reference_index];
    let n = reference.len();
    let aligned: Vec<Vec<usize>> = partitions
        .iter()
        .map(|p| align_partition(reference, p).map(|a| a.labels))
        .collect::<Result<_>>()?;

    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); reference.k()];
    for i in 0..n {
        let label = aligned[0][i];
        if aligned[1][i] == label && aligned[2][i] == label {
            by_label[label].push(i);
        }
    }
    let clusters: Vec<Vec<usize>> = by_label
        .into_iter()
        .filter(|c| c.len() >= min_cluster_size)
        .collect();
    LocalClusterPartition::new(clusters, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpStats {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub covered: usize,
    pub coverage: f64,
    /// Unordered within-cluster pairs, Σ m(m−1)/2.
    pub within_pairs: usize,
    /// Unordered center pairs, K(K−1)/2.
    pub center_pairs: usize,
}

pub fn lcp_stats(lcp: &LocalClusterPartition) -> LcpStats {
    let sizes: Vec<usize> = lcp.clusters.iter().map(Vec::len).collect();
    let covered = sizes.iter().sum();
    let k = sizes.len();
    LcpStats {
        k,
        within_pairs: sizes.iter().map(|m| m * (m - 1) / 2).sum(),
        center_pairs: k * (k - 1) / 2,
        coverage: if lcp.n_total == 0 {
            0.0
        } else {
            covered as f64 / lcp.n_total as f64
        },
        covered,
        sizes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(labels: &[usize]) -> Partition {
        let k = labels.iter().max().unwrap() + 1;
        Partition::new(labels.to_vec(), k).unwrap()
    }

    #[test]
    fn swapped_labels_align_back() {
        let reference = part(&[0, 0, 1, 1, 2, 2]);
        let other = part(&[2, 2, 0, 0, 1, 1]);
        let a = align_partition(&reference, &other).unwrap();
        assert_eq!(a.labels, reference.labels());
        assert_eq!(a.mapping, vec![1, 2, 0]);
        assert_eq!(align_partition(&reference, &reference).unwrap().labels, reference.labels());
    }

    #[test]
    fn finer_partition_maps_many_to_one() {
        let reference = part(&[0, 0, 0, 1, 1, 1]);
        let other = part(&[0, 0, 1, 2, 2, 2]);
        let a = align_partition(&reference, &other).unwrap();
        assert_eq!(a.mapping, vec![0, 0, 1]);
        assert_eq!(a.labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn many_to_one_ties_go_to_lowest_label() {
        let reference = part(&[0, 1, 2, 2]);
        let other = part(&[0, 3, 1, 2]);
        let a = align_partition(&reference, &other).unwrap();
        assert_eq!(a.mapping, vec![0, 2, 2, 1]);

        // other cluster 0 overlaps reference 0 and 1 once each
        let reference = part(&[0, 1, 0, 1, 2]);
        let tie = part(&[0, 0, 1, 2, 3]);
        let a = align_partition(&reference, &tie).unwrap();
        assert_eq!(a.mapping[0], 0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(align_partition(&part(&[0, 1]), &part(&[0, 1, 1])).is_err());
    }

    #[test]
    fn identical_partitions_cover_everything() {
        let p = part(&[0, 1, 0, 1, 2, 2, 2]);
        let lcp = unanimous_vote([&p, &p, &p], 0, 2).unwrap();
        assert_eq!(lcp.covered(), 7);
        assert_eq!(lcp.clusters(), &[vec![0, 2], vec![1, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn single_dissent_drops_that_instance() {
        let shared: Vec<usize> = (0..12).map(|i| i / 4).collect();
        let mut dissent = shared.clone();
        dissent[7] = 0;
        let a = part(&shared);
        let b = part(&dissent);
        let lcp = unanimous_vote([&a, &b, &a], 0, 2).unwrap();
        assert_eq!(lcp.covered(), 11);
        assert_eq!(lcp.membership()[7], None);
        assert_eq!(lcp.clusters()[1], vec![4, 5, 6]);
    }

    #[test]
    fn small_clusters_dropped_and_renumbered() {
        let a = part(&[0, 0, 1, 2, 2]);
        let lcp = unanimous_vote([&a, &a, &a], 0, 2).unwrap();
        assert_eq!(lcp.clusters(), &[vec![0, 1], vec![3, 4]]);
    }

    #[test]
    fn no_consensus_is_an_error() {
        let a = part(&[0, 0, 0, 1, 1, 1]);
        let b = part(&[0, 1, 0, 1, 0, 1]);
        let c = part(&[0, 0, 1, 1, 0, 1]);
        let err = unanimous_vote([&a, &b, &c], 0, 2).unwrap_err();
        assert!(matches!(err, Error::InsufficientConsensus { .. }));
    }

    #[test]
    fn stats_count_pairs() {
        let lcp = LocalClusterPartition::new(vec![vec![0, 1], vec![2, 3, 4]], 6).unwrap();
        let s = lcp_stats(&lcp);
        assert_eq!(s.within_pairs, 4);
        assert_eq!(s.center_pairs, 1);
        assert!((s.coverage - 5.0 / 6.0).abs() < 1e-15);
        let three = LocalClusterPartition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        assert_eq!(three.stats().center_pairs, 3);
    }

    #[test]
    fn lcp_rejects_bad_clusters() {
        assert!(LocalClusterPartition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(LocalClusterPartition::new(vec![vec![0, 1], vec![2]], 3).is_err());
        assert!(LocalClusterPartition::new(vec![vec![0, 1], vec![2, 9]], 3).is_err());
        assert!(LocalClusterPartition::new(vec![vec![0, 1]], 3).is_err());
    }
}
