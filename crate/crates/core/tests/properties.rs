mod common;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mirbm_core::cluster::Partition;
use mirbm_core::data::DataMatrix;
use mirbm_core::guided::{guidance_gradient, l_data};
use mirbm_core::metrics::{accuracy, evaluate, fmi, jaccard, purity, LabeledPair};
use mirbm_core::rbm::{energy, hidden_prob, sigmoid, visible_prob_binary, HiddenBatch, RbmParams, VisibleKind};
use mirbm_core::voting::{unanimous_vote, LocalClusterPartition};

use common::*;

fn labels(n: std::ops::RangeInclusive<usize>, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n).prop_map(|raw| mirbm_core::data::densify(&raw))
}

fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| perm[l]).collect()
}

fn perm_of(k: usize, seed: u64) -> Vec<usize> {
    let all = injections(k, k);
    all[(seed as usize) % all.len()].clone()
}

fn params_strategy(d: usize, h: usize) -> impl Strategy<Value = RbmParams> {
    (
        prop::collection::vec(-2.0..2.0f64, d * h),
        prop::collection::vec(-1.0..1.0f64, d),
        prop::collection::vec(-1.0..1.0f64, h),
    )
        .prop_map(move |(w, a, b)| {
            RbmParams::new(
                Array2::from_shape_vec((d, h), w).unwrap(),
                Array1::from(a),
                Array1::from(b),
                VisibleKind::GaussianUnitVariance,
            )
            .unwrap()
        })
}

proptest! {
    #[test]
    fn metrics_ignore_relabeling(
        (truth, pred) in (1usize..=12).prop_flat_map(|n| (labels(n..=n, 4), labels(n..=n, 4))),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let pt = perm_of(n_labels(&truth), s1);
        let pp = perm_of(n_labels(&pred), s2);
        let (t2, p2) = (relabel(&truth, &pt), relabel(&pred, &pp));
        prop_assert_eq!(evaluate(&truth, &pred).unwrap(), evaluate(&t2, &p2).unwrap());
    }

    #[test]
    fn hungarian_accuracy_matches_brute_force(
        (truth, pred) in (1usize..=10).prop_flat_map(|n| (labels(n..=n, 5), labels(n..=n, 5))),
    ) {
        let pair = LabeledPair::new(&truth, &pred).unwrap();
        let expected = brute_force_matches(&truth, &pred) as f64 / truth.len() as f64;
        prop_assert_eq!(accuracy(&pair), expected);
    }

    #[test]
    fn pair_indices_are_ordered_and_bounded(
        (truth, pred) in (2usize..=15).prop_flat_map(|n| (labels(n..=n, 4), labels(n..=n, 4))),
    ) {
        let pair = LabeledPair::new(&truth, &pred).unwrap();
        if let (Ok(f), Ok(j)) = (fmi(&pair), jaccard(&pair)) {
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(j <= f + 1e-15);
        }
        let p = purity(&pair);
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!(accuracy(&pair) <= p + 1e-15);
    }

    #[test]
    fn probabilities_stay_open_interval(
        params in params_strategy(3, 4),
        rows in prop::collection::vec(-50.0..50.0f64, 3 * 5),
    ) {
        let v = DataMatrix::new(Array2::from_shape_vec((5, 3), rows).unwrap()).unwrap();
        let h = hidden_prob(&params, &v).unwrap();
        prop_assert!(h.values.iter().all(|&p| p > 0.0 && p < 1.0));
        let mut binary = params.clone();
        binary.visible_kind = VisibleKind::Binary;
        let scaled = HiddenBatch::probabilities(h.values.mapv(|p| p * 100.0));
        let vp = visible_prob_binary(&binary, &scaled).unwrap();
        prop_assert!(vp.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn sigmoid_is_monotone_and_bounded(x in -800.0..800.0f64, dx in 0.0..5.0f64) {
        let (a, b) = (sigmoid(x), sigmoid(x + dx));
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(a <= b);
    }

    #[test]
    fn energy_invariant_under_hidden_permutation(
        params in params_strategy(3, 4),
        v in prop::collection::vec(-2.0..2.0f64, 3),
        h in prop::collection::vec(prop::bool::ANY, 4),
        seed in any::<u64>(),
    ) {
        let perm = perm_of(4, seed);
        let mut permuted = params.clone();
        for j in 0..4 {
            permuted.hidden_bias[perm[j]] = params.hidden_bias[j];
            for i in 0..3 {
                permuted.weights[[i, perm[j]]] = params.weights[[i, j]];
            }
        }
        let h: Vec<f64> = h.into_iter().map(f64::from).collect();
        let mut hp = vec![0.0; 4];
        for j in 0..4 {
            hp[perm[j]] = h[j];
        }
        let e1 = energy(&params, Array1::from(v.clone()).view(), Array1::from(h).view()).unwrap();
        let e2 = energy(&permuted, Array1::from(v).view(), Array1::from(hp).view()).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.abs().max(1.0));
    }

    #[test]
    fn vote_ignores_order_of_non_reference_partitions(
        (a, b, c) in (6usize..=20).prop_flat_map(|n| (labels(n..=n, 3), labels(n..=n, 3), labels(n..=n, 3))),
    ) {
        let p: Vec<Partition> = [a, b, c].iter().map(|l| Partition::from_raw(l)).collect();
        let x = unanimous_vote([&p[0], &p[1], &p[2]], 0, 2);
        let y = unanimous_vote([&p[0], &p[2], &p[1]], 0, 2);
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one order failed and the other did not"),
        }
    }

    #[test]
    fn penalty_matches_double_loop_oracle(
        params in params_strategy(4, 3),
        rows in prop::collection::vec(-2.0..2.0f64, 4 * 12),
        seed in any::<u64>(),
    ) {
        let x = Array2::from_shape_vec((12, 4), rows).unwrap();
        let data = DataMatrix::new(x.clone()).unwrap().assume_standardized();
        let lcp = random_lcp(12, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        let fast = l_data(&params, &data, &lcp).unwrap();
        let slow = naive_penalty(&params, &x, &lcp);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "{} vs {}", fast, slow);
    }

    #[test]
    fn gradient_ignores_lcp_cluster_order(
        params in params_strategy(4, 3),
        rows in prop::collection::vec(-2.0..2.0f64, 4 * 12),
        seed in any::<u64>(),
    ) {
        let data = DataMatrix::new(Array2::from_shape_vec((12, 4), rows).unwrap())
            .unwrap()
            .assume_standardized();
        let lcp = random_lcp(12, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut reversed = lcp.clusters().to_vec();
        reversed.reverse();
        let lcp2 = LocalClusterPartition::new(reversed, 12).unwrap();
        let g1 = guidance_gradient(&params, &data, &lcp).unwrap();
        let g2 = guidance_gradient(&params, &data, &lcp2).unwrap();
        for (a, b) in g1.weights.iter().zip(g2.weights.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3));
        }
        for (a, b) in g1.hidden_bias.iter().zip(g2.hidden_bias.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3));
        }
    }
}
