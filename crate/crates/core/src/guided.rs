//! LCP-guided RBM training.
//!
//! Besides the CD-1 term, each update descends a guidance penalty evaluated
//! on two visible sets, the data `V` and its mean-field reconstruction `Ṽ`:
//!
//! ```text
//! L(X) = (1/N_h) Σ_k Σ_{s<t ∈ k} ‖h(x_s) − h(x_t)‖²  −  (1/N_C) Σ_{p<q} ‖C_p − C_q‖²
//! C_k  = σ(b + O_k W),   O_k = mean of the rows of X in LCP cluster k
//! ```
//!
//! with `N_h` the number of unordered within-cluster pairs and
//! `N_C = K(K−1)/2`. The guidance objective is `L(V) + L(Ṽ)`, where `Ṽ` is
//! treated as a constant when differentiating. The visible bias never enters
//! `L`, so its guidance gradient is zero.
//!
//! Within-cluster pair sums use Σ_{s<t}(a_s − a_t)(g_s − g_t) = M Σ_s (a_s − ā) g_s,
//! so an epoch costs O(N·D·H) rather than O(Σ_k M_k²·D·H).

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rbm::{
    apply_cd1, cd1_statistics, cd1_step, hidden_activations, hidden_prob, reconstruct,
    HiddenBatch, RbmParams, VisibleKind,
};
use crate::voting::LocalClusterPartition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirbmConfig {
    /// Weight of the CD-1 term; the guidance term is weighted by 1 − eta.
    pub eta: f64,
    pub lr_cd: f64,
    pub lr_guidance: f64,
    pub epochs: usize,
    pub hidden_units: usize,
    pub visible_kind: VisibleKind,
    pub seed: u64,
}

impl Default for MirbmConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            lr_cd: 1e-2,
            lr_guidance: 1e-2,
            epochs: 100,
            hidden_units: 16,
            visible_kind: VisibleKind::GaussianUnitVariance,
            seed: 0,
        }
    }
}

impl MirbmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::contract(format!("eta {} outside (0, 1]", self.eta)));
        }
        // lr_cd = 0 is allowed for pure-guidance runs
        if !(self.lr_cd >= 0.0 && self.lr_cd.is_finite()) {
            return Err(Error::contract(format!("lr_cd {} must be >= 0", self.lr_cd)));
        }
        if !(self.lr_guidance > 0.0 && self.lr_guidance.is_finite()) {
            return Err(Error::contract(format!(
                "lr_guidance {} must be > 0",
                self.lr_guidance
            )));
        }
        if self.epochs == 0 {
            return Err(Error::contract("epochs must be >= 1"));
        }
        if self.hidden_units == 0 {
            return Err(Error::contract("hidden_units must be >= 1"));
        }
        Ok(())
    }
}

/// Cluster centers of the data and of its reconstruction, in visible and
/// hidden space.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceContext {
    /// O_k, K×D
    pub visible_centers: Array2<f64>,
    /// Õ_k, K×D
    pub recon_visible_centers: Array2<f64>,
    /// C_k = σ(b + O_k W), K×H
    pub hidden_centers: Array2<f64>,
    /// C̃_k = σ(b + Õ_k W), K×H
    pub recon_hidden_centers: Array2<f64>,
    /// Mean-field reconstruction of every data row, N×D.
    pub reconstruction: Array2<f64>,
}

/// Deterministic reconstruction: hidden probabilities pushed back down.
pub fn mean_field_reconstruction(params: &RbmParams, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let h = hidden_activations(params, x);
    reconstruct(params, &HiddenBatch::probabilities(h))
}

fn check_lcp(params: &RbmParams, data: &DataMatrix, lcp: &LocalClusterPartition) -> Result<()> {
    if lcp.n_total() != data.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "LCP instance count vs data rows",
            expected: data.n_rows(),
            actual: lcp.n_total(),
        });
    }
    if params.n_visible() != data.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "data columns vs visible units",
            expected: params.n_visible(),
            actual: data.n_cols(),
        });
    }
    Ok(())
}

fn cluster_means(x: ArrayView2<f64>, lcp: &LocalClusterPartition) -> Array2<f64> {
    let mut centers = Array2::zeros((lcp.k(), x.ncols()));
    for (k, members) in lcp.clusters().iter().enumerate() {
        let mut row = centers.row_mut(k);
        for &s in members {
            row += &x.row(s);
        }
        row /= members.len() as f64;
    }
    centers
}

pub fn build_guidance(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
) -> Result<GuidanceContext> {
    check_lcp(params, data, lcp)?;
    let reconstruction = mean_field_reconstruction(params, data.values().view())?;
    let visible_centers = cluster_means(data.values().view(), lcp);
    let recon_visible_centers = cluster_means(reconstruction.view(), lcp);
    let hidden_centers = hidden_activations(params, visible_centers.view());
    let recon_hidden_centers = hidden_activations(params, recon_visible_centers.view());
    Ok(GuidanceContext {
        visible_centers,
        recon_visible_centers,
        hidden_centers,
        recon_hidden_centers,
        reconstruction,
    })
}

/// Penalty and its (W, b) gradient for one fixed visible set.
struct SideTerms {
    loss: f64,
    grad_w: Array2<f64>,
    grad_b: Array1<f64>,
}

fn side_terms(
    params: &RbmParams,
    x: ArrayView2<f64>,
    centers: ArrayView2<f64>,
    codes: ArrayView2<f64>,
    lcp: &LocalClusterPartition,
    with_grad: bool,
) -> SideTerms {
    let d = params.n_visible();
    let nh = params.n_hidden();
    let stats = lcp.stats();
    let n_pairs = stats.within_pairs as f64;
    let n_center_pairs = stats.center_pairs as f64;

    let mut grad_w = Array2::zeros(if with_grad { (d, nh) } else { (0, 0) });
    let mut grad_b = Array1::zeros(if with_grad { nh } else { 0 });
    let mut within = 0.0;

    for members in lcp.clusters() {
        let rows = x.select(ndarray::Axis(0), members);
        let h = hidden_activations(params, rows.view());
        let m = members.len() as f64;
        let mean = h.mean_axis(ndarray::Axis(0)).expect("cluster is non-empty");
        let scale = 2.0 * m / n_pairs;
        for s in 0..members.len() {
            for j in 0..nh {
                let dev = h[[s, j]] - mean[j];
                within += m * dev * dev;
                if with_grad {
                    let coef = scale * dev * h[[s, j]] * (1.0 - h[[s, j]]);
                    grad_b[j] += coef;
                    for i in 0..d {
                        grad_w[[i, j]] += coef * rows[[s, i]];
                    }
                }
            }
        }
    }

    let k = codes.nrows();
    let mut between = 0.0;
    for p in 0..k {
        for q in p + 1..k {
            for j in 0..nh {
                let (cp, cq) = (codes[[p, j]], codes[[q, j]]);
                let diff = cp - cq;
                between += diff * diff;
                if with_grad {
                    let (up, uq) = (cp * (1.0 - cp), cq * (1.0 - cq));
                    let scale = 2.0 / n_center_pairs * diff;
                    grad_b[j] -= scale * (up - uq);
                    for i in 0..d {
                        grad_w[[i, j]] -= scale * (up * centers[[p, i]] - uq * centers[[q, i]]);
                    }
                }
            }
        }
    }

    SideTerms {
        loss: within / n_pairs - between / n_center_pairs,
        grad_w,
        grad_b,
    }
}

/// Guidance penalty on the data.
pub fn l_data(params: &RbmParams, data: &DataMatrix, lcp: &LocalClusterPartition) -> Result<f64> {
    let ctx = build_guidance(params, data, lcp)?;
    Ok(side_terms(
        params,
        data.values().view(),
        ctx.visible_centers.view(),
        ctx.hidden_centers.view(),
        lcp,
        false,
    )
    .loss)
}

/// Guidance penalty on the mean-field reconstruction of the data.
pub fn l_recon(params: &RbmParams, data: &DataMatrix, lcp: &LocalClusterPartition) -> Result<f64> {
    let ctx = build_guidance(params, data, lcp)?;
    Ok(side_terms(
        params,
        ctx.reconstruction.view(),
        ctx.recon_visible_centers.view(),
        ctx.recon_hidden_centers.view(),
        lcp,
        false,
    )
    .loss)
}

/// Gradient of `l_data + l_recon` with the reconstruction held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceGradient {
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    /// Always zero; kept so callers can see the full parameter gradient.
    pub visible_bias: Array1<f64>,
    /// `l_data + l_recon` at the evaluation point.
    pub loss: f64,
}

pub fn guidance_gradient(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
) -> Result<GuidanceGradient> {
    let ctx = build_guidance(params, data, lcp)?;
    let on_data = side_terms(
        params,
        data.values().view(),
        ctx.visible_centers.view(),
        ctx.hidden_centers.view(),
        lcp,
        true,
    );
    let on_recon = side_terms(
        params,
        ctx.reconstruction.view(),
        ctx.recon_visible_centers.view(),
        ctx.recon_hidden_centers.view(),
        lcp,
        true,
    );
    let grad = GuidanceGradient {
        weights: on_data.grad_w + on_recon.grad_w,
        hidden_bias: on_data.grad_b + on_recon.grad_b,
        visible_bias: Array1::zeros(params.n_visible()),
        loss: on_data.loss + on_recon.loss,
    };
    let finite = grad.loss.is_finite()
        && grad.weights.iter().all(|x| x.is_finite())
        && grad.hidden_bias.iter().all(|x| x.is_finite());
    if !finite {
        return Err(Error::Numeric("non-finite guidance gradient".into()));
    }
    Ok(grad)
}

pub fn guidance_grad_w(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
) -> Result<Array2<f64>> {
    Ok(guidance_gradient(params, data, lcp)?.weights)
}

pub fn guidance_grad_b(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
) -> Result<Array1<f64>> {
    Ok(guidance_gradient(params, data, lcp)?.hidden_bias)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub epoch: usize,
    /// Mean squared CD-1 reconstruction error before the update.
    pub recon_error: f64,
    /// `l_data + l_recon` before the update; absent in fallback training.
    pub guidance_loss: Option<f64>,
    /// True when no usable LCP existed and plain CD-1 was run.
    pub fallback: bool,
}

/// One guided update:
///
/// ```text
/// W ← W + η·ε·ΔW_cd − (1−η)·lr_g·∂L/∂W
/// b ← b + η·ε·Δb_cd − (1−η)·lr_g·∂L/∂b
/// a ← a + η·ε·Δa_cd
/// ```
///
/// Both terms are evaluated at the current parameters.
pub fn train_step<R: Rng + ?Sized>(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
    cfg: &MirbmConfig,
    rng: &mut R,
    epoch: usize,
) -> Result<(RbmParams, TrainStats)> {
    let cd = cd1_statistics(params, data, rng, epoch)?;
    let mut next = params.clone();
    apply_cd1(&mut next, &cd, cfg.eta * cfg.lr_cd);

    let guidance_loss = if cfg.eta < 1.0 {
        let grad = guidance_gradient(params, data, lcp).map_err(|e| match e {
            Error::Numeric(_) => Error::NumericOverflow {
                stage: "guidance gradient",
                epoch,
            },
            other => other,
        })?;
        let step = (1.0 - cfg.eta) * cfg.lr_guidance;
        next.weights.zip_mut_with(&grad.weights, |w, g| *w -= step * g);
        next.hidden_bias
            .zip_mut_with(&grad.hidden_bias, |b, g| *b -= step * g);
        grad.loss
    } else {
        l_data(params, data, lcp)? + l_recon(params, data, lcp)?
    };

    if !next.is_finite() {
        return Err(Error::NumericOverflow {
            stage: "parameter update",
            epoch,
        });
    }
    Ok((
        next,
        TrainStats {
            epoch,
            recon_error: cd.recon_error,
            guidance_loss: Some(guidance_loss),
            fallback: false,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: RbmParams,
    pub history: Vec<TrainStats>,
}

impl TrainOutcome {
    pub fn fell_back(&self) -> bool {
        self.history.first().is_some_and(|s| s.fallback)
    }
}

/// Trains from a fresh initialization seeded by `cfg.seed`.
///
/// Without an LCP the run degrades to plain CD-1 with learning rate
/// `lr_cd` and every history entry is flagged as a fallback.
pub fn train(
    data: &DataMatrix,
    lcp: Option<&LocalClusterPartition>,
    cfg: &MirbmConfig,
) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    train_with_rng(data, lcp, cfg, &mut rng)
}

pub fn train_with_rng<R: Rng + ?Sized>(
    data: &DataMatrix,
    lcp: Option<&LocalClusterPartition>,
    cfg: &MirbmConfig,
    rng: &mut R,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut params = RbmParams::random(data.n_cols(), cfg.hidden_units, cfg.visible_kind, rng);
    if let Some(lcp) = lcp {
        check_lcp(&params, data, lcp)?;
    } else {
        log::warn!("no usable LCP; training with plain CD-1");
    }
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let stats = match lcp {
            Some(lcp) => {
                let (next, stats) = train_step(&params, data, lcp, cfg, rng, epoch)?;
                params = next;
                stats
            }
            None => {
                let (next, recon_error) = cd1_step(&params, data, cfg.lr_cd, rng)
                    .map_err(|e| with_epoch(e, epoch))?;
                params = next;
                TrainStats {
                    epoch,
                    recon_error,
                    guidance_loss: None,
                    fallback: true,
                }
            }
        };
        history.push(stats);
    }
    Ok(TrainOutcome { params, history })
}

/// Plain CD-1 training with the same initialization and sampling stream as
/// [`train`].
pub fn train_plain_cd1(data: &DataMatrix, cfg: &MirbmConfig) -> Result<RbmParams> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params =
        RbmParams::random(data.n_cols(), cfg.hidden_units, cfg.visible_kind, &mut rng);
    for epoch in 0..cfg.epochs {
        params = cd1_step(&params, data, cfg.lr_cd, &mut rng)
            .map_err(|e| with_epoch(e, epoch))?
            .0;
    }
    Ok(params)
}

fn with_epoch(err: Error, epoch: usize) -> Error {
    match err {
        Error::NumericOverflow { stage, .. } => Error::NumericOverflow { stage, epoch },
        other => other,
    }
}

/// Hidden-layer features: the hidden unit probabilities of every row.
pub fn extract_features(params: &RbmParams, data: &DataMatrix) -> Result<HiddenBatch> {
    hidden_prob(params, data)
}

/// Geometry of the LCP clusters in hidden space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenGeometry {
    /// Mean Euclidean distance over unordered within-cluster pairs.
    pub mean_within_distance: f64,
    /// Mean Euclidean distance between hidden centers C_k.
    pub mean_center_distance: f64,
}

pub fn hidden_geometry(
    params: &RbmParams,
    data: &DataMatrix,
    lcp: &LocalClusterPartition,
) -> Result<HiddenGeometry> {
    let ctx = build_guidance(params, data, lcp)?;
    let h = hidden_activations(params, data.values().view());
    let dist = |a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let (mut within, mut pairs) = (0.0, 0usize);
    for members in lcp.clusters() {
        for (a, &s) in members.iter().enumerate() {
            for &t in &members[a + 1..] {
                within += dist(h.row(s), h.row(t));
                pairs += 1;
            }
        }
    }
    let codes = &ctx.hidden_centers;
    let (mut between, mut center_pairs) = (0.0, 0usize);
    for p in 0..codes.nrows() {
        for q in p + 1..codes.nrows() {
            between += dist(codes.row(p), codes.row(q));
            center_pairs += 1;
        }
    }
    Ok(HiddenGeometry {
        mean_within_distance: within / pairs as f64,
        mean_center_distance: between / center_pairs as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn lcp2() -> LocalClusterPartition {
        LocalClusterPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap()
    }

    #[test]
    fn identical_rows_center_is_row() {
        let data = DataMatrix::new(array![[1.0, 2.0], [1.0, 2.0], [-1.0, 0.5], [-1.0, 0.5]])
            .unwrap();
        let params = RbmParams::new(
            array![[0.3, -0.2, 0.1], [0.5, 0.4, -0.7]],
            array![0.1, -0.1],
            array![0.2, 0.0, -0.3],
            VisibleKind::GaussianUnitVariance,
        )
        .unwrap();
        let ctx = build_guidance(&params, &data, &lcp2()).unwrap();
        assert_eq!(ctx.visible_centers.row(0), data.values().row(0));
        let h = hidden_prob(&params, &data).unwrap().values;
        assert_eq!(ctx.hidden_centers.row(0), h.row(0));
        assert_eq!(ctx.hidden_centers.row(1), h.row(2));
    }

    #[test]
    fn zero_params_give_flat_centers_and_zero_loss() {
        let data = DataMatrix::new(array![[1.0, 2.0], [0.0, 2.0], [-1.0, 0.5], [3.0, 0.5]]).unwrap();
        let params = RbmParams::zeros(2, 3, VisibleKind::GaussianUnitVariance);
        let lcp = lcp2();
        let ctx = build_guidance(&params, &data, &lcp).unwrap();
        assert!(ctx.hidden_centers.iter().all(|&c| c == 0.5));
        assert!(ctx.recon_hidden_centers.iter().all(|&c| c == 0.5));
        assert_eq!(l_data(&params, &data, &lcp).unwrap(), 0.0);
        assert_eq!(l_recon(&params, &data, &lcp).unwrap(), 0.0);
        let g = guidance_gradient(&params, &data, &lcp).unwrap();
        assert!(g.weights.iter().all(|&x| x == 0.0));
        assert!(g.hidden_bias.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identical_rows_have_no_within_term() {
        let data = DataMatrix::new(array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        let params = RbmParams::new(
            array![[0.3, -0.2], [0.5, 0.4]],
            array![0.0, 0.0],
            array![0.2, -0.3],
            VisibleKind::GaussianUnitVariance,
        )
        .unwrap();
        let lcp = lcp2();
        // same rows in both clusters: zero scatter and coincident centers
        assert!(l_data(&params, &data, &lcp).unwrap().abs() < 1e-15);
        let g = guidance_gradient(&params, &data, &lcp).unwrap();
        assert!(g.weights.iter().all(|x| x.abs() < 1e-15));
        assert!(g.hidden_bias.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn distinct_clusters_of_identical_rows_only_have_center_term() {
        let data = DataMatrix::new(array![[1.0, 2.0], [1.0, 2.0], [-1.0, 0.5], [-1.0, 0.5]])
            .unwrap();
        let params = RbmParams::new(
            array![[0.3, -0.2], [0.5, 0.4]],
            array![0.0, 0.0],
            array![0.2, -0.3],
            VisibleKind::GaussianUnitVariance,
        )
        .unwrap();
        let ctx = build_guidance(&params, &data, &lcp2()).unwrap();
        let c = &ctx.hidden_centers;
        let expected = -(&c.row(0) - &c.row(1)).mapv(|x| x * x).sum();
        let got = l_data(&params, &data, &lcp2()).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!(got < 0.0);
    }

    #[test]
    fn sign_symmetries_with_zero_hidden_bias() {
        // With b = 0, σ(−x) = 1 − σ(x) reflects every hidden vector, so the
        // penalty is even in V and in W: the gradient is unchanged by V ↦ −V
        // and flips sign under W ↦ −W.
        let w = array![[0.3, -0.2, 0.8], [0.5, 0.4, -0.1]];
        let params = |w: Array2<f64>| {
            RbmParams::new(w, array![0.0, 0.0], array![0.0, 0.0, 0.0], VisibleKind::Binary).unwrap()
        };
        let v = array![[1.0, 0.2], [0.4, -1.0], [-0.3, 0.9], [2.0, 1.0]];
        let lcp = lcp2();
        let side = |p: &RbmParams, x: &Array2<f64>| {
            let data = DataMatrix::new(x.clone()).unwrap();
            let ctx = build_guidance(p, &data, &lcp).unwrap();
            side_terms(p, x.view(), ctx.visible_centers.view(), ctx.hidden_centers.view(), &lcp, true)
        };
        let base = side(&params(w.clone()), &v);
        let neg_v = side(&params(w.clone()), &v.mapv(|x| -x));
        let neg_w = side(&params(w.mapv(|x| -x)), &v);
        for ((a, b), c) in base.grad_w.iter().zip(neg_v.grad_w.iter()).zip(neg_w.grad_w.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
            assert!((a + c).abs() < 1e-14, "{a} vs {c}");
        }
        assert!((base.loss - neg_v.loss).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let ok = MirbmConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            MirbmConfig { eta: 0.0, ..ok },
            MirbmConfig { eta: 1.5, ..ok },
            MirbmConfig { lr_guidance: 0.0, ..ok },
            MirbmConfig { lr_cd: -1.0, ..ok },
            MirbmConfig { epochs: 0, ..ok },
            MirbmConfig { hidden_units: 0, ..ok },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn one_epoch_one_history_entry() {
        let data = DataMatrix::new(array![[1.0, 2.0], [0.0, 2.0], [-1.0, 0.5], [3.0, 0.5]]).unwrap();
        let (data, _) = crate::data::standardize(&data).unwrap();
        let cfg = MirbmConfig {
            epochs: 1,
            hidden_units: 3,
            ..MirbmConfig::default()
        };
        let out = train(&data, Some(&lcp2()), &cfg).unwrap();
        assert_eq!(out.history.len(), 1);
        assert!(!out.fell_back());
        let out = train(&data, None, &cfg).unwrap();
        assert!(out.fell_back());
        assert_eq!(out.history[0].guidance_loss, None);
    }

    #[test]
    fn features_alias_hidden_prob() {
        let params = RbmParams::zeros(2, 3, VisibleKind::Binary);
        let data = DataMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let f = extract_features(&params, &data).unwrap();
        assert!(f.values.iter().all(|&x| x == 0.5));
        let params = RbmParams::new(
            array![[0.3, -0.2, 0.8], [0.5, 0.4, -0.1]],
            array![0.0, 0.0],
            array![0.1, 0.0, -0.2],
            VisibleKind::Binary,
        )
        .unwrap();
        assert_eq!(
            extract_features(&params, &data).unwrap(),
            hidden_prob(&params, &data).unwrap()
        );
        let wide = DataMatrix::new(array![[1.0, 0.0, 2.0]]).unwrap();
        assert!(extract_features(&params, &wide).is_err());
    }
}
