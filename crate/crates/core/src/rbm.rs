//! Restricted Boltzmann machine: energy, conditionals, Bernoulli sampling
//! and one-step contrastive divergence.
//!
//! All matrix products are written as explicit loops with a fixed summation
//! order (ascending index) so that results are bit-reproducible and can be
//! compared exactly against hand-written references.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` so that they
/// stay strictly inside (0, 1) even when the logistic saturates.
pub const PROB_FLOOR: f64 = 1e-12;

/// Standard deviation of the initial weights.
pub const INIT_WEIGHT_STD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibleKind {
    Binary,
    /// Gaussian linear units with σ fixed to 1; data must be standardized.
    GaussianUnitVariance,
}

impl VisibleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VisibleKind::Binary => "binary",
            VisibleKind::GaussianUnitVariance => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(VisibleKind::Binary),
            "gaussian" => Some(VisibleKind::GaussianUnitVariance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    /// D×H, entry (i, j) couples visible i to hidden j.
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_kind: VisibleKind,
}

impl RbmParams {
    pub fn new(
        weights: Array2<f64>,
        visible_bias: Array1<f64>,
        hidden_bias: Array1<f64>,
        visible_kind: VisibleKind,
    ) -> Result<Self> {
        let params = Self {
            weights,
            visible_bias,
            hidden_bias,
            visible_kind,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize, visible_kind: VisibleKind) -> Self {
        Self {
            weights: Array2::zeros((n_visible, n_hidden)),
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
            visible_kind,
        }
    }

    /// N(0, 0.01²) weights drawn in row-major order, zero biases.
    pub fn random<R: Rng + ?Sized>(
        n_visible: usize,
        n_hidden: usize,
        visible_kind: VisibleKind,
        rng: &mut R,
    ) -> Self {
        let normal = Normal::new(0.0, INIT_WEIGHT_STD).expect("valid std");
        let mut params = Self::zeros(n_visible, n_hidden, visible_kind);
        for w in params.weights.iter_mut() {
            *w = normal.sample(rng);
        }
        params
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.visible_bias.len() != self.weights.nrows() {
            return Err(Error::DimensionMismatch {
                context: "visible bias vs weight rows",
                expected: self.weights.nrows(),
                actual: self.visible_bias.len(),
            });
        }
        if self.hidden_bias.len() != self.weights.ncols() {
            return Err(Error::DimensionMismatch {
                context: "hidden bias vs weight columns",
                expected: self.weights.ncols(),
                actual: self.hidden_bias.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::contract("parameters contain non-finite entries"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|x| x.is_finite())
            && self.visible_bias.iter().all(|x| x.is_finite())
            && self.hidden_bias.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenKind {
    Probabilities,
    BinarySamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenBatch {
    pub values: Array2<f64>,
    pub kind: HiddenKind,
}

impl HiddenBatch {
    pub fn probabilities(values: Array2<f64>) -> Self {
        Self {
            values,
            kind: HiddenKind::Probabilities,
        }
    }

    pub fn samples(values: Array2<f64>) -> Self {
        Self {
            values,
            kind: HiddenKind::BinarySamples,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    (1.0 / (1.0 + (-x).exp())).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// P(h_sj = 1 | v_s) = σ(b_j + Σ_i v_si w_ij).
pub fn hidden_prob(params: &RbmParams, v: &DataMatrix) -> Result<HiddenBatch> {
    check_cols("hidden_prob input", params.n_visible(), v.n_cols())?;
    Ok(HiddenBatch::probabilities(hidden_activations(
        params,
        v.values().view(),
    )))
}

/// Unchecked core of [`hidden_prob`]; `v` must have D columns.
pub(crate) fn hidden_activations(params: &RbmParams, v: ArrayView2<f64>) -> Array2<f64> {
    let (n, d) = v.dim();
    let h = params.n_hidden();
    let w = &params.weights;
    let mut out = Array2::zeros((n, h));
    for s in 0..n {
        for j in 0..h {
            let mut z = 0.0;
            for i in 0..d {
                z += v[[s, i]] * w[[i, j]];
            }
            out[[s, j]] = sigmoid(params.hidden_bias[j] + z);
        }
    }
    out
}

/// Top-down input Σ_j h_sj w_ij for every (s, i).
fn top_down(params: &RbmParams, h: ArrayView2<f64>) -> Array2<f64> {
    let (n, nh) = h.dim();
    let d = params.n_visible();
    let w = &params.weights;
    let mut out = Array2::zeros((n, d));
    for s in 0..n {
        for i in 0..d {
            let mut z = 0.0;
            for j in 0..nh {
                z += h[[s, j]] * w[[i, j]];
            }
            out[[s, i]] = z;
        }
    }
    out
}

/// P(v_si = 1 | h_s) = σ(a_i + Σ_j h_sj w_ij) for binary visible units.
pub fn visible_prob_binary(params: &RbmParams, h: &HiddenBatch) -> Result<Array2<f64>> {
    if params.visible_kind != VisibleKind::Binary {
        return Err(Error::VisibleKindMisuse {
            operation: "visible_prob_binary",
            expected: "binary",
        });
    }
    check_cols("visible_prob_binary input", params.n_hidden(), h.values.ncols())?;
    let mut out = top_down(params, h.values.view());
    for mut row in out.rows_mut() {
        for (x, a) in row.iter_mut().zip(params.visible_bias.iter()) {
            *x = sigmoid(a + *x);
        }
    }
    Ok(out)
}

/// Mean-field reconstruction h Wᵀ + a for unit-variance Gaussian visible units.
pub fn visible_recon_gaussian(params: &RbmParams, h: &HiddenBatch) -> Result<Array2<f64>> {
    if params.visible_kind != VisibleKind::GaussianUnitVariance {
        return Err(Error::VisibleKindMisuse {
            operation: "visible_recon_gaussian",
            expected: "gaussian",
        });
    }
    check_cols("visible_recon_gaussian input", params.n_hidden(), h.values.ncols())?;
    let mut out = top_down(params, h.values.view());
    for mut row in out.rows_mut() {
        for (x, a) in row.iter_mut().zip(params.visible_bias.iter()) {
            *x += a;
        }
    }
    Ok(out)
}

/// Dispatches to the binary or Gaussian reconstruction.
pub fn reconstruct(params: &RbmParams, h: &HiddenBatch) -> Result<Array2<f64>> {
    match params.visible_kind {
        VisibleKind::Binary => visible_prob_binary(params, h),
        VisibleKind::GaussianUnitVariance => visible_recon_gaussian(params, h),
    }
}

/// Draws each entry as 1 with its probability, visiting entries in row-major
/// order and consuming exactly one uniform `f64` per entry.
pub fn sample_bernoulli<R: Rng + ?Sized>(probs: &Array2<f64>, rng: &mut R) -> Result<Array2<f64>> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::contract(format!("probability {p} outside [0, 1]")));
    }
    let mut out = Array2::zeros(probs.dim());
    for (o, &p) in out.iter_mut().zip(probs.iter()) {
        let u: f64 = rng.random();
        if u < p {
            *o = 1.0;
        }
    }
    Ok(out)
}

/// Joint energy E(v, h).
pub fn energy(params: &RbmParams, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<f64> {
    check_cols("energy visible vector", params.n_visible(), v.len())?;
    check_cols("energy hidden vector", params.n_hidden(), h.len())?;
    let visible_term = match params.visible_kind {
        VisibleKind::Binary => -v.dot(&params.visible_bias),
        VisibleKind::GaussianUnitVariance => v
            .iter()
            .zip(params.visible_bias.iter())
            .map(|(vi, ai)| 0.5 * (vi - ai).powi(2))
            .sum(),
    };
    let hidden_term = -h.dot(&params.hidden_bias);
    let mut coupling = 0.0;
    for (i, vi) in v.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            coupling += vi * hj * params.weights[[i, j]];
        }
    }
    Ok(visible_term + hidden_term - coupling)
}

/// Positive-minus-negative phase statistics of one CD-1 sweep, before scaling
/// by a learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Cd1Statistics {
    /// <v_i h_j>_0 − <v_i h_j>_1
    pub weights: Array2<f64>,
    /// <v_i>_0 − <v_i>_1
    pub visible_bias: Array1<f64>,
    /// <h_j>_0 − <h_j>_1
    pub hidden_bias: Array1<f64>,
    /// Mean squared difference between data and reconstruction.
    pub recon_error: f64,
}

impl Cd1Statistics {
    /// Expectations over the batch from both phases. `h0` and `h1` are the
    /// hidden probabilities driven by `v` and `v_recon` respectively.
    pub fn from_phases(
        v: ArrayView2<f64>,
        h0: ArrayView2<f64>,
        v_recon: ArrayView2<f64>,
        h1: ArrayView2<f64>,
    ) -> Self {
        let (n, d) = v.dim();
        let h = h0.ncols();
        let nf = n as f64;
        let mut weights = Array2::zeros((d, h));
        for i in 0..d {
            for j in 0..h {
                let mut pos = 0.0;
                let mut neg = 0.0;
                for s in 0..n {
                    pos += v[[s, i]] * h0[[s, j]];
                    neg += v_recon[[s, i]] * h1[[s, j]];
                }
                weights[[i, j]] = pos / nf - neg / nf;
            }
        }
        let visible_bias = Array1::from_shape_fn(d, |i| {
            let (mut pos, mut neg) = (0.0, 0.0);
            for s in 0..n {
                pos += v[[s, i]];
                neg += v_recon[[s, i]];
            }
            pos / nf - neg / nf
        });
        let hidden_bias = Array1::from_shape_fn(h, |j| {
            let (mut pos, mut neg) = (0.0, 0.0);
            for s in 0..n {
                pos += h0[[s, j]];
                neg += h1[[s, j]];
            }
            pos / nf - neg / nf
        });
        let mut sq = 0.0;
        for (a, b) in v.iter().zip(v_recon.iter()) {
            sq += (a - b) * (a - b);
        }
        let recon_error = if n * d == 0 { 0.0 } else { sq / (n * d) as f64 };
        Self {
            weights,
            visible_bias,
            hidden_bias,
            recon_error,
        }
    }

    fn is_finite(&self) -> bool {
        self.recon_error.is_finite()
            && self.weights.iter().all(|x| x.is_finite())
            && self.visible_bias.iter().all(|x| x.is_finite())
            && self.hidden_bias.iter().all(|x| x.is_finite())
    }
}

/// Runs the Gibbs half-sweep v → h⁰ (sampled) → ṽ → h¹ and collects the
/// CD-1 statistics. Expectations use hidden probabilities on both sides;
/// the reconstruction is driven by binary hidden samples.
pub fn cd1_statistics<R: Rng + ?Sized>(
    params: &RbmParams,
    v: &DataMatrix,
    rng: &mut R,
    epoch: usize,
) -> Result<Cd1Statistics> {
    check_cols("cd1 input", params.n_visible(), v.n_cols())?;
    if v.n_rows() == 0 {
        return Err(Error::contract("cd1 needs at least one row"));
    }
    if params.visible_kind == VisibleKind::GaussianUnitVariance && !v.is_standardized() {
        return Err(Error::contract(
            "Gaussian visible units require standardized data",
        ));
    }
    let h0 = hidden_activations(params, v.values().view());
    let h0_sample = HiddenBatch::samples(sample_bernoulli(&h0, rng)?);
    let v_recon = reconstruct(params, &h0_sample)?;
    if v_recon.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericOverflow {
            stage: "reconstruction",
            epoch,
        });
    }
    let h1 = hidden_activations(params, v_recon.view());
    let stats = Cd1Statistics::from_phases(v.values().view(), h0.view(), v_recon.view(), h1.view());
    if !stats.is_finite() {
        return Err(Error::NumericOverflow {
            stage: "cd1 statistics",
            epoch,
        });
    }
    Ok(stats)
}

/// One full-batch CD-1 update: θ ← θ + lr · (positive − negative phase).
pub fn cd1_step<R: Rng + ?Sized>(
    params: &RbmParams,
    v: &DataMatrix,
    lr: f64,
    rng: &mut R,
) -> Result<(RbmParams, f64)> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::contract(format!("learning rate {lr} must be >= 0")));
    }
    let stats = cd1_statistics(params, v, rng, 0)?;
    let mut next = params.clone();
    apply_cd1(&mut next, &stats, lr);
    if !next.is_finite() {
        return Err(Error::NumericOverflow {
            stage: "cd1 update",
            epoch: 0,
        });
    }
    Ok((next, stats.recon_error))
}

pub(crate) fn apply_cd1(params: &mut RbmParams, stats: &Cd1Statistics, lr: f64) {
    params
        .weights
        .zip_mut_with(&stats.weights, |w, g| *w += lr * g);
    params
        .visible_bias
        .zip_mut_with(&stats.visible_bias, |a, g| *a += lr * g);
    params
        .hidden_bias
        .zip_mut_with(&stats.hidden_bias, |b, g| *b += lr * g);
}

fn check_cols(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
