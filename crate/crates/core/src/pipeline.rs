//! End-to-end orchestration: standardize, cluster three ways, vote, train,
//! extract hidden features, re-cluster and evaluate.

use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cluster::{run_ensemble, Ensemble, EnsembleConfig};
use crate::data::{standardize, DataMatrix};
use crate::error::{Error, Result};
use crate::guided::{extract_features, train, MirbmConfig, TrainStats};
use crate::metrics::{evaluate, EvalReport};
use crate::rbm::{RbmParams, VisibleKind};
use crate::voting::{lcp_stats, unanimous_vote, LcpStats, LocalClusterPartition, DEFAULT_MIN_CLUSTER_SIZE};

pub const MAX_DEFAULT_HIDDEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub eta: f64,
    pub lr_cd: f64,
    pub lr_guidance: f64,
    pub epochs: usize,
    /// `None` means `min(D, 256)`.
    pub hidden_units: Option<usize>,
    pub visible_kind: VisibleKind,
    pub seed: u64,
    pub ensemble: EnsembleConfig,
    pub min_cluster_size: usize,
    /// Train with plain CD-1 when voting leaves fewer than two clusters.
    pub allow_fallback: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 3,
            eta: 0.1,
            lr_cd: 1e-2,
            lr_guidance: 1e-2,
            epochs: 100,
            hidden_units: None,
            visible_kind: VisibleKind::GaussianUnitVariance,
            seed: 0,
            ensemble: EnsembleConfig::default(),
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            allow_fallback: true,
        }
    }
}

impl PipelineConfig {
    pub fn resolved_hidden(&self, n_features: usize) -> usize {
        self.hidden_units
            .unwrap_or_else(|| n_features.clamp(1, MAX_DEFAULT_HIDDEN))
    }

    pub fn mirbm(&self, n_features: usize) -> MirbmConfig {
        MirbmConfig {
            eta: self.eta,
            lr_cd: self.lr_cd,
            lr_guidance: self.lr_guidance,
            epochs: self.epochs,
            hidden_units: self.resolved_hidden(n_features),
            visible_kind: self.visible_kind,
            seed: self.seed,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::contract(format!("k must be >= 2, got {}", self.k)));
        }
        if self.min_cluster_size < 2 {
            return Err(Error::contract("min_cluster_size must be >= 2"));
        }
        self.mirbm(n_features).validate()
    }
}

/// Output of the η-independent front half of the pipeline.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: DataMatrix,
    pub constant_columns: Vec<usize>,
    pub ensemble: Ensemble,
    /// `None` when voting left fewer than two clusters.
    pub lcp: Option<LocalClusterPartition>,
    pub timings: Timings,
}

/// Standardizes, runs the three base clusterers and votes.
pub fn prepare(cfg: &PipelineConfig, raw: &DataMatrix) -> Result<Prepared> {
    cfg.validate(raw.n_cols()).map_err(|e| e.in_stage("config"))?;
    let mut timings = Timings::default();

    let t = Instant::now();
    let (data, constant_columns) = standardize(raw).map_err(|e| e.in_stage("standardize"))?;
    timings.standardize_ms = ms(t);

    let t = Instant::now();
    let ensemble =
        run_ensemble(&data, cfg.k, cfg.seed, &cfg.ensemble).map_err(|e| e.in_stage("ensemble"))?;
    timings.ensemble_ms = ms(t);

    let t = Instant::now();
    let lcp = match unanimous_vote(ensemble.as_array(), 0, cfg.min_cluster_size) {
        Ok(lcp) => Some(lcp),
        Err(e @ Error::InsufficientConsensus { .. }) => {
            if !cfg.allow_fallback {
                return Err(e.in_stage("vote"));
            }
            log::warn!("{e}; falling back to plain CD-1");
            None
        }
        Err(e) => return Err(e.in_stage("vote")),
    };
    timings.vote_ms = ms(t);

    Ok(Prepared {
        data,
        constant_columns,
        ensemble,
        lcp,
        timings,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub standardize_ms: f64,
    pub ensemble_ms: f64,
    pub vote_ms: f64,
    pub train_ms: f64,
    pub features_ms: f64,
    pub evaluate_ms: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustererReport {
    pub name: String,
    pub raw_clusters: usize,
    pub feature_clusters: usize,
    /// Present only when ground truth was supplied.
    pub raw: Option<EvalReport>,
    pub features: Option<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs: usize,
    pub fallback: bool,
    pub first: Option<TrainStats>,
    pub last: Option<TrainStats>,
}

/// Deterministic run summary; wall-clock timings are kept apart in
/// [`RunOutput::timings`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub hidden_units: usize,
    pub n_instances: usize,
    pub n_features: usize,
    pub constant_columns: Vec<usize>,
    pub lcp: Option<LcpStats>,
    pub training: TrainingSummary,
    pub clusterers: Vec<ClustererReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub params: RbmParams,
    pub features: Array2<f64>,
    pub raw_partitions: Ensemble,
    pub feature_partitions: Ensemble,
    pub lcp: Option<LocalClusterPartition>,
    pub history: Vec<TrainStats>,
    pub timings: Timings,
}

pub fn run_pipeline(cfg: &PipelineConfig, raw: &DataMatrix, truth: Option<&[usize]>) -> Result<RunOutput> {
    check_truth(raw, truth)?;
    let prepared = prepare(cfg, raw)?;
    finish(cfg, &prepared, truth)
}

fn check_truth(raw: &DataMatrix, truth: Option<&[usize]>) -> Result<()> {
    match truth {
        Some(t) if t.len() != raw.n_rows() => Err(Error::DimensionMismatch {
            context: "truth labels vs data rows",
            expected: raw.n_rows(),
            actual: t.len(),
        }
        .in_stage("config")),
        _ => Ok(()),
    }
}

/// Trains on a prepared front half and evaluates. `cfg.seed` seeds the
/// training and the feature-space clusterers.
pub fn finish(cfg: &PipelineConfig, prepared: &Prepared, truth: Option<&[usize]>) -> Result<RunOutput> {
    let data = &prepared.data;
    let mirbm = cfg.mirbm(data.n_cols());
    mirbm.validate().map_err(|e| e.in_stage("config"))?;
    let mut timings = prepared.timings;

    let t = Instant::now();
    let outcome = train(data, prepared.lcp.as_ref(), &mirbm).map_err(|e| e.in_stage("train"))?;
    timings.train_ms = ms(t);

    let t = Instant::now();
    let features = extract_features(&outcome.params, data)
        .map_err(|e| e.in_stage("features"))?
        .values;
    let feature_data = DataMatrix::new(features.clone()).map_err(|e| e.in_stage("features"))?;
    let feature_partitions = run_ensemble(&feature_data, cfg.k, cfg.seed, &cfg.ensemble)
        .map_err(|e| e.in_stage("feature clustering"))?;
    timings.features_ms = ms(t);

    let t = Instant::now();
    let mut clusterers = Vec::with_capacity(3);
    for (i, name) in Ensemble::NAMES.iter().enumerate() {
        let raw_p = prepared.ensemble.as_array()[i];
        let feat_p = feature_partitions.as_array()[i];
        let (raw_eval, feat_eval) = match truth {
            Some(t) => (
                Some(evaluate(t, raw_p.labels()).map_err(|e| e.in_stage("evaluate"))?),
                Some(evaluate(t, feat_p.labels()).map_err(|e| e.in_stage("evaluate"))?),
            ),
            None => (None, None),
        };
        clusterers.push(ClustererReport {
            name: (*name).to_string(),
            raw_clusters: raw_p.k(),
            feature_clusters: feat_p.k(),
            raw: raw_eval,
            features: feat_eval,
        });
    }
    timings.evaluate_ms = ms(t);

    let report = RunReport {
        config: cfg.clone(),
        hidden_units: mirbm.hidden_units,
        n_instances: data.n_rows(),
        n_features: data.n_cols(),
        constant_columns: prepared.constant_columns.clone(),
        lcp: prepared.lcp.as_ref().map(lcp_stats),
        training: TrainingSummary {
            epochs: outcome.history.len(),
            fallback: outcome.fell_back(),
            first: outcome.history.first().copied(),
            last: outcome.history.last().copied(),
        },
        clusterers,
    };
    Ok(RunOutput {
        report,
        params: outcome.params,
        features,
        raw_partitions: prepared.ensemble.clone(),
        feature_partitions,
        lcp: prepared.lcp.clone(),
        history: outcome.history,
        timings,
    })
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_eta_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::contract(format!("bad eta range {spec:?}")))?;
    match nums.as_slice() {
        [single] => Ok(vec![*single]),
        [start, stop, step] if *step > 0.0 && stop >= start => {
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // round to the step's decimal grid so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004
            Ok((0..=n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(Error::contract(format!(
            "eta range must be `start:stop:step` with step > 0, got {spec:?}"
        ))),
    }
}

/// Seed for the `index`-th configuration of a sweep (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one training per η on a shared ensemble and LCP. Configuration `i`
/// trains with `derive_seed(cfg.seed, i)`. With `threads > 1` the runs are
/// spread over scoped threads; results keep the order of `etas`.
pub fn sweep(
    cfg: &PipelineConfig,
    raw: &DataMatrix,
    truth: Option<&[usize]>,
    etas: &[f64],
    threads: usize,
) -> Result<Vec<RunOutput>> {
    check_truth(raw, truth)?;
    let prepared = prepare(cfg, raw)?;
    let configs: Vec<PipelineConfig> = etas
        .iter()
        .enumerate()
        .map(|(i, &eta)| PipelineConfig {
            eta,
            seed: derive_seed(cfg.seed, i as u64),
            ..cfg.clone()
        })
        .collect();

    let threads = threads.max(1).min(configs.len().max(1));
    if threads == 1 {
        return configs.iter().map(|c| finish(c, &prepared, truth)).collect();
    }
    let chunk = configs.len().div_ceil(threads);
    let results: Vec<Result<Vec<RunOutput>>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .chunks(chunk)
            .map(|group| {
                let prepared = &prepared;
                s.spawn(move || group.iter().map(|c| finish(c, prepared, truth)).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(configs.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// One flat row per (clusterer, feature space) for aggregation across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub eta: f64,
    pub seed: u64,
    pub clusterer: String,
    pub space: String,
    pub clusters: usize,
    pub accuracy: Option<f64>,
    pub purity: Option<f64>,
    pub fmi: Option<f64>,
    pub jaccard: Option<f64>,
}

pub fn metric_rows(report: &RunReport) -> Vec<MetricRow> {
    let mut rows = Vec::new();
    for c in &report.clusterers {
        for (space, k, eval) in [
            ("raw", c.raw_clusters, c.raw),
            ("features", c.feature_clusters, c.features),
        ] {
            rows.push(MetricRow {
                eta: report.config.eta,
                seed: report.config.seed,
                clusterer: c.name.clone(),
                space: space.to_string(),
                clusters: k,
                accuracy: eval.map(|e| e.accuracy),
                purity: eval.map(|e| e.purity),
                fmi: eval.and_then(|e| e.fmi),
                jaccard: eval.and_then(|e| e.jaccard),
            });
        }
    }
    rows
}

pub fn write_metrics_csv(path: impl AsRef<Path>, rows: &[MetricRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
