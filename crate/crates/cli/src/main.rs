use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mirbm_core::cluster::{run_ensemble, Ensemble, EnsembleConfig};
use mirbm_core::data::{load_csv, load_labels, standardize, write_labels, write_matrix_csv, DataMatrix};
use mirbm_core::guided::{extract_features, train};
use mirbm_core::metrics::evaluate;
use mirbm_core::model_io::{load_model, save_model};
use mirbm_core::pipeline::{
    metric_rows, parse_eta_range, prepare, run_pipeline, sweep, write_metrics_csv, PipelineConfig,
    RunOutput,
};
use mirbm_core::rbm::VisibleKind;
use mirbm_core::voting::{unanimous_vote, LocalClusterPartition};
use mirbm_core::Error;

#[derive(Parser)]
#[command(name = "mirbm", version, about = "LCP-guided RBM feature learning for clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run k-means, affinity propagation and spectral clustering, then vote.
    Ensemble(EnsembleArgs),
    /// Train an RBM on the data, guided by the voted LCP.
    Train(TrainArgs),
    /// Encode data with a saved model.
    Features(FeaturesArgs),
    /// Compare two label files.
    Evaluate(EvaluateArgs),
    /// Full run: ensemble, vote, train, re-cluster, evaluate.
    Pipeline(PipelineArgs),
    /// Pipeline over a range of eta values on one shared LCP.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Numeric CSV, one instance per row.
    #[arg(long)]
    data: PathBuf,
    /// First CSV row is a header.
    #[arg(long)]
    header: bool,
    /// Ground truth: a 0-based column index in --data, or a file with one label per line.
    #[arg(long, value_name = "COL|PATH")]
    labels: Option<String>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Hidden units; defaults to min(D, 256).
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    /// CD-1 learning rate.
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 0.01)]
    lr_guidance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Visible unit type: gaussian or binary.
    #[arg(long, default_value = "gaussian")]
    visible: String,
    /// Fail with exit code 4 instead of training plain CD-1 when voting leaves < 2 clusters.
    #[arg(long)]
    no_fallback: bool,
}

impl ModelArgs {
    fn config(&self, eta: f64) -> Result<PipelineConfig, Error> {
        let visible_kind = VisibleKind::parse(&self.visible).ok_or_else(|| {
            Error::Contract(format!("unknown visible kind {:?}", self.visible))
        })?;
        Ok(PipelineConfig {
            k: self.k,
            eta,
            lr_cd: self.lr,
            lr_guidance: self.lr_guidance,
            epochs: self.epochs,
            hidden_units: self.hidden,
            visible_kind,
            seed: self.seed,
            ensemble: EnsembleConfig::default(),
            allow_fallback: !self.no_fallback,
            ..PipelineConfig::default()
        })
    }
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Weight of the CD-1 term; the guidance term gets 1 - eta.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// LCP file from `ensemble` (instance,cluster rows); voted afresh when absent.
    #[arg(long)]
    lcp: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    predicted: PathBuf,
    /// Also write metrics.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Weight of the CD-1 term; the guidance term gets 1 - eta.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Eta values as start:stop:step (inclusive) or a single value.
    #[arg(long, value_name = "RANGE", default_value = "0.1:0.9:0.1")]
    eta: String,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Train(a) => cmd_train(a),
        Command::Features(a) => cmd_features(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InsufficientConsensus { .. } => 4,
        Error::NumericOverflow { .. } | Error::Numeric(_) | Error::DegenerateClustering(_) => 3,
        _ => 2,
    }
}

fn load(args: &DataArgs) -> Result<(DataMatrix, Option<Vec<usize>>), Error> {
    let column = match &args.labels {
        Some(s) if !Path::new(s).exists() => Some(
            s.parse::<usize>()
                .map_err(|_| Error::Contract(format!("--labels {s:?} is neither a file nor a column index")))?,
        ),
        _ => None,
    };
    let (data, from_column) = load_csv(&args.data, args.header, column)?;
    let truth = match (&args.labels, from_column) {
        (_, Some(t)) => Some(t),
        (Some(path), None) => Some(load_labels(path)?),
        (None, None) => None,
    };
    Ok((data, truth))
}

fn out_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_partitions(dir: &Path, prefix: &str, ens: &Ensemble) -> Result<(), Error> {
    for (name, p) in Ensemble::NAMES.iter().zip(ens.as_array()) {
        write_labels(dir.join(format!("{prefix}{name}.labels")), p.labels())?;
    }
    Ok(())
}

fn write_lcp(path: &Path, lcp: &LocalClusterPartition) -> Result<(), Error> {
    let mut s = String::from("instance,cluster\n");
    for (c, members) in lcp.clusters().iter().enumerate() {
        for i in members {
            s.push_str(&format!("{i},{c}\n"));
        }
    }
    write_text(path, &s)
}

fn read_lcp(path: &Path, n: usize) -> Result<LocalClusterPartition, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (row, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |col: usize| -> Result<usize, Error> {
            fields
                .get(col)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Parse {
                    row: row + 1,
                    column: col + 1,
                    message: format!("bad LCP line {line:?}"),
                })
        };
        let (i, c) = (parse(0)?, parse(1)?);
        if clusters.len() <= c {
            clusters.resize(c + 1, Vec::new());
        }
        clusters[c].push(i);
    }
    LocalClusterPartition::new(clusters, n)
}

fn cmd_ensemble(a: EnsembleArgs) -> Result<(), Error> {
    let (raw, _) = load(&a.data)?;
    let (data, _) = standardize(&raw)?;
    let ens = run_ensemble(&data, a.k, a.seed, &EnsembleConfig::default())?;
    out_dir(&a.out)?;
    write_partitions(&a.out, "", &ens)?;
    let lcp = unanimous_vote(ens.as_array(), 0, 2)?;
    write_lcp(&a.out.join("lcp.csv"), &lcp)?;
    println!(
        "clusters: kmeans {}, affinity_propagation {}, spectral {}; LCP {} clusters covering {}/{}",
        ens.kmeans.k(),
        ens.affinity.k(),
        ens.spectral.k(),
        lcp.k(),
        lcp.covered(),
        lcp.n_total()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), Error> {
    let (raw, _) = load(&a.data)?;
    let cfg = a.model.config(a.eta)?;
    let (data, lcp) = match &a.lcp {
        Some(path) => {
            cfg.validate(raw.n_cols())?;
            let (data, _) = standardize(&raw)?;
            let lcp = read_lcp(path, data.n_rows())?;
            (data, Some(lcp))
        }
        None => {
            let prepared = prepare(&cfg, &raw)?;
            (prepared.data, prepared.lcp)
        }
    };
    let outcome = train(&data, lcp.as_ref(), &cfg.mirbm(data.n_cols()))?;
    out_dir(&a.out)?;
    save_model(&outcome.params, a.out.join("model.bin"))?;
    let mut hist = String::from("epoch,recon_error,guidance_loss,fallback\n");
    for s in &outcome.history {
        let loss = s.guidance_loss.map(|l| l.to_string()).unwrap_or_default();
        hist.push_str(&format!("{},{},{},{}\n", s.epoch, s.recon_error, loss, s.fallback));
    }
    write_text(&a.out.join("history.csv"), &hist)?;
    println!("trained {} epochs{}", outcome.history.len(), if outcome.fell_back() { " (plain CD-1 fallback)" } else { "" });
    Ok(())
}

fn cmd_features(a: FeaturesArgs) -> Result<(), Error> {
    let (raw, _) = load(&a.data)?;
    let params = load_model(&a.model)?;
    let data = match params.visible_kind {
        VisibleKind::GaussianUnitVariance => standardize(&raw)?.0,
        VisibleKind::Binary => raw,
    };
    let features = extract_features(&params, &data)?;
    out_dir(&a.out)?;
    write_matrix_csv(a.out.join("features.csv"), &features.values)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), Error> {
    let truth = load_labels(&a.truth)?;
    let predicted = load_labels(&a.predicted)?;
    let report = evaluate(&truth, &predicted)?;
    let json = format!(
        "{{\n  \"accuracy\": {},\n  \"purity\": {},\n  \"fmi\": {},\n  \"jaccard\": {}\n}}\n",
        report.accuracy,
        report.purity,
        opt(report.fmi),
        opt(report.jaccard)
    );
    print!("{json}");
    if let Some(dir) = &a.out {
        out_dir(dir)?;
        write_text(&dir.join("metrics.json"), &json)?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "null".into())
}

fn write_run(dir: &Path, run: &RunOutput) -> Result<(), Error> {
    out_dir(dir)?;
    write_text(&dir.join("report.json"), &(run.report.to_json() + "\n"))?;
    write_text(
        &dir.join("timings.json"),
        &format!(
            "{{\"standardize_ms\":{},\"ensemble_ms\":{},\"vote_ms\":{},\"train_ms\":{},\"features_ms\":{},\"evaluate_ms\":{}}}\n",
            run.timings.standardize_ms,
            run.timings.ensemble_ms,
            run.timings.vote_ms,
            run.timings.train_ms,
            run.timings.features_ms,
            run.timings.evaluate_ms
        ),
    )?;
    save_model(&run.params, dir.join("model.bin"))?;
    write_matrix_csv(dir.join("features.csv"), &run.features)?;
    write_partitions(dir, "raw_", &run.raw_partitions)?;
    write_partitions(dir, "features_", &run.feature_partitions)?;
    if let Some(lcp) = &run.lcp {
        write_lcp(&dir.join("lcp.csv"), lcp)?;
    }
    write_metrics_csv(dir.join("metrics.csv"), &metric_rows(&run.report))
}

fn summarize(run: &RunOutput) {
    for c in &run.report.clusterers {
        match (c.raw, c.features) {
            (Some(r), Some(f)) => println!(
                "eta {:.2} {:<22} accuracy raw {:.4} -> features {:.4}",
                run.report.config.eta, c.name, r.accuracy, f.accuracy
            ),
            _ => println!(
                "eta {:.2} {:<22} clusters raw {} features {}",
                run.report.config.eta, c.name, c.raw_clusters, c.feature_clusters
            ),
        }
    }
}

fn cmd_pipeline(a: PipelineArgs) -> Result<(), Error> {
    let (raw, truth) = load(&a.data)?;
    let cfg = a.model.config(a.eta)?;
    let run = run_pipeline(&cfg, &raw, truth.as_deref())?;
    write_run(&a.out, &run)?;
    summarize(&run);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Error> {
    let (raw, truth) = load(&a.data)?;
    let cfg = a.model.config(0.1)?;
    let etas = parse_eta_range(&a.eta)?;
    let runs = sweep(&cfg, &raw, truth.as_deref(), &etas, a.threads)?;
    out_dir(&a.out)?;
    let mut rows = Vec::new();
    for run in &runs {
        write_run(&a.out.join(format!("eta_{}", run.report.config.eta)), run)?;
        rows.extend(metric_rows(&run.report));
        summarize(run);
    }
    write_metrics_csv(a.out.join("metrics.csv"), &rows)
}
