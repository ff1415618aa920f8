//! Batch experiment front end: prepare datasets, train classifiers,
//! evaluate under configurable noise, sweep noise levels, and inspect
//! checkpoints. Settings come from an optional TOML config file plus
//! command-line flags; flags win.

mod config;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use quilt_core::checkpoint::Checkpoint;
use quilt_core::circuits::VariantId;
use quilt_core::data::{
    cifar, idx, load_prepared, prepare_dataset, save_prepared, task_preset, PrepareOptions,
    RawDataset,
};
use quilt_core::statevector::NoiseModel;
use quilt_core::training::{
    evaluate_model, train_onevsone, train_plain_ensemble, train_quilt, Method, Metrics,
    RuntimeModel, Split, TrainConfig, TrainedUnit, DEFAULT_SWEEP_MAX, DEFAULT_SWEEP_STEPS,
};

use config::FileConfig;

pub const METRICS_FORMAT: &str = "quilt-metrics";
pub const METRICS_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "quilt",
    about = "Ensembles of small variational quantum classifiers: data preparation, training, and noisy evaluation",
    version
)]
struct Cli {
    /// TOML config file supplying defaults; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for data-parallel sections (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load raw image files, compress with PCA, and write an encoded
    /// dataset file.
    Prepare(PrepareArgs),
    /// Train a classifier on a prepared dataset and write a checkpoint
    /// plus a per-epoch CSV log.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split and write a JSON metrics file.
    Eval(EvalArgs),
    /// Evaluate a checkpoint across noise levels and write a CSV curve.
    NoiseSweep(NoiseSweepArgs),
    /// Print a human-readable checkpoint summary.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Task preset, e.g. mnist-8, fashion-4, cifar-2.
    #[arg(long)]
    task: Option<String>,
    /// Directory holding the raw files (default: $QUILT_DATA_DIR or ./data).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Explicit IDX images file (overrides --data-dir discovery).
    #[arg(long, requires = "labels")]
    images: Option<PathBuf>,
    /// Explicit IDX labels file.
    #[arg(long, requires = "images")]
    labels: Option<PathBuf>,
    /// Explicit CIFAR-10 binary batch file(s).
    #[arg(long = "batch")]
    batches: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on the number of task rows (uniform subsample).
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    pca_components: Option<usize>,
    /// Fit PCA on all task rows instead of the train split only.
    #[arg(long)]
    pca_on_all: bool,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Output dataset file (default: <task>.dataset.json in the out dir).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Prepared dataset file from `quilt prepare`.
    #[arg(long)]
    dataset: PathBuf,
    /// quilt | onevsone | ensemble.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Rotation/entangling blocks per circuit.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Variant for the plain-ensemble baseline (V1..V5).
    #[arg(long)]
    variant: Option<String>,
    /// Output checkpoint file (default: <method>.checkpoint.json).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Per-epoch CSV log (default: <method>.train_log.csv).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// train | test.
    #[arg(long)]
    split: Option<String>,
    /// Depolarizing probability per single-qubit gate.
    #[arg(long)]
    p1: Option<f64>,
    /// Depolarizing probability per two-qubit gate.
    #[arg(long)]
    p2: Option<f64>,
    /// Output metrics file (default: metrics.json).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseSweepArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Explicit levels as "p1:p2,p1:p2,...". Overrides interpolation.
    #[arg(long)]
    levels: Option<String>,
    /// Number of interpolated levels from (0,0) to (--max-p1, --max-p2).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    max_p1: Option<f64>,
    #[arg(long)]
    max_p2: Option<f64>,
    #[arg(long)]
    split: Option<String>,
    /// Output CSV file (default: noise_sweep.csv).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    checkpoint: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(workers) = cli.workers.or(file_cfg.workers) {
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        quilt_core::parallel::configure_workers(workers)
            .map_err(|e| anyhow::anyhow!("worker pool setup failed: {e}"))?;
    }
    match cli.command {
        Command::Prepare(args) => cmd_prepare(args, &file_cfg),
        Command::Train(args) => cmd_train(args, &file_cfg),
        Command::Eval(args) => cmd_eval(args, &file_cfg),
        Command::NoiseSweep(args) => cmd_noise_sweep(args, &file_cfg),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn out_path(explicit: Option<PathBuf>, cfg: &FileConfig, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        cfg.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name)
    })
}

fn resolve_data_dir(explicit: Option<PathBuf>, cfg: &FileConfig) -> PathBuf {
    explicit
        .or_else(|| cfg.data_dir.clone())
        .or_else(|| std::env::var_os("QUILT_DATA_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Find a file under `dir` trying the gzipped name first.
fn find_file(dir: &Path, names: &[&str]) -> Option<PathBuf> {
    names.iter().map(|n| dir.join(n)).find(|p| p.exists())
}

fn load_raw(args: &PrepareArgs, dataset: &str, data_dir: &Path) -> Result<RawDataset> {
    if let (Some(images), Some(labels)) = (&args.images, &args.labels) {
        return Ok(idx::load_idx(images, labels)?);
    }
    if !args.batches.is_empty() {
        return Ok(cifar::load_cifar10(&args.batches)?);
    }
    match dataset {
        "mnist" | "fashion" | "fashion-mnist" => {
            let images = find_file(
                data_dir,
                &["train-images-idx3-ubyte.gz", "train-images-idx3-ubyte"],
            )
            .with_context(|| {
                format!(
                    "no train-images-idx3-ubyte[.gz] under {}; pass --images/--labels",
                    data_dir.display()
                )
            })?;
            let labels = find_file(
                data_dir,
                &["train-labels-idx1-ubyte.gz", "train-labels-idx1-ubyte"],
            )
            .with_context(|| {
                format!(
                    "no train-labels-idx1-ubyte[.gz] under {}; pass --images/--labels",
                    data_dir.display()
                )
            })?;
            Ok(idx::load_idx(&images, &labels)?)
        }
        "cifar" | "cifar10" => {
            let mut batches = Vec::new();
            for dir in [data_dir.to_path_buf(), data_dir.join("cifar-10-batches-bin")] {
                for i in 1..=5 {
                    if let Some(p) = find_file(&dir, &[&format!("data_batch_{i}.bin")]) {
                        batches.push(p);
                    }
                }
                if let Some(p) = find_file(&dir, &["test_batch.bin"]) {
                    batches.push(p);
                }
                if !batches.is_empty() {
                    break;
                }
            }
            if batches.is_empty() {
                bail!(
                    "no CIFAR-10 .bin batches under {}; pass --batch",
                    data_dir.display()
                );
            }
            Ok(cifar::load_cifar10(&batches)?)
        }
        other => bail!("no loader for dataset {other:?}"),
    }
}

fn cmd_prepare(args: PrepareArgs, cfg: &FileConfig) -> Result<()> {
    let task = args
        .task
        .clone()
        .or_else(|| cfg.task.clone())
        .context("no task given (flag --task or config `task`)")?;
    let (dataset, map) = task_preset(&task)?;
    let data_dir = resolve_data_dir(args.data_dir.clone(), cfg);
    let raw = load_raw(&args, &dataset, &data_dir)?;
    let opts = PrepareOptions {
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        limit: args.limit.or(cfg.limit),
        pca_components: args
            .pca_components
            .or(cfg.pca_components)
            .unwrap_or(quilt_core::data::PCA_COMPONENTS),
        pca_on_all: args.pca_on_all || cfg.pca_on_all.unwrap_or(false),
        train_fraction: args.train_fraction.or(cfg.train_fraction).unwrap_or(0.8),
    };
    let prepared = prepare_dataset(&raw, &map, &opts)?;
    let out = out_path(args.out, cfg, &format!("{task}.dataset.json"));
    save_prepared(&out, &prepared, &dataset, &task)?;
    load_prepared(&out)?; // written artifact must read back clean
    println!(
        "prepared {}: {} rows ({} train / {} test), {} classes, written to {}",
        task,
        prepared.encoded.len(),
        prepared.encoded.train.len(),
        prepared.encoded.test.len(),
        prepared.encoded.num_classes,
        out.display()
    );
    Ok(())
}

fn write_train_log(path: &Path, units: &[TrainedUnit]) -> Result<()> {
    let mut csv = String::from("model,epoch,loss,batch_accuracy\n");
    for unit in units {
        for rec in &unit.log {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                unit.label, rec.epoch, rec.loss, rec.batch_accuracy
            ));
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn cmd_train(args: TrainArgs, cfg: &FileConfig) -> Result<()> {
    let method: Method = args
        .method
        .clone()
        .or_else(|| cfg.method.clone())
        .unwrap_or_else(|| "quilt".into())
        .parse()?;
    let train_cfg = TrainConfig {
        epochs: args.epochs.or(cfg.epochs).unwrap_or(100),
        batch_size: args.batch_size.or(cfg.batch_size).unwrap_or(50),
        learning_rate: args.learning_rate.or(cfg.learning_rate).unwrap_or(0.05),
        num_blocks: args.blocks.or(cfg.blocks).unwrap_or(2),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
    };
    train_cfg.validate()?;
    let file = load_prepared(&args.dataset)?;
    let ds = &file.prepared.encoded;
    let class_map = Some(&file.prepared.class_map);

    let (checkpoint, units): (Checkpoint, Vec<TrainedUnit>) = match method {
        Method::Quilt => {
            let outcome = train_quilt(ds, &train_cfg)?;
            let ckpt = Checkpoint::from_quilt(&outcome, &train_cfg, class_map);
            (ckpt, outcome.units)
        }
        Method::OneVsOne => {
            let units = train_onevsone(ds, &train_cfg)?;
            let ckpt = Checkpoint::from_units(
                method,
                &units,
                &train_cfg,
                ds.num_bits,
                ds.num_classes,
                class_map,
            );
            (ckpt, units)
        }
        Method::Ensemble => {
            let variant: VariantId = args
                .variant
                .clone()
                .or_else(|| cfg.variant.clone())
                .unwrap_or_else(|| "V2".into())
                .parse()?;
            let units = train_plain_ensemble(variant, ds, &train_cfg)?;
            let ckpt = Checkpoint::from_units(
                method,
                &units,
                &train_cfg,
                ds.num_bits,
                ds.num_classes,
                class_map,
            );
            (ckpt, units)
        }
    };

    let out = out_path(args.out, cfg, &format!("{method}.checkpoint.json"));
    checkpoint.save(&out)?;
    Checkpoint::load(&out)?; // written artifact must read back clean
    let log_path = out_path(args.log, cfg, &format!("{method}.train_log.csv"));
    write_train_log(&log_path, &units)?;
    println!(
        "trained {} ({} models) on {}: checkpoint {}, log {}",
        method,
        checkpoint.models.len(),
        file.task,
        out.display(),
        log_path.display()
    );
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct MetricsFile {
    format: String,
    version: u32,
    method: Method,
    split: Split,
    noise: NoiseModel,
    checkpoint_seed: u64,
    metrics: Metrics,
}

fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    dataset: &Path,
    split: Split,
    noise: NoiseModel,
) -> Result<(RuntimeModel, Metrics)> {
    let file = load_prepared(dataset)?;
    let model = checkpoint.to_runtime()?;
    if model.num_classes() != file.prepared.encoded.num_classes {
        bail!(
            "checkpoint is for {} classes but the dataset has {}",
            model.num_classes(),
            file.prepared.encoded.num_classes
        );
    }
    let metrics = evaluate_model(&model, &file.prepared.encoded, split, noise)?;
    Ok((model, metrics))
}

fn cmd_eval(args: EvalArgs, cfg: &FileConfig) -> Result<()> {
    let split: Split = args
        .split
        .clone()
        .or_else(|| cfg.split.clone())
        .unwrap_or_else(|| "test".into())
        .parse()?;
    let noise = NoiseModel::new(
        args.p1.or(cfg.p1).unwrap_or(0.0),
        args.p2.or(cfg.p2).unwrap_or(0.0),
    )?;
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let (_, metrics) = evaluate_checkpoint(&checkpoint, &args.dataset, split, noise)?;
    let out = out_path(args.out, cfg, "metrics.json");
    let payload = MetricsFile {
        format: METRICS_FORMAT.to_string(),
        version: METRICS_VERSION,
        method: checkpoint.method,
        split,
        noise,
        checkpoint_seed: checkpoint.seed,
        metrics,
    };
    std::fs::write(&out, serde_json::to_string_pretty(&payload)?)?;
    let reread: MetricsFile = serde_json::from_str(&std::fs::read_to_string(&out)?)?;
    println!(
        "{} on {:?} split, noise (p1={}, p2={}): accuracy {:.4}, correction rate {:.4}, {} circuit evals — {}",
        checkpoint.method,
        split,
        noise.p1,
        noise.p2,
        reread.metrics.accuracy,
        reread.metrics.correction_trigger_fraction,
        reread.metrics.circuit_evaluations,
        out.display()
    );
    Ok(())
}

fn parse_levels(spec: &str) -> Result<Vec<NoiseModel>> {
    let mut levels = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (p1, p2) = match part.split_once(':') {
            Some((a, b)) => (a.trim().parse()?, b.trim().parse()?),
            // A bare number applies to both gate classes.
            None => {
                let t: f64 = part.parse()?;
                (t, t)
            }
        };
        levels.push(NoiseModel::new(p1, p2)?);
    }
    if levels.is_empty() {
        bail!("--levels parsed to an empty list");
    }
    Ok(levels)
}

fn cmd_noise_sweep(args: NoiseSweepArgs, cfg: &FileConfig) -> Result<()> {
    let split: Split = args
        .split
        .clone()
        .or_else(|| cfg.split.clone())
        .unwrap_or_else(|| "test".into())
        .parse()?;
    let levels: Vec<NoiseModel> = match &args.levels {
        Some(spec) => parse_levels(spec)?,
        None => {
            let steps = args.steps.unwrap_or(DEFAULT_SWEEP_STEPS);
            if steps == 0 {
                bail!("--steps must be at least 1");
            }
            let max_p1 = args.max_p1.unwrap_or(DEFAULT_SWEEP_MAX.0);
            let max_p2 = args.max_p2.unwrap_or(DEFAULT_SWEEP_MAX.1);
            (0..steps)
                .map(|i| {
                    let t = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
                    NoiseModel::new(t * max_p1, t * max_p2)
                })
                .collect::<quilt_core::Result<_>>()?
        }
    };
    let mut levels = levels;
    levels.sort_by(|a, b| (a.p1, a.p2).partial_cmp(&(b.p1, b.p2)).unwrap());
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let mut csv = String::from("p1,p2,accuracy\n");
    let mut summary = Vec::new();
    for &noise in &levels {
        let (_, metrics) = evaluate_checkpoint(&checkpoint, &args.dataset, split, noise)?;
        csv.push_str(&format!("{},{},{}\n", noise.p1, noise.p2, metrics.accuracy));
        summary.push(format!("({}, {}) -> {:.4}", noise.p1, noise.p2, metrics.accuracy));
    }
    let out = out_path(args.out, cfg, "noise_sweep.csv");
    std::fs::write(&out, csv)?;
    println!("noise sweep over {} levels: {} — {}", levels.len(), summary.join(", "), out.display());
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    println!(
        "{} v{} — method {}, {} classes ({} bits), seed {}",
        ckpt.format, ckpt.version, ckpt.method, ckpt.num_classes, ckpt.num_bits, ckpt.seed
    );
    if let Some(gamma) = ckpt.gamma {
        println!("confidence gate gamma = {gamma}");
    }
    if let Some(classes) = &ckpt.class_map {
        println!("source classes {classes:?}");
    }
    println!(
        "training: {} epochs, batch {}, lr {}, {} blocks",
        ckpt.config.epochs, ckpt.config.batch_size, ckpt.config.learning_rate, ckpt.config.num_blocks
    );
    for m in &ckpt.models {
        println!(
            "  {:<18} {:>3} params, best loss {:.4}, train accuracy {:.3}",
            format!("{:?}", m.role),
            m.params.len(),
            m.best_loss,
            m.train_accuracy
        );
    }
    Ok(())
}
