//! The `molcap` command line: `featurize`, `cv` and `report`.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 training failure.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    featurize_dataset, holdout_split, load_csv_with, read_cache, sha256_hex, sha256_of, stratified_kfold,
    training_indices, write_cache, CaptionedExample, FeaturizeConfig, DEFAULT_LABEL_COLUMN, DEFAULT_SMILES_COLUMN,
};
use crate::maccs::keys_from_env;
use crate::metrics::{aggregate_folds, roc_points, FoldMetrics};
use crate::nn::{predict_examples, save_checkpoint, train, EpochRecord, Model, ModelConfig, Scalar, TrainConfig};
use crate::FEATURIZER_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TRAINING: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const HOLDOUT_FRACTION: f64 = 0.2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "molcap",
    version,
    about = "Captioned molecular images: featurize, cross-validate, report"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Featurize a labelled SMILES CSV into a binary cache.
    Featurize(FeaturizeArgs),
    /// Train and score the classifier under k-fold cross-validation.
    Cv(CvArgs),
    /// Compare finished cv runs in one CSV table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub image_side: usize,
    #[arg(long, default_value_t = 2048)]
    pub fp_bits: usize,
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    #[arg(long, default_value = DEFAULT_SMILES_COLUMN)]
    pub smiles_column: String,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    pub label_column: String,
    /// Exclusion report path; defaults to `<out>.exclusions.csv`.
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    /// Write the first N images as portable graymaps into this directory.
    #[arg(long)]
    pub dump_pgm: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub dump_count: usize,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Cache written by `featurize`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Run directory for metrics, histories, ROC curves and the manifest.
    #[arg(long = "out")]
    pub output: PathBuf,
    /// Take every setting from an earlier run's manifest.
    #[arg(long, conflicts_with = "input")]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr_factor: f64,
    #[arg(long, default_value_t = 3)]
    pub blocks: usize,
    #[arg(long, default_value_t = 16)]
    pub filters: usize,
    #[arg(long, default_value_t = 30)]
    pub max_epochs: usize,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub use_image: bool,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub use_fp: bool,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub use_maccs: bool,
    /// Single stratified 20% test split instead of k folds.
    #[arg(long)]
    pub holdout: bool,
    /// 32-bit arithmetic: faster, not bit-reproducible across builds.
    #[arg(long)]
    pub fast32: bool,
    /// Save each fold's best parameters.
    #[arg(long)]
    pub save_models: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directories written by `cv`.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_fold_seconds: Vec<f64>,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub featurizer_version: u32,
    pub featurize: Option<FeaturizeConfig>,
    pub model: Option<ModelConfig>,
    pub train: Option<TrainConfig>,
    pub folds: usize,
    pub holdout: bool,
    pub split_seed: u64,
    pub precision: String,
    pub featurization: String,
    /// Input path to SHA-256 hex digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub timings: Timings,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            featurizer_version: FEATURIZER_VERSION,
            featurize: None,
            model: None,
            train: None,
            folds: 0,
            holdout: false,
            split_seed: 0,
            precision: "f64".into(),
            featurization: String::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            timings: Timings {
                total_seconds: 0.0,
                per_fold_seconds: Vec::new(),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| io_err(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| io_err(path, e))?;
        fs::write(path, text + "\n").map_err(|e| io_err(path, e))
    }
}

/// Label such as `image+fp+maccs`.
pub fn featurization_name(use_fp: bool, use_maccs: bool) -> String {
    let mut s = String::from("image");
    if use_fp {
        s.push_str("+fp");
    }
    if use_maccs {
        s.push_str("+maccs");
    }
    s
}

fn hash_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(&sha256_of(&bytes)))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_featurize(args: &FeaturizeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let config = FeaturizeConfig {
        side: args.image_side,
        fp_bits: args.fp_bits,
        radius: args.radius,
    };
    let keys = keys_from_env().map_err(|e| CliError::input(e.to_string()))?;
    let bytes = fs::read(&args.input).map_err(|e| io_err(&args.input, e))?;
    let corpus = load_csv_with(&args.input, &args.smiles_column, &args.label_column)
        .map_err(|e| CliError::input(format!("{}: {e}", args.input.display())))?;
    let feats = featurize_dataset(&corpus.molecules, &config, &keys);
    let digest = sha256_of(&bytes);
    write_cache(&args.output, &digest, &config, &feats.examples).map_err(|e| CliError::input(e.to_string()))?;

    let report_path = args
        .exclusions
        .clone()
        .unwrap_or_else(|| sibling(&args.output, ".exclusions.csv"));
    let f = File::create(&report_path).map_err(|e| io_err(&report_path, e))?;
    feats
        .report
        .write_csv(BufWriter::new(f))
        .map_err(|e| io_err(&report_path, e))?;

    let mut outputs = vec![args.output.display().to_string(), report_path.display().to_string()];
    if let Some(dir) = &args.dump_pgm {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for (i, ex) in feats.examples.iter().take(args.dump_count).enumerate() {
            let p = dir.join(format!("{i:05}.pgm"));
            let f = File::create(&p).map_err(|e| io_err(&p, e))?;
            ex.image.write_pgm(BufWriter::new(f)).map_err(|e| io_err(&p, e))?;
        }
        outputs.push(dir.display().to_string());
    }

    let mut manifest = RunManifest::new("featurize");
    manifest.featurize = Some(config);
    manifest
        .inputs
        .insert(args.input.display().to_string(), sha256_hex(&digest));
    manifest.outputs = outputs;
    manifest.timings.total_seconds = start.elapsed().as_secs_f64();
    manifest.save(&sibling(&args.output, ".manifest.json"))?;

    let actives = feats.examples.iter().filter(|e| e.label == 1).count();
    let mut summary = format!(
        "featurized {} of {} molecules ({} actives); {} rejected rows",
        feats.examples.len(),
        corpus.molecules.len(),
        actives,
        corpus.rejects.len()
    );
    for (reason, n) in feats.report.counts_by_reason() {
        summary.push_str(&format!("; {reason}: {n}"));
    }
    println!("{summary}");
    Ok(())
}

fn write_history(path: &Path, history: &[EpochRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in history {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

struct FoldOutcome {
    auc: f64,
    seconds: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_fold<T: Scalar>(
    data: &[CaptionedExample],
    train_idx: &[usize],
    val_idx: &[usize],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    dir: &Path,
    fold: usize,
    save_model: bool,
) -> Result<FoldOutcome, CliError> {
    let start = Instant::now();
    let mut model = Model::<T>::new(model_cfg).map_err(|e| CliError::input(e.to_string()))?;
    let history_path = dir.join(format!("history_fold{fold}.csv"));
    let outcome = match train(&mut model, data, train_idx, val_idx, train_cfg) {
        Ok(o) => o,
        Err(failure) => {
            write_history(&history_path, &failure.history)?;
            return Err(CliError {
                code: EXIT_TRAINING,
                message: format!("fold {fold}: {failure}"),
            });
        }
    };
    write_history(&history_path, &outcome.history)?;
    let scores = predict_examples(&mut model, data, val_idx, train_cfg.batch_size).map_err(|e| CliError {
        code: EXIT_TRAINING,
        message: e.to_string(),
    })?;
    let labels: Vec<u8> = val_idx.iter().map(|&i| data[i].label).collect();
    let roc = roc_points(&scores, &labels).map_err(|e| CliError::input(e.to_string()))?;
    let roc_path = dir.join(format!("roc_fold{fold}.csv"));
    let f = File::create(&roc_path).map_err(|e| io_err(&roc_path, e))?;
    roc.write_csv(BufWriter::new(f)).map_err(|e| io_err(&roc_path, e))?;
    if save_model {
        let p = dir.join(format!("model_fold{fold}.bin"));
        save_checkpoint(&mut model, &p).map_err(|e| io_err(&p, e))?;
    }
    Ok(FoldOutcome {
        auc: roc.auc,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn cv_settings(args: &CvArgs) -> Result<(PathBuf, RunManifest), CliError> {
    if let Some(path) = &args.replay {
        let m = RunManifest::load(path)?;
        if m.command != "cv" {
            return Err(CliError::input(format!("{}: not a cv manifest", path.display())));
        }
        let input = m
            .inputs
            .keys()
            .next()
            .ok_or_else(|| CliError::input(format!("{}: manifest names no input", path.display())))?;
        return Ok((PathBuf::from(input), m));
    }
    let input = args
        .input
        .clone()
        .ok_or_else(|| CliError::input("cv needs --in <cache> or --replay <manifest>"))?;
    if !args.use_image {
        return Err(CliError::input(
            "the image branch cannot be disabled; captions are fused onto image features",
        ));
    }
    if !args.holdout && args.folds < 2 {
        return Err(CliError::input(format!(
            "--folds {} rejected: need at least 2",
            args.folds
        )));
    }
    let mut m = RunManifest::new("cv");
    m.model = Some(ModelConfig {
        blocks_per_stage: args.blocks,
        filters: args.filters,
        use_fingerprint: args.use_fp,
        use_keys: args.use_maccs,
        seed: args.seed,
        ..ModelConfig::default()
    });
    m.train = Some(TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        patience: args.patience,
        lr_factor: args.lr_factor,
        max_epochs: args.max_epochs,
        seed: args.seed,
        ..TrainConfig::default()
    });
    m.folds = if args.holdout { 1 } else { args.folds };
    m.holdout = args.holdout;
    m.split_seed = args.seed;
    m.precision = if args.fast32 { "f32" } else { "f64" }.into();
    m.featurization = featurization_name(args.use_fp, args.use_maccs);
    Ok((input, m))
}

pub fn cmd_cv(args: &CvArgs) -> Result<FoldMetrics, CliError> {
    let start = Instant::now();
    let (input, mut manifest) = cv_settings(args)?;
    let (header, data) = read_cache(&input).map_err(|e| CliError::input(format!("{}: {e}", input.display())))?;
    manifest.inputs = BTreeMap::from([(input.display().to_string(), hash_file(&input)?)]);
    manifest.featurize = Some(header.config);
    let mut model_cfg = manifest
        .model
        .clone()
        .ok_or_else(|| CliError::input("manifest lacks a model config"))?;
    model_cfg.image_side = header.config.side;
    model_cfg.fp_width = header.config.fp_bits;
    model_cfg.validate().map_err(|e| CliError::input(e.to_string()))?;
    manifest.model = Some(model_cfg.clone());
    let base_train = manifest
        .train
        .clone()
        .ok_or_else(|| CliError::input("manifest lacks a train config"))?;
    base_train.validate().map_err(|e| CliError::input(e.to_string()))?;

    let labels: Vec<u8> = data.iter().map(|e| e.label).collect();
    let splits: Vec<(Vec<usize>, Vec<usize>)> = if manifest.holdout {
        vec![holdout_split(&labels, HOLDOUT_FRACTION, manifest.split_seed)
            .map_err(|e| CliError::input(e.to_string()))?]
    } else {
        let split = stratified_kfold(&labels, manifest.folds, manifest.split_seed)
            .map_err(|e| CliError::input(e.to_string()))?;
        (0..manifest.folds)
            .map(|k| (training_indices(&split, k), split.folds[k].clone()))
            .collect()
    };

    let dir = args.output.clone();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut aucs = Vec::new();
    manifest.outputs.clear();
    let mut result = Ok(());
    for (k, (train_idx, val_idx)) in splits.iter().enumerate() {
        let train_cfg = TrainConfig {
            seed: base_train.seed.wrapping_add(k as u64),
            ..base_train.clone()
        };
        manifest
            .outputs
            .push(dir.join(format!("history_fold{k}.csv")).display().to_string());
        let fold = if manifest.precision == "f32" {
            run_fold::<f32>(
                &data,
                train_idx,
                val_idx,
                &model_cfg,
                &train_cfg,
                &dir,
                k,
                args.save_models,
            )
        } else {
            run_fold::<f64>(
                &data,
                train_idx,
                val_idx,
                &model_cfg,
                &train_cfg,
                &dir,
                k,
                args.save_models,
            )
        };
        match fold {
            Ok(f) => {
                aucs.push(f.auc);
                manifest.timings.per_fold_seconds.push(f.seconds);
                manifest
                    .outputs
                    .push(dir.join(format!("roc_fold{k}.csv")).display().to_string());
                eprintln!("fold {k}: AUC {:.4}", f.auc);
            }
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    manifest.timings.total_seconds = start.elapsed().as_secs_f64();
    let metrics = match result {
        Ok(()) => {
            let metrics = aggregate_folds(&aucs).map_err(|e| CliError::input(e.to_string()))?;
            let p = dir.join(METRICS_FILE);
            let text = serde_json::to_string_pretty(&metrics).map_err(|e| io_err(&p, e))?;
            fs::write(&p, text + "\n").map_err(|e| io_err(&p, e))?;
            manifest.outputs.push(p.display().to_string());
            Ok(metrics)
        }
        Err(e) => Err(e),
    };
    manifest.save(&dir.join(MANIFEST_FILE))?;
    let metrics = metrics?;
    println!(
        "mean AUC {:.4} (min {:.4}, max {:.4})",
        metrics.mean, metrics.min, metrics.max
    );
    Ok(metrics)
}

/// One row of the `report` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub featurization: String,
    pub mean_auc: f64,
    pub min_auc: f64,
    pub max_auc: f64,
    pub epochs_to_best: f64,
    pub seconds_per_epoch: f64,
    pub total_seconds: f64,
}

fn read_history(path: &Path) -> Result<Vec<EpochRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| io_err(path, e))
}

pub fn report_row(dir: &Path) -> Result<ReportRow, CliError> {
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;
    let mp = dir.join(METRICS_FILE);
    let metrics: FoldMetrics =
        serde_json::from_str(&fs::read_to_string(&mp).map_err(|e| io_err(&mp, e))?).map_err(|e| io_err(&mp, e))?;
    let mut best_epochs = Vec::new();
    let mut epoch_seconds = Vec::new();
    for k in 0..metrics.per_fold_auc.len() {
        let history = read_history(&dir.join(format!("history_fold{k}.csv")))?;
        let best = history
            .iter()
            .fold(None::<&EpochRecord>, |b, r| match b {
                Some(b) if b.val_auc >= r.val_auc => Some(b),
                _ => Some(r),
            })
            .map_or(0, |r| r.epoch);
        best_epochs.push(best as f64);
        epoch_seconds.extend(history.iter().filter(|r| r.epoch > 0).map(|r| r.seconds));
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    Ok(ReportRow {
        run: dir.display().to_string(),
        featurization: manifest.featurization,
        mean_auc: metrics.mean,
        min_auc: metrics.min,
        max_auc: metrics.max,
        epochs_to_best: mean(&best_epochs),
        seconds_per_epoch: mean(&epoch_seconds),
        total_seconds: manifest.timings.total_seconds,
    })
}

pub fn cmd_report(args: &ReportArgs) -> Result<Vec<ReportRow>, CliError> {
    let mut rows = args.runs.iter().map(|d| report_row(d)).collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| b.mean_auc.total_cmp(&a.mean_auc));
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(File::create(p).map_err(|e| io_err(p, e))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::input(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::input(e.to_string()))?;
    Ok(rows)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Featurize(a) => cmd_featurize(a),
        Command::Cv(a) => cmd_cv(a).map(|_| ()),
        Command::Report(a) => cmd_report(a).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("molcap: {e}");
            e.code
        }
    }
}
