//! Command implementations for the `trajmode` binary. Every stage reads and
//! writes files, so each step can be inspected or rerun on its own.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use trajmode::classify::{BuiltinLearner, ClassifierKind, ClassifierModel, Learner, ModelDocument, TrainConfig};
use trajmode::denoise::{denoise_matrix, DEFAULT_THRESHOLD};
use trajmode::evaluate::{
    compare, map_classes, render_csv, render_table, ClassSubsetConfig, EvalReport, ExperimentConfig,
};
use trajmode::ingest::{
    emit_geolife, filter_short, load_geolife, read_archive, write_archive, ParsePolicy, DEFAULT_MIN_POINTS,
};
use trajmode::normalize::MinMaxParams;
use trajmode::pointfeat::PointFeatureOptions;
use trajmode::synthgen::{corrupt, default_profiles, generate, ModeProfile};
use trajmode::trajfeat::{featurize_samples, FeatureMatrix, FeatureOptions, PercentileMethod};
use trajmode::TrajectorySample;

pub const DATA_DIR_ENV: &str = "TRAJMODE_DATA_DIR";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| anyhow!("a --seed is required so runs are reproducible"))
}

fn mode_counts(samples: &[TrajectorySample]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.mode().to_string()).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// GeoLife root (containing `Data/`) or the `Data/` directory itself.
    #[arg(long, env = DATA_DIR_ENV)]
    pub data_dir: PathBuf,
    /// Output sample archive (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Abort on the first malformed record instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_POINTS)]
    pub min_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub users: usize,
    pub points_read: usize,
    pub skipped_records: usize,
    pub samples_assembled: usize,
    pub samples_kept: usize,
    pub per_mode: BTreeMap<String, usize>,
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<IngestSummary> {
    let policy = if args.strict {
        ParsePolicy::Strict
    } else {
        ParsePolicy::Lenient
    };
    let load = load_geolife(&args.data_dir, policy).context("ingest")?;
    for (path, err) in &load.skipped {
        log::warn!("{}: skipped {err}", path.display());
    }
    let assembled = load.samples.len();
    let samples = filter_short(load.samples, args.min_points).context("ingest")?;
    write_archive(&samples, create(&args.out)?).context("ingest: writing archive")?;
    Ok(IngestSummary {
        users: load.users,
        points_read: load.points_read,
        skipped_records: load.skipped.len(),
        samples_assembled: assembled,
        samples_kept: samples.len(),
        per_mode: mode_counts(&samples),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum PercentileArg {
    #[default]
    Linear,
    NearestRank,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    /// Sample archive written by `ingest` or `synth`.
    #[arg(long)]
    pub archive: PathBuf,
    /// Output feature CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Fold bearing differences into [-180, 180) before computing bearing rate.
    #[arg(long)]
    pub wrap_bearing: bool,
    #[arg(long, value_enum, default_value_t = PercentileArg::Linear)]
    pub percentile: PercentileArg,
}

pub fn cmd_featurize(args: &FeaturizeArgs) -> Result<usize> {
    let samples =
        read_archive(open(&args.archive)?).with_context(|| format!("featurize: reading {}", args.archive.display()))?;
    let opts = FeatureOptions {
        point: PointFeatureOptions {
            wrap_bearing: args.wrap_bearing,
        },
        percentile: match args.percentile {
            PercentileArg::Linear => PercentileMethod::Linear,
            PercentileArg::NearestRank => PercentileMethod::NearestRank,
        },
    };
    let matrix = featurize_samples(&samples, opts).context("featurize")?;
    matrix.write_csv(create(&args.out)?).context("featurize: writing CSV")?;
    Ok(matrix.len())
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    /// Input feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    /// Output feature CSV without the masked rows.
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar JSON listing removed samples and mask statistics.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Mask each mode separately instead of the pooled dataset.
    #[arg(long)]
    pub per_mode: bool,
}

pub fn cmd_denoise(args: &DenoiseArgs) -> Result<(usize, usize)> {
    let matrix = read_features(&args.features).context("denoise")?;
    let (kept, report) = denoise_matrix(matrix, args.threshold, args.per_mode).context("denoise")?;
    kept.write_csv(create(&args.out)?).context("denoise: writing CSV")?;
    write_json(&args.report, &report)?;
    Ok((report.rows_before, report.rows_after))
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Depth limit of the decision tree.
    #[arg(long, default_value_t = 5)]
    pub max_depth: usize,
    /// Depth limit of forest trees (unlimited when omitted).
    #[arg(long)]
    pub forest_max_depth: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub n_trees: usize,
}

impl ModelArgs {
    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            max_depth: self.max_depth,
            forest_max_depth: self.forest_max_depth,
            n_trees: self.n_trees,
            rng_seed: seed,
            ..TrainConfig::default()
        }
    }
}

impl Default for ModelArgs {
    fn default() -> Self {
        ModelArgs {
            max_depth: 5,
            forest_max_depth: None,
            n_trees: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum DenoiseMode {
    /// Only the denoised pipeline.
    Denoise,
    /// Only the pipeline with noise.
    NoDenoise,
    /// Both, with paired t-tests.
    #[default]
    Both,
}

impl DenoiseMode {
    fn settings(self) -> &'static [bool] {
        match self {
            DenoiseMode::Denoise => &[true],
            DenoiseMode::NoDenoise => &[false],
            DenoiseMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Feature CSV written by `featurize`.
    #[arg(long)]
    pub features: PathBuf,
    /// Preset name (dabiri, jiang, xiao, zheng, endo, all11) or a JSON subset file.
    #[arg(long, default_value = "all11")]
    pub subset: String,
    /// Comma-separated classifiers: dt, rf, nb.
    #[arg(long, value_delimiter = ',', default_value = "dt,rf,nb")]
    pub classifiers: Vec<String>,
    #[arg(long, value_enum, default_value_t = DenoiseMode::Both)]
    pub denoise: DenoiseMode,
    #[arg(short, long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub per_mode_mask: bool,
    /// Plain shuffled folds instead of stratified ones.
    #[arg(long)]
    pub non_stratified: bool,
    /// Fit min-max scaling on all rows rather than each training split.
    #[arg(long)]
    pub fit_on_all: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-fold CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let seed = require_seed(args.seed).context("evaluate")?;
    let subset = ClassSubsetConfig::resolve(&args.subset).context("evaluate")?;
    let kinds = args
        .classifiers
        .iter()
        .map(|s| s.parse::<ClassifierKind>())
        .collect::<Result<Vec<_>, _>>()
        .context("evaluate")?;
    if kinds.is_empty() {
        bail!("evaluate: no classifiers requested");
    }
    let matrix = read_features(&args.features).context("evaluate")?;
    let learners: Vec<BuiltinLearner> = kinds
        .iter()
        .map(|&kind| BuiltinLearner {
            kind,
            config: args.model.train_config(seed),
        })
        .collect();
    let refs: Vec<&dyn Learner> = learners.iter().map(|l| l as &dyn Learner).collect();
    let cfg = ExperimentConfig {
        k: args.k,
        seed,
        threshold: args.threshold,
        per_mode_mask: args.per_mode_mask,
        stratified: !args.non_stratified,
        fit_on_all: args.fit_on_all,
    };
    let report = compare(&matrix, &subset, &refs, args.denoise.settings(), &cfg).context("evaluate")?;
    write_json(&args.out, &report)?;
    if let Some(csv) = &args.csv {
        let mut w = create(csv)?;
        w.write_all(render_csv(&report).as_bytes())?;
        w.flush()?;
    }
    Ok(report)
}

pub fn render_report(report: &EvalReport) -> String {
    render_table(report)
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON array of mode profiles; defaults to walk, bike, bus and car.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Output sample archive.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the samples in GeoLife layout under this directory.
    #[arg(long)]
    pub emit_plt: Option<PathBuf>,
    /// Corrupt this fraction of samples with teleported fixes.
    #[arg(long)]
    pub corrupt: Option<f64>,
    /// Where to write the indices of corrupted samples.
    #[arg(long)]
    pub corrupted_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub samples: usize,
    pub corrupted: Vec<usize>,
    pub per_mode: BTreeMap<String, usize>,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<SynthSummary> {
    let seed = require_seed(args.seed).context("synth")?;
    let profiles: Vec<ModeProfile> = match &args.profiles {
        Some(p) => serde_json::from_reader(open(p)?).with_context(|| format!("synth: reading {}", p.display()))?,
        None => default_profiles(),
    };
    let samples = generate(&profiles, seed).context("synth")?;
    let (samples, corrupted) = match args.corrupt {
        Some(f) => corrupt(samples, f, seed).context("synth")?,
        None => (samples, Vec::new()),
    };
    write_archive(&samples, create(&args.out)?).context("synth: writing archive")?;
    if let Some(dir) = &args.emit_plt {
        emit_geolife(&samples, dir).context("synth: writing GeoLife tree")?;
    }
    if let Some(path) = &args.corrupted_out {
        write_json(path, &corrupted)?;
    }
    Ok(SynthSummary {
        samples: samples.len(),
        per_mode: mode_counts(&samples),
        corrupted,
    })
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value = "all11")]
    pub subset: String,
    #[arg(long, default_value = "rf")]
    pub classifier: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Apply the median-filter mask before training.
    #[arg(long)]
    pub denoise: bool,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<ModelDocument> {
    let seed = require_seed(args.seed).context("train")?;
    let kind: ClassifierKind = args.classifier.parse().context("train")?;
    let subset = ClassSubsetConfig::resolve(&args.subset).context("train")?;
    let matrix = read_features(&args.features).context("train")?;
    let rows = map_classes(matrix.rows, &subset).context("train")?;
    let mut matrix = FeatureMatrix::new(rows).context("train")?;
    if args.denoise {
        matrix = denoise_matrix(matrix, args.threshold, false)
            .context("train: denoise")?
            .0;
    }
    let x = matrix.values();
    let scaling = MinMaxParams::fit(&x).context("train: normalize")?;
    let x = scaling.transform_rows(&x)?;
    let model = ClassifierModel::fit(kind, &x, &matrix.labels(), &args.model.train_config(seed)).context("train")?;
    let doc = ModelDocument::new(model, Some(scaling));
    let mut w = create(&args.out)?;
    w.write_all(doc.to_json()?.as_bytes())?;
    w.flush()?;
    Ok(doc)
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Output CSV of `user_id,mode,predicted`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs) -> Result<usize> {
    let text = fs::read_to_string(&args.model).with_context(|| format!("opening {}", args.model.display()))?;
    let doc = ModelDocument::from_json(&text).context("predict: decoding model")?;
    let matrix = read_features(&args.features).context("predict")?;
    let mut x = matrix.values();
    if let Some(scaling) = &doc.normalization {
        x = scaling.transform_rows(&x).context("predict: normalize")?;
    }
    let pred = doc.model.predict(&x).context("predict")?;
    let mut w = create(&args.out)?;
    writeln!(w, "user_id,mode,predicted")?;
    for (row, p) in matrix.rows.iter().zip(&pred) {
        writeln!(w, "{},{},{}", row.sample_ref.user_id, row.label, p)?;
    }
    w.flush()?;
    Ok(pred.len())
}
