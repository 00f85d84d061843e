use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, f1, kfold, paired_t_test, Averaging};
use super::subsets::{map_classes, ClassSubsetConfig};
use crate::classify::{encode_labels, Learner};
use crate::denoise::{apply_mask, median_mask, median_mask_grouped, speed_mean_of, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::normalize::MinMaxParams;
use crate::trajfeat::{FeatureMatrix, SampleRef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Mask each class separately instead of the pooled dataset.
    pub per_mode_mask: bool,
    pub stratified: bool,
    /// Fit min-max scaling on the whole dataset instead of each training split.
    pub fit_on_all: bool,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        ExperimentConfig {
            k: 10,
            seed,
            threshold: DEFAULT_THRESHOLD,
            per_mode_mask: false,
            stratified: true,
            fit_on_all: false,
        }
    }

    fn learner_seed(&self, fold: usize) -> u64 {
        self.seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub f1_macro: f64,
    pub f1_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub classifier: String,
    pub denoised: bool,
    pub folds: Vec<FoldScore>,
    pub mean_accuracy: f64,
    pub mean_f1_macro: f64,
    pub mean_f1_weighted: f64,
}

impl CellReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn f1_macros(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.f1_macro).collect()
    }
}

/// One pass of the pipeline with denoising either on or off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub denoised: bool,
    pub classes: Vec<String>,
    /// Rows after class mapping, before masking.
    pub rows_before_mask: usize,
    pub rows_after_mask: usize,
    pub removed: Vec<SampleRef>,
    pub mask_median: Option<f64>,
    pub mask_median_difference: Option<f64>,
    pub cells: Vec<CellReport>,
}

/// Clean-minus-noisy t statistic for one classifier and metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub classifier: String,
    pub metric: String,
    pub mean_noisy: f64,
    pub mean_clean: f64,
    pub t: Option<f64>,
    pub df: usize,
    /// Set when the test could not be computed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub subset: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub comparisons: Vec<PairedComparison>,
    pub notes: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs one pipeline pass: class mapping, optional median-filter masking
/// over the whole mapped dataset, then k-fold cross-validation where each
/// fold fits min-max scaling on its training split and trains every
/// learner.
pub fn run_experiment(
    dataset: &FeatureMatrix,
    subset: &ClassSubsetConfig,
    learners: &[&dyn Learner],
    denoise: bool,
    cfg: &ExperimentConfig,
) -> Result<RunReport> {
    let rows = map_classes(dataset.rows.clone(), subset).map_err(|e| e.in_stage("map_classes"))?;
    let rows_before_mask = rows.len();
    if rows.is_empty() {
        return Err(Error::Empty("no rows left after class mapping").in_stage("map_classes"));
    }

    let (rows, removed, mask_median, mask_median_difference) = if denoise {
        let means: Vec<f64> = rows.iter().map(speed_mean_of).collect();
        let mask = if cfg.per_mode_mask {
            let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
            median_mask_grouped(&means, &labels, cfg.threshold)
        } else {
            median_mask(&means, cfg.threshold)
        }
        .map_err(|e| e.in_stage("denoise"))?;
        let removed = rows
            .iter()
            .zip(&mask.flags)
            .filter(|(_, &f)| f)
            .map(|(r, _)| r.sample_ref.clone())
            .collect();
        let (kept, _) = apply_mask(rows, &mask).map_err(|e| e.in_stage("denoise"))?;
        let finite = |v: f64| v.is_finite().then_some(v);
        (kept, removed, finite(mask.median), finite(mask.median_difference))
    } else {
        (rows, Vec::new(), None, None)
    };
    if rows.is_empty() {
        return Err(Error::Empty("training set").in_stage("denoise"));
    }

    let labels: Vec<String> = rows.iter().map(|r| r.label.clone()).collect();
    let (vocab, y) = encode_labels(&labels);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    let folds = kfold(&labels, cfg.k, cfg.seed, cfg.stratified).map_err(|e| e.in_stage("folds"))?;
    let global_scaling = if cfg.fit_on_all {
        Some(MinMaxParams::fit(&x).map_err(|e| e.in_stage("normalize"))?)
    } else {
        None
    };

    let jobs: Vec<(usize, usize)> = (0..folds.len())
        .flat_map(|f| (0..learners.len()).map(move |l| (f, l)))
        .collect();
    let scores: Vec<FoldScore> = jobs
        .par_iter()
        .map(|&(fold, li)| {
            let test_idx = &folds[fold];
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != fold)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let pick = |idx: &[usize]| idx.iter().map(|&i| x[i].clone()).collect::<Vec<_>>();
            let (x_train, x_test) = (pick(&train_idx), pick(test_idx));
            let scaling = match &global_scaling {
                Some(p) => p.clone(),
                None => MinMaxParams::fit(&x_train).map_err(|e| e.in_stage("normalize"))?,
            };
            let x_train = scaling.transform_rows(&x_train).map_err(|e| e.in_stage("normalize"))?;
            let x_test = scaling.transform_rows(&x_test).map_err(|e| e.in_stage("normalize"))?;
            let y_train: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
            let y_test: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();

            let model = learners[li]
                .fit(&x_train, &y_train, &vocab, cfg.learner_seed(fold))
                .map_err(|e| e.in_stage("train"))?;
            let pred = model.predict_indices(&x_test).map_err(|e| e.in_stage("predict"))?;
            let score = |r: Result<f64>| r.map_err(|e| e.in_stage("score"));
            Ok(FoldScore {
                fold,
                n_train: train_idx.len(),
                n_test: test_idx.len(),
                accuracy: score(accuracy(&y_test, &pred))?,
                f1_macro: score(f1(&y_test, &pred, Averaging::Macro))?,
                f1_weighted: score(f1(&y_test, &pred, Averaging::Weighted))?,
            })
        })
        .collect::<Result<_>>()?;

    let cells = learners
        .iter()
        .enumerate()
        .map(|(li, learner)| {
            let folds: Vec<FoldScore> = jobs
                .iter()
                .zip(&scores)
                .filter(|((_, l), _)| *l == li)
                .map(|(_, s)| s.clone())
                .collect();
            let m = |f: fn(&FoldScore) -> f64| mean(&folds.iter().map(f).collect::<Vec<_>>());
            CellReport {
                classifier: learner.name(),
                denoised: denoise,
                mean_accuracy: m(|s| s.accuracy),
                mean_f1_macro: m(|s| s.f1_macro),
                mean_f1_weighted: m(|s| s.f1_weighted),
                folds,
            }
        })
        .collect();

    Ok(RunReport {
        denoised: denoise,
        classes: vocab,
        rows_before_mask,
        rows_after_mask: rows.len(),
        removed,
        mask_median,
        mask_median_difference,
        cells,
    })
}

const LEAKAGE_NOTE: &str = "the noise mask is computed over the whole dataset before cross-validation, \
so test folds are also denoised";
const PAIRING_NOTE: &str = "noisy and clean runs share the fold seed and are paired by fold index, \
but the mask changes the row set so the folds themselves differ";

/// Runs the pipeline for each requested denoise setting and, when both are
/// present, t-tests clean against noisy scores per classifier.
pub fn compare(
    dataset: &FeatureMatrix,
    subset: &ClassSubsetConfig,
    learners: &[&dyn Learner],
    denoise_settings: &[bool],
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let runs = denoise_settings
        .iter()
        .map(|&d| run_experiment(dataset, subset, learners, d, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut notes = Vec::new();
    if runs.iter().any(|r| r.denoised) {
        notes.push(LEAKAGE_NOTE.to_string());
    }
    if let Some(r) = runs.iter().find(|r| r.denoised) {
        notes.push(format!(
            "median filter (threshold {}) removed {} of {} rows",
            cfg.threshold,
            r.rows_before_mask - r.rows_after_mask,
            r.rows_before_mask
        ));
    }

    let mut comparisons = Vec::new();
    let noisy = runs.iter().find(|r| !r.denoised);
    let clean = runs.iter().find(|r| r.denoised);
    if let (Some(noisy), Some(clean)) = (noisy, clean) {
        notes.push(PAIRING_NOTE.to_string());
        for (n, c) in noisy.cells.iter().zip(&clean.cells) {
            for (metric, a, b) in [
                ("f1_macro", c.f1_macros(), n.f1_macros()),
                ("accuracy", c.accuracies(), n.accuracies()),
            ] {
                let test = paired_t_test(&a, &b);
                comparisons.push(PairedComparison {
                    classifier: n.classifier.clone(),
                    metric: metric.to_string(),
                    mean_noisy: mean(&b),
                    mean_clean: mean(&a),
                    t: test.as_ref().ok().map(|t| t.t),
                    df: a.len().saturating_sub(1),
                    error: test.err().map(|e| e.to_string()),
                });
            }
        }
    }

    Ok(EvalReport {
        subset: subset.name.clone(),
        config: cfg.clone(),
        runs,
        comparisons,
        notes,
    })
}
