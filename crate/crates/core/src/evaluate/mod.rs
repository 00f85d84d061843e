//! Cross-validation harness: class subsets, stratified folds, accuracy and
//! F1, and the paired comparison of noisy against denoised pipelines.

mod experiment;
mod metrics;
mod report;
mod subsets;

pub use experiment::{
    compare, run_experiment, CellReport, EvalReport, ExperimentConfig, FoldScore, PairedComparison, RunReport,
};
pub use metrics::{
    accuracy, f1, kfold, paired_t_test, per_class_f1, stratified_kfold, Averaging, TTest, T_CRITICAL_DF9_05,
};
pub use report::{render_csv, render_table};
pub use subsets::{map_classes, ClassSubsetConfig, Labeled, PRESET_NAMES};
