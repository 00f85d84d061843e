use std::fmt::Write as _;

use super::experiment::EvalReport;
use super::metrics::T_CRITICAL_DF9_05;

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

/// Classifier rows against {with noise, clean} columns for F1 and accuracy.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let noisy = report.runs.iter().find(|r| !r.denoised);
    let clean = report.runs.iter().find(|r| r.denoised);
    let _ = writeln!(
        out,
        "subset: {}  k: {}  seed: {}  threshold: {}",
        report.subset, report.config.k, report.config.seed, report.config.threshold
    );
    for r in &report.runs {
        let _ = writeln!(
            out,
            "{}: {} rows, classes [{}]",
            if r.denoised { "clean" } else { "with noise" },
            r.rows_after_mask,
            r.classes.join(", ")
        );
    }
    let _ = writeln!(
        out,
        "\n{:<6} {:>12} {:>12} {:>9}   {:>12} {:>12} {:>9}",
        "model", "F1 noise", "F1 clean", "t", "acc noise", "acc clean", "t"
    );
    let names: Vec<&str> = report.runs[0].cells.iter().map(|c| c.classifier.as_str()).collect();
    for (i, name) in names.iter().enumerate() {
        let cell = |run: Option<&super::RunReport>, f: fn(&super::CellReport) -> f64| {
            run.map_or("-".to_string(), |r| pct(f(&r.cells[i])))
        };
        let t = |metric: &str| {
            report
                .comparisons
                .iter()
                .find(|c| c.classifier == *name && c.metric == metric)
                .and_then(|c| c.t)
                .map_or("-".to_string(), |t| format!("{t:.3}"))
        };
        let _ = writeln!(
            out,
            "{:<6} {:>12} {:>12} {:>9}   {:>12} {:>12} {:>9}",
            name,
            cell(noisy, |c| c.mean_f1_macro),
            cell(clean, |c| c.mean_f1_macro),
            t("f1_macro"),
            cell(noisy, |c| c.mean_accuracy),
            cell(clean, |c| c.mean_accuracy),
            t("accuracy"),
        );
    }
    if !report.comparisons.is_empty() {
        let _ = writeln!(
            out,
            "\nreference: two-sided t critical value at alpha = 0.05, df = 9: {T_CRITICAL_DF9_05}"
        );
    }
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

/// Per-fold scores, one line per (run, classifier, fold).
pub fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("classifier,denoised,fold,n_train,n_test,accuracy,f1_macro,f1_weighted\n");
    for run in &report.runs {
        for cell in &run.cells {
            for f in &cell.folds {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    cell.classifier, run.denoised, f.fold, f.n_train, f.n_test, f.accuracy, f.f1_macro, f.f1_weighted
                );
            }
        }
    }
    out
}
