//! Trajectory features: ten statistics over each of the seven point-feature
//! series, giving a 70-value vector per sample.
//!
//! Column `feature * 10 + stat` holds statistic `stat` of point feature
//! `feature`, in the orders of [`POINT_FEATURE_NAMES`] and [`STAT_NAMES`].

use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordError, Result};
use crate::ingest::TrajectorySample;
use crate::pointfeat::{compute_point_features_with, PointFeatureOptions, PointFeatureSeries, POINT_FEATURE_NAMES};

pub const STAT_NAMES: [&str; 10] = ["min", "max", "mean", "median", "std", "p10", "p25", "p50", "p75", "p90"];
pub const PERCENTILES: [f64; 5] = [10.0, 25.0, 50.0, 75.0, 90.0];
pub const N_FEATURES: usize = POINT_FEATURE_NAMES.len() * STAT_NAMES.len();

/// Leading non-feature columns of the feature CSV.
pub const ID_COLUMNS: [&str; 2] = ["user_id", "mode"];

pub fn column_index(feature: &str, stat: &str) -> Option<usize> {
    let f = POINT_FEATURE_NAMES.iter().position(|&n| n == feature)?;
    let s = STAT_NAMES.iter().position(|&n| n == stat)?;
    Some(f * STAT_NAMES.len() + s)
}

pub fn column_names() -> Vec<String> {
    POINT_FEATURE_NAMES
        .iter()
        .flat_map(|f| STAT_NAMES.iter().map(move |s| format!("{f}_{s}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
}

fn sorted_copy(series: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Empty("statistics of an empty series"));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant("series contains a non-finite value".into()));
    }
    let mut v = series.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Median with the mean-of-middle-two rule for even lengths.
pub fn median(series: &[f64]) -> Result<f64> {
    Ok(median_sorted(&sorted_copy(series)?))
}

pub fn global_stats(series: &[f64]) -> Result<GlobalStats> {
    let sorted = sorted_copy(series)?;
    Ok(stats_sorted(&sorted))
}

fn stats_sorted(sorted: &[f64]) -> GlobalStats {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    GlobalStats {
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean,
        median: median_sorted(sorted),
        std: var.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentileMethod {
    /// Interpolate between order statistics at rank `(n - 1) * p / 100`.
    #[default]
    Linear,
    /// The smallest value with at least `p` percent of the data at or below it.
    NearestRank,
}

fn percentile_sorted(sorted: &[f64], p: f64, method: PercentileMethod) -> f64 {
    let n = sorted.len();
    match method {
        PercentileMethod::Linear => {
            let rank = p / 100.0 * (n - 1) as f64;
            let lo = rank.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = rank - lo as f64;
            if frac == 0.0 {
                sorted[lo]
            } else {
                sorted[lo] + frac * (sorted[hi] - sorted[lo])
            }
        }
        PercentileMethod::NearestRank => {
            let rank = (p / 100.0 * n as f64).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        }
    }
}

pub fn percentiles(series: &[f64], ps: &[f64], method: PercentileMethod) -> Result<Vec<f64>> {
    if let Some(p) = ps.iter().find(|p| !(0.0..=100.0).contains(*p)) {
        return Err(Error::Config(format!("percentile {p} outside [0, 100]")));
    }
    let sorted = sorted_copy(series)?;
    Ok(ps.iter().map(|&p| percentile_sorted(&sorted, p, method)).collect())
}

/// Identifies the sample a feature row came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleRef {
    pub user_id: String,
    /// Unknown when the row was read back from a feature CSV.
    pub day: Option<NaiveDate>,
    /// Position of the sample in its archive, which is also its CSV row.
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: String,
    pub sample_ref: SampleRef,
}

impl FeatureVector {
    pub fn get(&self, feature: &str, stat: &str) -> Option<f64> {
        column_index(feature, stat).map(|i| self.values[i])
    }
}

pub fn featurize(pfs: &PointFeatureSeries, label: &str, sample_ref: SampleRef) -> Result<FeatureVector> {
    featurize_with(pfs, label, sample_ref, PercentileMethod::Linear)
}

pub fn featurize_with(
    pfs: &PointFeatureSeries,
    label: &str,
    sample_ref: SampleRef,
    method: PercentileMethod,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(N_FEATURES);
    for series in pfs.series() {
        let sorted = sorted_copy(series)?;
        let g = stats_sorted(&sorted);
        values.extend([g.min, g.max, g.mean, g.median, g.std]);
        values.extend(PERCENTILES.iter().map(|&p| percentile_sorted(&sorted, p, method)));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant("non-finite trajectory feature".into()));
    }
    Ok(FeatureVector {
        values,
        label: label.to_string(),
        sample_ref,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureOptions {
    pub point: PointFeatureOptions,
    pub percentile: PercentileMethod,
}

/// Featurizes samples in parallel; rows keep the input order and
/// `sample_ref.ordinal` is the input index.
pub fn featurize_samples(samples: &[TrajectorySample], opts: FeatureOptions) -> Result<FeatureMatrix> {
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(ordinal, s)| {
            let pfs = compute_point_features_with(s.points(), opts.point)?;
            let sample_ref = SampleRef {
                user_id: s.user_id().to_string(),
                day: Some(s.day()),
                ordinal,
            };
            featurize_with(&pfs, s.mode(), sample_ref, opts.percentile)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(rows)
}

/// Labeled feature rows sharing the canonical 70-column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<FeatureVector>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.values.len() != N_FEATURES) {
            return Err(Error::Layout {
                expected: N_FEATURES,
                found: r.values.len(),
            });
        }
        Ok(FeatureMatrix {
            column_names: column_names(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_columns(&self) -> usize {
        self.column_names.len()
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.label.clone()).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<&str> = ID_COLUMNS
            .iter()
            .copied()
            .chain(self.column_names.iter().map(String::as_str))
            .collect();
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for row in &self.rows {
            record.clear();
            record.push(row.sample_ref.user_id.clone());
            record.push(row.label.clone());
            record.extend(row.values.iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a feature CSV. The header must match the canonical layout
    /// exactly; row `i` gets ordinal `i`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let expected: Vec<String> = ID_COLUMNS.iter().map(|s| s.to_string()).chain(column_names()).collect();
        let header = rdr.headers()?.clone();
        if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
            return Err(Error::Record(RecordError {
                line: 1,
                message: format!("feature CSV header does not match the {}-column layout", expected.len()),
            }));
        }
        let mut rows = Vec::new();
        for (ordinal, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map_or(ordinal + 2, |p| p.line() as usize);
            let bad = |message: String| Error::Record(RecordError { line, message });
            if rec.len() != expected.len() {
                return Err(bad(format!("expected {} fields, found {}", expected.len(), rec.len())));
            }
            let values = rec
                .iter()
                .skip(ID_COLUMNS.len())
                .map(|f| match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(bad(format!("bad feature value `{f}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureVector {
                values,
                label: rec[1].to_string(),
                sample_ref: SampleRef {
                    user_id: rec[0].to_string(),
                    day: None,
                    ordinal,
                },
            });
        }
        FeatureMatrix::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_stats_examples() {
        let g = global_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((g.min, g.max, g.mean, g.median), (1.0, 5.0, 3.0, 3.0));
        assert!((g.std - 2f64.sqrt()).abs() < 1e-12);
        let g = global_stats(&[7.0]).unwrap();
        assert_eq!((g.min, g.max, g.mean, g.median, g.std), (7.0, 7.0, 7.0, 7.0, 0.0));
        assert_eq!(global_stats(&[3.0, 1.0]).unwrap().median, 2.0);
        assert!(global_stats(&[]).is_err());
    }

    #[test]
    fn percentile_examples() {
        let lin = PercentileMethod::Linear;
        assert_eq!(
            percentiles(&[1.0, 2.0, 3.0, 4.0, 5.0], &[25.0], lin).unwrap(),
            vec![2.0]
        );
        assert_eq!(percentiles(&[1.0, 2.0, 3.0, 4.0], &[50.0], lin).unwrap(), vec![2.5]);
        assert_eq!(percentiles(&[7.0], &PERCENTILES, lin).unwrap(), vec![7.0; 5]);
        assert_eq!(
            percentiles(&[4.0, 1.0, 3.0, 2.0], &[0.0, 100.0], lin).unwrap(),
            vec![1.0, 4.0]
        );
        assert!(percentiles(&[], &[50.0], lin).is_err());
        assert!(percentiles(&[1.0], &[101.0], lin).is_err());
    }

    #[test]
    fn nearest_rank() {
        let nr = PercentileMethod::NearestRank;
        let s = [15.0, 20.0, 35.0, 40.0, 50.0];
        assert_eq!(
            percentiles(&s, &[0.0, 30.0, 40.0, 50.0, 100.0], nr).unwrap(),
            vec![15.0, 20.0, 20.0, 35.0, 50.0]
        );
    }

    #[test]
    fn column_layout() {
        let names = column_names();
        assert_eq!(names.len(), 70);
        assert_eq!(names[0], "distance_min");
        assert_eq!(names[13], "speed_median");
        assert_eq!(names[69], "bearing_rate_rate_p90");
        assert_eq!(column_index("speed", "p75"), Some(18));
        assert_eq!(column_index("speed", "bogus"), None);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(FeatureMatrix::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let header = ID_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(column_names())
            .collect::<Vec<_>>()
            .join(",");
        let ok = FeatureMatrix::read_csv(format!("{header}\n").as_bytes()).unwrap();
        assert!(ok.is_empty());
        let short = format!("{header}\nu,walk,1,2\n");
        assert!(FeatureMatrix::read_csv(short.as_bytes()).is_err());
        let nan = format!("{header}\nu,walk{}\n", ",NaN".repeat(70));
        assert!(FeatureMatrix::read_csv(nan.as_bytes()).is_err());
    }
}
