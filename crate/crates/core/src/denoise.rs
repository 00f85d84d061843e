//! Sample-level noise removal with a median filter over mean speeds.
//!
//! Each sample's deviation from the median mean speed is divided by the
//! median of those deviations; samples whose ratio exceeds the threshold are
//! flagged. When the median deviation is zero every ratio is taken as zero
//! and nothing is flagged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajfeat::{column_index, median, FeatureMatrix, FeatureVector, SampleRef};

pub const DEFAULT_THRESHOLD: f64 = 3.0;

/// `speed_mean` column of a feature vector.
pub fn speed_mean_of(fv: &FeatureVector) -> f64 {
    let idx = column_index("speed", "mean").expect("speed_mean is a canonical column");
    fv.values[idx]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseMask {
    /// `true` marks a sample to remove.
    pub flags: Vec<bool>,
    pub threshold: f64,
    pub median: f64,
    pub median_difference: f64,
}

impl NoiseMask {
    pub fn removed(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold must be positive, got {threshold}")))
    }
}

pub fn median_mask(speed_means: &[f64], threshold: f64) -> Result<NoiseMask> {
    check_threshold(threshold)?;
    if speed_means.is_empty() {
        return Err(Error::Empty("median mask over no samples"));
    }
    let center = median(speed_means)?;
    let difference: Vec<f64> = speed_means.iter().map(|v| (v - center).abs()).collect();
    let median_difference = median(&difference)?;
    let flags = if median_difference == 0.0 {
        vec![false; speed_means.len()]
    } else {
        difference.iter().map(|d| d / median_difference > threshold).collect()
    };
    Ok(NoiseMask {
        flags,
        threshold,
        median: center,
        median_difference,
    })
}

/// Runs [`median_mask`] separately within each group. The returned mask's
/// `median` and `median_difference` are NaN since they differ per group.
pub fn median_mask_grouped<G: Ord>(speed_means: &[f64], groups: &[G], threshold: f64) -> Result<NoiseMask> {
    if speed_means.len() != groups.len() {
        return Err(Error::LengthMismatch {
            expected: speed_means.len(),
            found: groups.len(),
        });
    }
    check_threshold(threshold)?;
    if speed_means.is_empty() {
        return Err(Error::Empty("median mask over no samples"));
    }
    let mut by_group: BTreeMap<&G, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g).or_default().push(i);
    }
    let mut flags = vec![false; speed_means.len()];
    for idx in by_group.values() {
        let vals: Vec<f64> = idx.iter().map(|&i| speed_means[i]).collect();
        let m = median_mask(&vals, threshold)?;
        for (&i, f) in idx.iter().zip(m.flags) {
            flags[i] = f;
        }
    }
    Ok(NoiseMask {
        flags,
        threshold,
        median: f64::NAN,
        median_difference: f64::NAN,
    })
}

/// Drops the flagged items, preserving the order of survivors.
pub fn apply_mask<T>(items: Vec<T>, mask: &NoiseMask) -> Result<(Vec<T>, usize)> {
    if items.len() != mask.flags.len() {
        return Err(Error::LengthMismatch {
            expected: mask.flags.len(),
            found: items.len(),
        });
    }
    let before = items.len();
    let kept: Vec<T> = items
        .into_iter()
        .zip(&mask.flags)
        .filter_map(|(item, &flag)| (!flag).then_some(item))
        .collect();
    let removed = before - kept.len();
    Ok((kept, removed))
}

/// Audit record for a denoising pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub removed: Vec<SampleRef>,
    pub threshold: f64,
    /// `None` for per-mode masking.
    pub median: Option<f64>,
    pub median_difference: Option<f64>,
    pub rows_before: usize,
    pub rows_after: usize,
}

/// Masks a feature matrix on its `speed_mean` column, pooled or per label.
pub fn denoise_matrix(matrix: FeatureMatrix, threshold: f64, per_mode: bool) -> Result<(FeatureMatrix, DenoiseReport)> {
    let means: Vec<f64> = matrix.rows.iter().map(speed_mean_of).collect();
    let mask = if per_mode {
        let labels: Vec<&str> = matrix.rows.iter().map(|r| r.label.as_str()).collect();
        median_mask_grouped(&means, &labels, threshold)?
    } else {
        median_mask(&means, threshold)?
    };
    let removed_refs = matrix
        .rows
        .iter()
        .zip(&mask.flags)
        .filter(|(_, &f)| f)
        .map(|(r, _)| r.sample_ref.clone())
        .collect();
    let rows_before = matrix.len();
    let (rows, _) = apply_mask(matrix.rows, &mask)?;
    let finite = |v: f64| v.is_finite().then_some(v);
    let report = DenoiseReport {
        removed: removed_refs,
        threshold,
        median: finite(mask.median),
        median_difference: finite(mask.median_difference),
        rows_before,
        rows_after: rows.len(),
    };
    Ok((FeatureMatrix::new(rows)?, report))
}
