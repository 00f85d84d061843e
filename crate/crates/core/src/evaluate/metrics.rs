//! Fold assignment, classification metrics and the paired t-test.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 5% critical value of Student's t with 9 degrees of freedom.
pub const T_CRITICAL_DF9_05: f64 = 2.262;

/// Splits `0..labels.len()` into `k` disjoint folds.
///
/// Stratified folds shuffle each class (in label order) and deal its members
/// round-robin, continuing the deal position across classes, so per-class
/// and total fold sizes each differ by at most one. Every class needs at
/// least `k` members. Without stratification all indices are shuffled and
/// dealt together. Indices inside a fold are sorted.
pub fn kfold<T: Ord + ToString>(labels: &[T], k: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    if stratified {
        let mut by_class: BTreeMap<&T, Vec<usize>> = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            by_class.entry(l).or_default().push(i);
        }
        if let Some((class, idx)) = by_class.iter().find(|(_, v)| v.len() < k) {
            return Err(Error::ClassTooSmall {
                class: class.to_string(),
                count: idx.len(),
                k,
            });
        }
        let mut offset = 0;
        for idx in by_class.values_mut() {
            idx.shuffle(&mut rng);
            for (j, &i) in idx.iter().enumerate() {
                folds[(offset + j) % k].push(i);
            }
            offset = (offset + idx.len()) % k;
        }
    } else {
        if labels.len() < k {
            return Err(Error::Config(format!("{} rows cannot fill {k} folds", labels.len())));
        }
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            folds[j % k].push(i);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn stratified_kfold<T: Ord + ToString>(labels: &[T], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    kfold(labels, k, seed, true)
}

fn check_pair<T>(y_true: &[T], y_pred: &[T]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty("no predictions to score"));
    }
    Ok(())
}

pub fn accuracy<T: PartialEq>(y_true: &[T], y_pred: &[T]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Macro,
    Weighted,
}

/// Per-class F1 for every class present in `y_true`, with its support.
/// F1 is 0 when precision + recall is 0.
pub fn per_class_f1<'a, T: Ord>(y_true: &'a [T], y_pred: &[T]) -> Result<BTreeMap<&'a T, (f64, usize)>> {
    check_pair(y_true, y_pred)?;
    // (tp, support, predicted)
    let mut counts: BTreeMap<&'a T, (usize, usize, usize)> = BTreeMap::new();
    for t in y_true {
        counts.entry(t).or_default().1 += 1;
    }
    for (t, p) in y_true.iter().zip(y_pred) {
        if let Some(c) = counts.get_mut(p) {
            c.2 += 1;
        }
        if t == p {
            counts.get_mut(t).expect("true label counted").0 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(class, (tp, support, predicted))| {
            let precision = if predicted > 0 {
                tp as f64 / predicted as f64
            } else {
                0.0
            };
            let recall = tp as f64 / support as f64;
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            (class, (f1, support))
        })
        .collect())
}

pub fn f1<T: Ord>(y_true: &[T], y_pred: &[T], averaging: Averaging) -> Result<f64> {
    let per_class = per_class_f1(y_true, y_pred)?;
    Ok(match averaging {
        Averaging::Macro => per_class.values().map(|(f, _)| f).sum::<f64>() / per_class.len() as f64,
        Averaging::Weighted => {
            let total: usize = per_class.values().map(|(_, s)| s).sum();
            per_class.values().map(|(f, s)| f * *s as f64).sum::<f64>() / total as f64
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
}

/// Paired t-test on `a - b` using the sample standard deviation.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let k = a.len();
    if k < 2 {
        return Err(Error::Config(format!("paired t-test needs at least 2 pairs, got {k}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&v| v == d[0]) {
        return Err(Error::DegenerateVariance);
    }
    let n = k as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(TTest {
        t: mean / (sd / n.sqrt()),
        df: k - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
        assert_eq!(accuracy(&["a", "a", "b", "b"], &["a", "b", "a", "b"]).unwrap(), 0.5);
        assert_eq!(accuracy(&["a", "a"], &["b", "b"]).unwrap(), 0.0);
        assert!(accuracy::<&str>(&[], &[]).is_err());
        assert!(accuracy(&["a"], &["a", "b"]).is_err());
    }

    #[test]
    fn f1_examples() {
        let t = ["a", "a", "b", "b"];
        assert_eq!(f1(&t, &t, Averaging::Macro).unwrap(), 1.0);
        assert_eq!(f1(&t, &t, Averaging::Weighted).unwrap(), 1.0);
        let p = ["a", "b", "a", "b"];
        let pc = per_class_f1(&t, &p).unwrap();
        assert_eq!(pc[&"a"].0, 0.5);
        assert_eq!(pc[&"b"].0, 0.5);
        assert_eq!(f1(&t, &p, Averaging::Macro).unwrap(), 0.5);
    }

    #[test]
    fn f1_zero_division_and_unseen_predictions() {
        // `c` is never predicted: its F1 is 0. `z` is predicted but absent
        // from y_true, so it is not averaged.
        let t = ["a", "a", "c"];
        let p = ["a", "a", "z"];
        let pc = per_class_f1(&t, &p).unwrap();
        assert_eq!(pc[&"c"].0, 0.0);
        assert!(!pc.contains_key(&"z"));
        assert_eq!(f1(&t, &p, Averaging::Macro).unwrap(), 0.5);
        assert!((f1(&t, &p, Averaging::Weighted).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn t_test_examples() {
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0], &[2.0, 2.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.t, -3.0);
        assert_eq!(r.df, 3);
        assert!(matches!(
            paired_t_test(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::DegenerateVariance)
        ));
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn folds_balanced_two_classes() {
        let labels: Vec<&str> = (0..20).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        let folds = stratified_kfold(&labels, 10, 7).unwrap();
        assert_eq!(folds.len(), 10);
        for f in &folds {
            assert_eq!(f.len(), 2);
            let a = f.iter().filter(|&&i| labels[i] == "a").count();
            assert_eq!(a, 1);
        }
        assert_eq!(folds, stratified_kfold(&labels, 10, 7).unwrap());
    }

    #[test]
    fn folds_errors() {
        let labels = vec!["a"; 20];
        assert!(stratified_kfold(&labels, 1, 0).is_err());
        let mut labels = vec!["a"; 20];
        labels.extend(["rare"; 3]);
        let err = stratified_kfold(&labels, 10, 0).unwrap_err();
        assert!(err.to_string().contains("rare"));
        assert!(kfold(&labels, 10, 0, false).is_ok());
        assert!(kfold(&labels[..5], 10, 0, false).is_err());
    }
}
