//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::tree::argmax_first;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub priors: Vec<f64>,
    /// `means[class][column]`
    pub means: Vec<Vec<f64>>,
    /// Smoothed variances, `variances[class][column]`.
    pub variances: Vec<Vec<f64>>,
    /// Additive floor applied to every variance.
    pub epsilon: f64,
}

fn population_variance(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = vals.clone().count() as f64;
    let mean = vals.clone().sum::<f64>() / n;
    vals.map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

impl GaussianNb {
    /// Every class index below `n_classes` must have at least one row.
    pub(crate) fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, var_smoothing: f64) -> Result<GaussianNb, usize> {
        let d = x[0].len();
        let max_var = (0..d)
            .map(|j| population_variance(x.iter().map(move |r| r[j])))
            .fold(0.0, f64::max);
        let mut epsilon = var_smoothing * max_var;
        if epsilon <= 0.0 {
            epsilon = var_smoothing;
        }

        let mut priors = Vec::with_capacity(n_classes);
        let mut means = Vec::with_capacity(n_classes);
        let mut variances = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            if rows.is_empty() {
                return Err(c);
            }
            let k = rows.len() as f64;
            priors.push(k / x.len() as f64);
            let mu: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / k).collect();
            let var: Vec<f64> = (0..d)
                .map(|j| rows.iter().map(|r| (r[j] - mu[j]).powi(2)).sum::<f64>() / k + epsilon)
                .collect();
            means.push(mu);
            variances.push(var);
        }
        Ok(GaussianNb {
            priors,
            means,
            variances,
            epsilon,
        })
    }

    pub fn log_posteriors(&self, row: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&prior, (mu, var))| {
                prior.ln()
                    + row
                        .iter()
                        .zip(mu.iter().zip(var))
                        .map(|(&x, (&m, &v))| -0.5 * (ln_2pi + v.ln()) - (x - m).powi(2) / (2.0 * v))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax_first(&self.log_posteriors(row))
    }

    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        let k = self.priors.len();
        if self.means.len() != k || self.variances.len() != k {
            return Err("class count mismatch between priors, means and variances".into());
        }
        for (mu, var) in self.means.iter().zip(&self.variances) {
            if mu.len() != n_features || var.len() != n_features {
                return Err("per-class statistics do not match feature count".into());
            }
            if var.iter().any(|&v| v.is_nan() || v <= 0.0 || !v.is_finite()) {
                return Err("variances must be positive and finite".into());
            }
        }
        if self.priors.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err("priors must lie in (0, 1]".into());
        }
        Ok(())
    }
}
