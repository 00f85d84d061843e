//! Min-max scaling of feature columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajfeat::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub fitted_on: usize,
}

impl MinMaxParams {
    /// Column-wise extrema of `rows`.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("min-max fit on no rows"))?;
        let width = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for row in &rows[1..] {
            if row.len() != width {
                return Err(Error::Layout {
                    expected: width,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMaxParams {
            min,
            max,
            fitted_on: rows.len(),
        })
    }

    pub fn n_columns(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`; constant columns map to 0. Values outside
    /// the fitted range are not clamped.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_columns() {
            return Err(Error::Layout {
                expected: self.n_columns(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

pub fn fit_minmax(train: &FeatureMatrix) -> Result<MinMaxParams> {
    MinMaxParams::fit(&train.values())
}

pub fn transform(params: &MinMaxParams, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if m.n_columns() != params.n_columns() {
        return Err(Error::Layout {
            expected: params.n_columns(),
            found: m.n_columns(),
        });
    }
    let mut out = m.clone();
    for row in &mut out.rows {
        row.values = params.transform_row(&row.values)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(vals: &[f64]) -> Vec<Vec<f64>> {
        vals.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn fit_examples() {
        let p = MinMaxParams::fit(&col(&[0.0, 5.0, 10.0])).unwrap();
        assert_eq!((p.min[0], p.max[0], p.fitted_on), (0.0, 10.0, 3));
        let p = MinMaxParams::fit(&col(&[4.0, 4.0, 4.0])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (4.0, 4.0));
        let p = MinMaxParams::fit(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(p.min, p.max);
        assert!(MinMaxParams::fit(&[]).is_err());
        assert!(MinMaxParams::fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn transform_examples() {
        let p = MinMaxParams::fit(&col(&[0.0, 10.0])).unwrap();
        assert_eq!(p.transform_row(&[5.0]).unwrap(), vec![0.5]);
        assert_eq!(p.transform_row(&[12.0]).unwrap(), vec![1.2]);
        let c = MinMaxParams::fit(&col(&[4.0, 4.0])).unwrap();
        assert_eq!(c.transform_row(&[123.0]).unwrap(), vec![0.0]);
        assert!(p.transform_row(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn params_json_roundtrip() {
        let p = MinMaxParams::fit(&[vec![0.0, -1.5], vec![2.0, 3.25]]).unwrap();
        let back: MinMaxParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
