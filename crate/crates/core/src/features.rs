//! Feature standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension z-score parameters, fit on training rows only and applied
/// unchanged to held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Fits mean and population standard deviation over the selected rows.
    /// Dimensions with (near-)zero variance keep scale 1 so constant
    /// features pass through centered.
    pub fn fit(features: &[Vec<f64>], rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput(
                "scaler needs at least one training row".into(),
            ));
        }
        let d = features[rows[0]].len();
        let mut mean = vec![0.0; d];
        for &r in rows {
            let row = &features[r];
            if row.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "feature row {r} has length {}, expected {d}",
                    row.len()
                )));
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let inv_n = 1.0 / rows.len() as f64;
        for m in &mut mean {
            *m *= inv_n;
        }
        let mut var = vec![0.0; d];
        for &r in rows {
            for ((s, v), m) in var.iter_mut().zip(&features[r]).zip(&mean) {
                let delta = v - m;
                *s += delta * delta;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s * inv_n).sqrt();
                if sd < 1e-12 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    /// Fits over every row.
    pub fn fit_all(features: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<usize> = (0..features.len()).collect();
        Self::fit(features, &rows)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "row has length {}, scaler was fit on {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform_rows(&self, features: &[Vec<f64>], rows: &[usize]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|&r| self.transform_row(&features[r]))
            .collect()
    }
}
