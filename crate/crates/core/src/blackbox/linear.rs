use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::BlackBox;
use crate::error::Result;

/// `f(x) = intercept + sum_i coefficients[i] * x[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(coefficients: Vec<f64>, intercept: f64) -> Self {
        Self {
            coefficients,
            intercept,
        }
    }
}

impl BlackBox for LinearModel {
    fn feature_count(&self) -> usize {
        self.coefficients.len()
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        Ok(rows
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .zip(&self.coefficients)
                    .fold(self.intercept, |acc, (x, a)| acc + a * x)
            })
            .collect())
    }
}
