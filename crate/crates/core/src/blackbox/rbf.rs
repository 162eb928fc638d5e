//! RBF kernel ridge classifier.
//!
//! Fits `(K + lambda I) alpha = y - mean(y)` on 0/1 labels and scores a point
//! as `mean(y) + sum_i alpha_i exp(-gamma |x - s_i|^2)`. The score is a
//! real-valued class-1 estimate; [`OutputMode::Label`] thresholds it at 0.5.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::BlackBox;
use crate::data::Dataset;
use crate::error::{Result, ShapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    #[default]
    Score,
    Label,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RbfKernelClassifier {
    support: Array2<f64>,
    dual: Vec<f64>,
    offset: f64,
    gamma: f64,
    lambda: f64,
    pub output: OutputMode,
}

impl RbfKernelClassifier {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn support_count(&self) -> usize {
        self.support.nrows()
    }

    pub fn with_output(mut self, output: OutputMode) -> Self {
        self.output = output;
        self
    }

    pub fn score(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut s = self.offset;
        for (sv, a) in self.support.rows().into_iter().zip(&self.dual) {
            if *a == 0.0 {
                continue;
            }
            let d2: f64 = sv.iter().zip(x.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
            s += a * (-self.gamma * d2).exp();
        }
        s
    }
}

impl BlackBox for RbfKernelClassifier {
    fn feature_count(&self) -> usize {
        self.support.ncols()
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        Ok(rows
            .rows()
            .into_iter()
            .map(|r| {
                let s = self.score(r);
                match self.output {
                    OutputMode::Score => s,
                    OutputMode::Label => {
                        if s >= 0.5 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect())
    }
}

/// Train on a labelled dataset with labels in {0, 1}.
///
/// If every label is equal the result is the constant predictor of that label.
pub fn train_rbf_classifier(data: &Dataset, gamma: f64, lambda: f64) -> Result<RbfKernelClassifier> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ShapError::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ShapError::Domain(format!(
            "lambda must be positive (the kernel system may be singular at lambda = 0), got {lambda}"
        )));
    }
    let labels = data
        .labels()
        .ok_or_else(|| ShapError::Data("RBF classifier needs a labelled dataset".into()))?;
    let n = data.n_rows();
    if n < 2 {
        return Err(ShapError::Data(format!(
            "RBF classifier needs at least 2 instances, got {n}"
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(ShapError::Data(format!("labels must be 0 or 1, found {bad}")));
    }
    let x = data.features();
    let mean = labels.iter().sum::<f64>() / n as f64;

    if labels.iter().all(|&y| y == labels[0]) {
        return Ok(RbfKernelClassifier {
            support: x.to_owned(),
            dual: vec![0.0; n],
            offset: labels[0],
            gamma,
            lambda,
            output: OutputMode::Score,
        });
    }

    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0 + lambda;
        for j in 0..i {
            let d2: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j).iter())
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            let v = (-gamma * d2).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let rhs = DVector::from_iterator(n, labels.iter().map(|y| y - mean));
    let chol = k
        .cholesky()
        .ok_or_else(|| ShapError::Degenerate("kernel system is not positive definite; increase lambda".into()))?;
    let alpha = chol.solve(&rhs);

    Ok(RbfKernelClassifier {
        support: x.to_owned(),
        dual: alpha.iter().copied().collect(),
        offset: mean,
        gamma,
        lambda,
        output: OutputMode::Score,
    })
}
