//! Shapley values over a feature subset with mean-imputation removal.
//!
//! A coalition `S` of the active set `J` is evaluated on the hybrid vector
//! that takes the explained instance's value for features in `S` and the
//! background mean everywhere else (including every feature outside `J`).

mod exact;
mod kernel;
mod permutation;
mod value;

pub use exact::{exact_shapley, shapley_coefficient, ENUMERATION_CAP};
pub use kernel::kernel_shap_baseline;
pub use permutation::permutation_shapley;
pub use value::{value_function, CoalitionSpec, ValueContext};

use serde::Serialize;

use crate::error::{Result, ShapError};

/// Attributions for the active features of one explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyResult {
    /// Active feature indices, ascending.
    pub indices: Vec<usize>,
    /// `values[k]` is the attribution of `indices[k]`.
    pub values: Vec<f64>,
    /// `v(empty)`, the prediction with every feature at its background mean.
    pub base: f64,
    /// `v(J)`, the prediction with the active features at the instance values.
    pub prediction: f64,
    pub model_calls: u64,
    /// Per-feature standard errors, for sampling estimators.
    pub std_errors: Option<Vec<f64>>,
}

impl ShapleyResult {
    pub fn value_of(&self, feature: usize) -> Option<f64> {
        self.indices.iter().position(|&i| i == feature).map(|k| self.values[k])
    }

    /// Full-length vector with zeros for inactive features.
    pub fn dense(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    /// `base + sum(values) - prediction`.
    pub fn efficiency_gap(&self) -> f64 {
        self.base + crate::numeric::compensated_sum(self.values.iter().copied()) - self.prediction
    }

    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        serde_json::to_value(ShapleyJson {
            base: self.base,
            features: feature_entries(&self.indices, &self.values, names),
            model_calls: self.model_calls,
        })
        .expect("plain data serializes")
    }
}

#[derive(Serialize)]
pub(crate) struct FeatureEntry {
    pub index: usize,
    pub name: String,
    pub phi: f64,
}

#[derive(Serialize)]
struct ShapleyJson {
    base: f64,
    features: Vec<FeatureEntry>,
    model_calls: u64,
}

pub(crate) fn feature_entries(indices: &[usize], values: &[f64], names: &[String]) -> Vec<FeatureEntry> {
    indices
        .iter()
        .zip(values)
        .map(|(&index, &phi)| FeatureEntry {
            index,
            name: names.get(index).cloned().unwrap_or_else(|| format!("x{}", index + 1)),
            phi,
        })
        .collect()
}

/// Sorted, deduplicated, range-checked copy of an index set.
pub(crate) fn normalize_indices(indices: &[usize], m: usize) -> Result<Vec<usize>> {
    let mut j = indices.to_vec();
    j.sort_unstable();
    if j.windows(2).any(|w| w[0] == w[1]) {
        return Err(ShapError::Config(format!("duplicate feature index in {indices:?}")));
    }
    if let Some(&bad) = j.iter().find(|&&i| i >= m) {
        return Err(ShapError::Config(format!(
            "feature index {bad} out of range for {m} features"
        )));
    }
    Ok(j)
}
