use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;

use super::normalize_indices;
use crate::blackbox::BlackBox;
use crate::error::{Result, ShapError};

/// The model, the explained instance and the background means.
///
/// Counts every prediction made through it; the counter is shared by all
/// explanations run against the same context.
pub struct ValueContext<'a> {
    model: &'a dyn BlackBox,
    instance: Vec<f64>,
    background: Vec<f64>,
    calls: AtomicU64,
}

impl<'a> ValueContext<'a> {
    pub fn new(model: &'a dyn BlackBox, instance: Vec<f64>, background: Vec<f64>) -> Result<Self> {
        let m = model.feature_count();
        for v in [&instance, &background] {
            if v.len() != m {
                return Err(ShapError::Dimension {
                    expected: m,
                    actual: v.len(),
                });
            }
        }
        Ok(Self {
            model,
            instance,
            background,
            calls: AtomicU64::new(0),
        })
    }

    /// Same model and background, centred on another point.
    pub fn recentred(&self, instance: Vec<f64>) -> Result<ValueContext<'a>> {
        ValueContext::new(self.model, instance, self.background.clone())
    }

    pub fn model(&self) -> &'a dyn BlackBox {
        self.model
    }

    pub fn instance(&self) -> &[f64] {
        &self.instance
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn feature_count(&self) -> usize {
        self.instance.len()
    }

    /// Total predictions requested through this context so far.
    pub fn model_calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Write the hybrid for the coalition `mask` over `active` into `row`.
    /// Bit `b` of `mask` keeps feature `active[b]` at the instance value.
    pub(crate) fn fill_hybrid(&self, active: &[usize], mask: u64, row: &mut [f64]) {
        row.copy_from_slice(&self.background);
        for (b, &j) in active.iter().enumerate() {
            if mask >> b & 1 == 1 {
                row[j] = self.instance[j];
            }
        }
    }

    /// Predict the hybrids of all `masks` in one batch.
    pub(crate) fn evaluate_masks(&self, active: &[usize], masks: &[u64]) -> Result<Vec<f64>> {
        let m = self.feature_count();
        let mut batch = Array2::zeros((masks.len(), m));
        for (mut row, &mask) in batch.rows_mut().into_iter().zip(masks) {
            self.fill_hybrid(active, mask, row.as_slice_mut().expect("standard layout"));
        }
        self.predict(batch)
    }

    pub(crate) fn predict(&self, batch: Array2<f64>) -> Result<Vec<f64>> {
        self.calls.fetch_add(batch.nrows() as u64, Ordering::SeqCst);
        self.model.predict(batch.view())
    }
}

/// A coalition `subset` inside an active set `active`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionSpec {
    active: Vec<usize>,
    subset: Vec<usize>,
}

impl CoalitionSpec {
    pub fn new(active: &[usize], subset: &[usize], m: usize) -> Result<Self> {
        let active = normalize_indices(active, m)?;
        let subset = normalize_indices(subset, m)?;
        if let Some(s) = subset.iter().find(|s| !active.contains(s)) {
            return Err(ShapError::Config(format!(
                "coalition member {s} is not an active feature"
            )));
        }
        Ok(Self { active, subset })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }
}

/// `v(S)`: one model evaluation of the hybrid for `spec`.
pub fn value_function(ctx: &ValueContext<'_>, spec: &CoalitionSpec) -> Result<f64> {
    let mut row = ctx.background.clone();
    for &j in &spec.subset {
        row[j] = ctx.instance[j];
    }
    let batch = Array2::from_shape_vec((1, row.len()), row).expect("single row");
    Ok(ctx.predict(batch)?[0])
}
