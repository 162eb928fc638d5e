//! The black-box abstraction: anything that maps a batch of full-length
//! feature vectors to one scalar prediction per row.
//!
//! Batch prediction is the primitive. Explainers assemble every hybrid
//! vector they need up front and hand the model one matrix, which keeps
//! per-call overhead (process transport in particular) off the hot path.

mod builtin;
mod external;
mod linear;
pub mod protocol;
mod rbf;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use crate::error::{Result, ShapError};

pub use builtin::BuiltinModel;
pub use external::ExternalModel;
pub use linear::LinearModel;
pub use rbf::{train_rbf_classifier, OutputMode, RbfKernelClassifier};

/// A deterministic scalar prediction function over `feature_count` inputs.
///
/// Implementations must be callable concurrently from several workers.
pub trait BlackBox: Send + Sync {
    fn feature_count(&self) -> usize;

    /// Predict rows whose width has already been checked.
    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>>;

    /// Validated batch prediction: element `i` is the output for row `i`.
    fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if rows.nrows() == 0 {
            return Ok(Vec::new());
        }
        if rows.ncols() != self.feature_count() {
            return Err(ShapError::Dimension {
                expected: self.feature_count(),
                actual: rows.ncols(),
            });
        }
        let out = self.predict_rows(rows)?;
        debug_assert_eq!(out.len(), rows.nrows());
        Ok(out)
    }

    fn predict_one(&self, x: &[f64]) -> Result<f64> {
        let row = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        Ok(self.predict(row)?[0])
    }
}

/// Free-function form of [`BlackBox::predict`].
pub fn predict_batch(model: &dyn BlackBox, batch: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    model.predict(batch)
}

impl<M: BlackBox + ?Sized> BlackBox for Arc<M> {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }
    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        (**self).predict_rows(rows)
    }
}

impl<M: BlackBox + ?Sized> BlackBox for Box<M> {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }
    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        (**self).predict_rows(rows)
    }
}

impl<M: BlackBox + ?Sized> BlackBox for &M {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }
    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        (**self).predict_rows(rows)
    }
}

/// Wraps a row closure as a model. Mostly useful for analytic test games.
pub struct FnModel<F> {
    feature_count: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(feature_count: usize, f: F) -> Self {
        Self { feature_count, f }
    }
}

impl<F> BlackBox for FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn feature_count(&self) -> usize {
        self.feature_count
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let mut buf = vec![0.0; self.feature_count];
        Ok(rows
            .rows()
            .into_iter()
            .map(|r| {
                for (b, v) in buf.iter_mut().zip(r.iter()) {
                    *b = *v;
                }
                (self.f)(&buf)
            })
            .collect())
    }
}

/// Counts every row that reaches the wrapped model.
pub struct CountingModel<M> {
    inner: M,
    rows: AtomicU64,
    calls: AtomicU64,
}

impl<M: BlackBox> CountingModel<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            rows: AtomicU64::new(0),
            calls: AtomicU64::new(0),
        }
    }

    /// Number of individual predictions made.
    pub fn predictions(&self) -> u64 {
        self.rows.load(Ordering::SeqCst)
    }

    /// Number of batch invocations.
    pub fn batches(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.rows.store(0, Ordering::SeqCst);
        self.calls.store(0, Ordering::SeqCst);
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: BlackBox> BlackBox for CountingModel<M> {
    fn feature_count(&self) -> usize {
        self.inner.feature_count()
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.rows.fetch_add(rows.nrows() as u64, Ordering::SeqCst);
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.predict_rows(rows)
    }
}

/// Row-by-row reference evaluation, used to check batch/loop equivalence.
pub fn predict_each(model: &dyn BlackBox, batch: &Array2<f64>) -> Result<Vec<f64>> {
    batch
        .rows()
        .into_iter()
        .map(|r| model.predict_one(&r.to_vec()))
        .collect()
}
