use ndarray::Array2;
use rand::seq::SliceRandom;

use super::{normalize_indices, ShapleyResult, ValueContext};
use crate::error::{Result, ShapError};
use crate::seed;

/// Permutations per model batch.
const PERMS_PER_BATCH: usize = 256;

/// Monte Carlo over uniformly random feature orderings: the average marginal
/// contribution of each feature when added after its predecessors.
///
/// `v(empty)` and `v(J)` are shared by all orderings, so the cost is
/// `2 + K (|J| - 1)` predictions.
pub fn permutation_shapley(
    ctx: &ValueContext<'_>,
    active: &[usize],
    permutation_count: usize,
    seed: u64,
) -> Result<ShapleyResult> {
    let j = normalize_indices(active, ctx.feature_count())?;
    let k = j.len();
    if k == 0 {
        return Err(ShapError::Config(
            "permutation sampling needs at least one active feature".into(),
        ));
    }
    if permutation_count == 0 {
        return Err(ShapError::Config("permutation_count must be >= 1".into()));
    }
    let m = ctx.feature_count();
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let ends = ctx.evaluate_masks(&j, &[0, full])?;
    let (base, prediction) = (ends[0], ends[1]);
    let mut calls = 2u64;

    let mut sum = vec![0.0; k];
    let mut sumsq = vec![0.0; k];
    let mut rng = seed::rng_for(seed, "permutations", 0);
    let mut order: Vec<usize> = (0..k).collect();
    let mut remaining = permutation_count;
    while remaining > 0 {
        let batch = remaining.min(PERMS_PER_BATCH);
        remaining -= batch;
        let orders: Vec<Vec<usize>> = (0..batch)
            .map(|_| {
                order.shuffle(&mut rng);
                order.clone()
            })
            .collect();
        // Intermediate prefixes 1..k-1 of every ordering.
        let inner = k - 1;
        let preds = if inner > 0 {
            let mut rows = Array2::zeros((batch * inner, m));
            for (p, ord) in orders.iter().enumerate() {
                let mut mask = 0u64;
                for (step, &b) in ord[..inner].iter().enumerate() {
                    mask |= 1 << b;
                    let mut row = rows.row_mut(p * inner + step);
                    ctx.fill_hybrid(&j, mask, row.as_slice_mut().expect("standard layout"));
                }
            }
            calls += rows.nrows() as u64;
            ctx.predict(rows)?
        } else {
            Vec::new()
        };
        for (p, ord) in orders.iter().enumerate() {
            let mut prev = base;
            for (step, &b) in ord.iter().enumerate() {
                let cur = if step + 1 == k {
                    prediction
                } else {
                    preds[p * inner + step]
                };
                let d = cur - prev;
                sum[b] += d;
                sumsq[b] += d * d;
                prev = cur;
            }
        }
    }

    let n = permutation_count as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_errors = sum
        .iter()
        .zip(&sumsq)
        .map(|(s, q)| {
            if permutation_count < 2 {
                return f64::NAN;
            }
            let mean = s / n;
            let var = ((q - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();

    Ok(ShapleyResult {
        indices: j,
        values,
        base,
        prediction,
        model_calls: calls,
        std_errors: Some(std_errors),
    })
}
