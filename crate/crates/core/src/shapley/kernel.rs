//! Kernel SHAP: weighted least squares over coalitions with Shapley-kernel
//! weights, constrained so that `base + sum(phi) = v(J)`.
//!
//! Coalition sizes are processed from the outside in (1 and k-1, then 2 and
//! k-2, ...). A size is enumerated completely while the remaining budget
//! covers it; the rest of the budget is spent on random coalitions of the
//! remaining sizes, each drawn together with its complement.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng as _;

use super::{normalize_indices, ShapleyResult, ValueContext};
use crate::error::{Result, ShapError};
use crate::seed;

const MAX_ACTIVE: usize = 62;
const CHUNK_ROWS: usize = 1 << 15;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// Next integer with the same popcount (Gosper's hack).
fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// Coalition masks and their regression weights.
fn design(k: usize, budget: u64, seed: u64) -> Vec<(u64, f64)> {
    let full = (1u64 << k) - 1;
    let num_sizes = k / 2;
    let mut size_weight: Vec<f64> = (1..=num_sizes)
        .map(|s| {
            let w = (k - 1) as f64 / (s * (k - s)) as f64;
            if s != k - s {
                2.0 * w
            } else {
                w
            }
        })
        .collect();
    let norm: f64 = size_weight.iter().sum();
    size_weight.iter_mut().for_each(|w| *w /= norm);

    let mut out: Vec<(u64, f64)> = Vec::new();
    let mut remaining = budget;
    let mut weight_left = 1.0;
    let mut first_sampled = num_sizes;
    for (i, &sw) in size_weight.iter().enumerate() {
        let s = i + 1;
        let paired = s != k - s;
        let count = binomial(k, s) * if paired { 2.0 } else { 1.0 };
        let share: f64 = size_weight[i..].iter().sum();
        if (remaining as f64) * (sw / share) + 1e-9 < count {
            first_sampled = i;
            break;
        }
        let w = sw / count;
        let mut mask = (1u64 << s) - 1;
        while mask <= full {
            out.push((mask, w));
            if paired {
                out.push((full ^ mask, w));
            }
            mask = next_combination(mask);
        }
        remaining -= count as u64;
        weight_left -= sw;
    }

    if remaining == 0 || first_sampled >= num_sizes {
        return out;
    }

    let tail: Vec<f64> = size_weight[first_sampled..].to_vec();
    let tail_sum: f64 = tail.iter().sum();
    let mut rng = seed::rng_for(seed, "kernel_shap", 0);
    let mut sampled: HashMap<u64, usize> = HashMap::new();
    let mut samples: Vec<(u64, f64)> = Vec::new();
    let mut attempts = 0u64;
    let max_attempts = budget.saturating_mul(100).max(1000);
    while remaining > 0 && attempts < max_attempts {
        attempts += 1;
        let mut u = rng.random::<f64>() * tail_sum;
        let mut pick = tail.len() - 1;
        for (i, w) in tail.iter().enumerate() {
            if u < *w {
                pick = i;
                break;
            }
            u -= w;
        }
        let s = first_sampled + pick + 1;
        let mask = index::sample(&mut rng, k, s)
            .into_iter()
            .fold(0u64, |acc, b| acc | (1u64 << b));
        let mut add = |m: u64, remaining: &mut u64| match sampled.get(&m) {
            Some(&slot) => samples[slot].1 += 1.0,
            None => {
                sampled.insert(m, samples.len());
                samples.push((m, 1.0));
                *remaining -= 1;
            }
        };
        add(mask, &mut remaining);
        if s != k - s && remaining > 0 {
            add(full ^ mask, &mut remaining);
        }
    }
    let total: f64 = samples.iter().map(|s| s.1).sum();
    for (m, w) in samples {
        out.push((m, w * weight_left / total));
    }
    out
}

/// Kernel SHAP estimate over `active` from `sample_count` non-trivial
/// coalitions (capped at all `2^|J| - 2` of them). The empty and full
/// coalitions are always evaluated; model calls are `2 + coalitions`.
pub fn kernel_shap_baseline(
    ctx: &ValueContext<'_>,
    active: &[usize],
    sample_count: usize,
    seed: u64,
) -> Result<ShapleyResult> {
    let j = normalize_indices(active, ctx.feature_count())?;
    let k = j.len();
    if k == 0 {
        return Err(ShapError::Config(
            "kernel SHAP needs at least one active feature".into(),
        ));
    }
    if k > MAX_ACTIVE {
        return Err(ShapError::Config(format!(
            "kernel SHAP supports at most {MAX_ACTIVE} active features, got {k}"
        )));
    }
    if sample_count < k + 2 {
        return Err(ShapError::Config(format!(
            "kernel SHAP needs at least |J| + 2 = {} samples, got {sample_count}",
            k + 2
        )));
    }
    let full = (1u64 << k) - 1;
    let ends = ctx.evaluate_masks(&j, &[0, full])?;
    let (base, prediction) = (ends[0], ends[1]);
    let delta = prediction - base;
    if k == 1 {
        return Ok(ShapleyResult {
            indices: j,
            values: vec![delta],
            base,
            prediction,
            model_calls: 2,
            std_errors: None,
        });
    }

    let budget = (sample_count as u64).min(full - 1);
    let coalitions = design(k, budget, seed);
    let masks: Vec<u64> = coalitions.iter().map(|c| c.0).collect();
    let mut v = Vec::with_capacity(masks.len());
    for chunk in masks.chunks(CHUNK_ROWS) {
        v.extend(ctx.evaluate_masks(&j, chunk)?);
    }

    // Eliminate the last coefficient through the efficiency constraint.
    let p = k - 1;
    let mut normal = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut a = vec![0.0; p];
    for (&(mask, w), &val) in coalitions.iter().zip(&v) {
        let last = (mask >> p & 1) as f64;
        for (b, slot) in a.iter_mut().enumerate() {
            *slot = (mask >> b & 1) as f64 - last;
        }
        let target = (val - base) - last * delta;
        for r in 0..p {
            if a[r] == 0.0 {
                continue;
            }
            rhs[r] += w * a[r] * target;
            for c in 0..p {
                normal[(r, c)] += w * a[r] * a[c];
            }
        }
    }
    let svd = normal.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= smax * 1e-12 {
        return Err(ShapError::Degenerate(format!(
            "kernel SHAP design matrix is singular with {} coalitions; use more samples",
            coalitions.len()
        )));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| ShapError::Degenerate(format!("kernel SHAP solve failed: {e}")))?;
    let mut values: Vec<f64> = sol.iter().copied().collect();
    values.push(delta - values.iter().sum::<f64>());

    Ok(ShapleyResult {
        indices: j,
        values,
        base,
        prediction,
        model_calls: 2 + masks.len() as u64,
        std_errors: None,
    })
}
