use super::{normalize_indices, ShapleyResult, ValueContext};
use crate::error::{Result, ShapError};
use crate::numeric::CompensatedSum;

/// Largest active set `exact_shapley` will enumerate (2^20 predictions).
pub const ENUMERATION_CAP: usize = 20;

/// Rows per model batch while enumerating coalitions.
const CHUNK_ROWS: usize = 1 << 15;

/// `|S|! (|N| - |S| - 1)! / |N|!`, computed as `1 / (|N| * C(|N| - 1, |S|))`.
pub fn shapley_coefficient(s_size: usize, n_size: usize) -> Result<f64> {
    if n_size == 0 || s_size >= n_size {
        return Err(ShapError::Domain(format!(
            "coalition size {s_size} must be below player count {n_size}"
        )));
    }
    let k = s_size.min(n_size - 1 - s_size);
    let mut binom = 1.0f64;
    for i in 1..=k {
        binom = binom * (n_size - 1 - k + i) as f64 / i as f64;
    }
    Ok(1.0 / (n_size as f64 * binom))
}

/// Exact Shapley values of the features in `active` by full enumeration.
///
/// Every hybrid is predicted exactly once (`2^|J|` model calls) and the
/// cached values are reused across features.
pub fn exact_shapley(ctx: &ValueContext<'_>, active: &[usize]) -> Result<ShapleyResult> {
    let j = normalize_indices(active, ctx.feature_count())?;
    let k = j.len();
    if k == 0 {
        return Err(ShapError::Config(
            "exact Shapley needs at least one active feature".into(),
        ));
    }
    if k > ENUMERATION_CAP {
        return Err(ShapError::EnumerationCap {
            requested: k,
            cap: ENUMERATION_CAP,
        });
    }
    let total = 1u64 << k;
    let mut v = Vec::with_capacity(total as usize);
    let mut start = 0u64;
    while start < total {
        let end = (start + CHUNK_ROWS as u64).min(total);
        let masks: Vec<u64> = (start..end).collect();
        v.extend(ctx.evaluate_masks(&j, &masks)?);
        start = end;
    }

    let coef: Vec<f64> = (0..k).map(|s| shapley_coefficient(s, k)).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(k);
    for b in 0..k {
        let bit = 1u64 << b;
        let mut acc = CompensatedSum::new();
        for mask in 0..total {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            acc.add(coef[s] * (v[(mask | bit) as usize] - v[mask as usize]));
        }
        values.push(acc.value());
    }

    Ok(ShapleyResult {
        indices: j,
        values,
        base: v[0],
        prediction: v[(total - 1) as usize],
        model_calls: total,
        std_errors: None,
    })
}
