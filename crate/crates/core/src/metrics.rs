//! Agreement between two attribution vectors, and relative cost.

use std::time::Duration;

use serde::Serialize;

use crate::error::{Result, ShapError};

/// Pair counts behind the concordance index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs tied in either vector; each counts as half concordant.
    pub tied: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.concordant + self.discordant + self.tied
    }

    pub fn index(&self) -> f64 {
        (self.concordant as f64 + 0.5 * self.tied as f64) / self.total() as f64
    }
}

fn check_pair(reference: &[f64], candidate: &[f64], min_len: usize) -> Result<()> {
    if reference.len() != candidate.len() {
        return Err(ShapError::Dimension {
            expected: reference.len(),
            actual: candidate.len(),
        });
    }
    if reference.len() < min_len {
        return Err(ShapError::Domain(format!(
            "need at least {min_len} attributions, got {}",
            reference.len()
        )));
    }
    if reference.iter().chain(candidate).any(|v| !v.is_finite()) {
        return Err(ShapError::Domain("attributions must be finite".into()));
    }
    Ok(())
}

pub fn pair_counts(reference: &[f64], candidate: &[f64]) -> Result<PairCounts> {
    check_pair(reference, candidate, 2)?;
    let m = reference.len();
    let mut c = PairCounts::default();
    for i in 0..m {
        for j in i + 1..m {
            let a = reference[i].partial_cmp(&reference[j]).expect("finite");
            let b = candidate[i].partial_cmp(&candidate[j]).expect("finite");
            use std::cmp::Ordering::Equal;
            if a == Equal || b == Equal {
                c.tied += 1;
            } else if a == b {
                c.concordant += 1;
            } else {
                c.discordant += 1;
            }
        }
    }
    Ok(c)
}

/// Fraction of feature pairs ordered the same way by both vectors.
pub fn concordance_index(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    Ok(pair_counts(reference, candidate)?.index())
}

fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        log::warn!("constant attribution vector; mapping it to 0.5");
        return vec![0.5; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Euclidean distance between the min-max rescaled vectors, divided by
/// `sqrt(m)` so that it lies in `[0, 1]`.
pub fn normalized_euclidean(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    check_pair(reference, candidate, 1)?;
    let a = min_max(reference);
    let b = min_max(candidate);
    let d2: f64 = a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum();
    Ok((d2 / a.len() as f64).sqrt())
}

/// Counters carried by any explanation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cost {
    pub model_calls: u64,
    pub wall_time: Duration,
}

/// `(calls_a / calls_b, time_a / time_b)`.
pub fn cost_ratio(a: Cost, b: Cost) -> Result<(f64, f64)> {
    if b.model_calls == 0 || b.wall_time.is_zero() {
        return Err(ShapError::Domain("cost ratio against a zero-cost reference".into()));
    }
    Ok((
        a.model_calls as f64 / b.model_calls as f64,
        a.wall_time.as_secs_f64() / b.wall_time.as_secs_f64(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub concordance: f64,
    pub distance: f64,
    pub counts: PairCounts,
    pub call_ratio: f64,
    pub time_ratio: f64,
}

impl ComparisonResult {
    pub const CSV_HEADER: &'static str = "C,E,concordant,discordant,tied,call_ratio,time_ratio";

    /// Compare `candidate` against `reference`; costs are candidate over reference.
    pub fn new(reference: &[f64], candidate: &[f64], candidate_cost: Cost, reference_cost: Cost) -> Result<Self> {
        let counts = pair_counts(reference, candidate)?;
        let (call_ratio, time_ratio) = cost_ratio(candidate_cost, reference_cost)?;
        Ok(Self {
            concordance: counts.index(),
            distance: normalized_euclidean(reference, candidate)?,
            counts,
            call_ratio,
            time_ratio,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.concordance,
            self.distance,
            self.counts.concordant,
            self.counts.discordant,
            self.counts.tied,
            self.call_ratio,
            self.time_ratio
        )
    }
}
