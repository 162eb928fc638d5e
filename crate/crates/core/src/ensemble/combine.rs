use serde::Serialize;

use crate::error::{Result, ShapError};
use crate::numeric::CompensatedSum;

use super::Combiner;

/// One small exact explanation inside an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRecord {
    pub index: usize,
    /// Selected features J_k, ascending.
    pub features: Vec<usize>,
    /// `values[q]` is the member's attribution of `features[q]`.
    pub values: Vec<f64>,
    /// Neighbour weight, 1 for unweighted members.
    pub weight: f64,
    /// Point explained by the member when it is not the instance itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbor: Option<Vec<f64>>,
    #[serde(skip)]
    pub base: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub values: Vec<f64>,
    pub unobserved: Vec<bool>,
    pub selection_counts: Vec<usize>,
    pub weight_sums: Vec<f64>,
}

/// Merge member attributions into a length-`m` vector.
///
/// Members are folded in member-index order whatever order they arrive in,
/// so the result does not depend on the input ordering. Features no member
/// selected come back as 0 with `unobserved` set.
pub fn combine(members: &[MemberRecord], rule: Combiner, m: usize) -> Result<Combined> {
    if members.is_empty() {
        return Err(ShapError::Config("cannot combine an empty member list".into()));
    }
    let mut sorted: Vec<&MemberRecord> = members.iter().collect();
    sorted.sort_by_key(|r| r.index);

    let mut counts = vec![0usize; m];
    let mut num = vec![CompensatedSum::new(); m];
    let mut den = vec![CompensatedSum::new(); m];
    let mut extreme: Vec<Option<f64>> = vec![None; m];
    for rec in &sorted {
        let w = match rule {
            Combiner::WeightedMean => rec.weight,
            _ => 1.0,
        };
        for (&i, &phi) in rec.features.iter().zip(&rec.values) {
            if i >= m {
                return Err(ShapError::Config(format!(
                    "member feature {i} out of range for {m} features"
                )));
            }
            counts[i] += 1;
            num[i].add(w * phi);
            den[i].add(w);
            extreme[i] = Some(match (extreme[i], rule) {
                (None, _) => phi,
                (Some(cur), Combiner::Max) => cur.max(phi),
                (Some(cur), Combiner::Min) => cur.min(phi),
                (Some(cur), _) => cur,
            });
        }
    }

    let mut values = vec![0.0; m];
    for i in 0..m {
        if counts[i] == 0 {
            continue;
        }
        values[i] = match rule {
            Combiner::Mean | Combiner::WeightedMean => num[i].value() / den[i].value(),
            Combiner::Max | Combiner::Min => extreme[i].expect("observed"),
        };
    }
    Ok(Combined {
        values,
        unobserved: counts.iter().map(|&c| c == 0).collect(),
        weight_sums: den
            .iter()
            .zip(&counts)
            .map(|(d, &c)| if c == 0 { 0.0 } else { d.value() })
            .collect(),
        selection_counts: counts,
    })
}
