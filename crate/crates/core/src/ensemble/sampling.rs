use rand::seq::index;
use rand::Rng as _;

use crate::forest::FeatureDistribution;
use crate::seed::Rng;

/// `t` distinct indices from `0..m`, uniformly, ascending.
pub fn uniform_subset(rng: &mut Rng, m: usize, t: usize) -> Vec<usize> {
    let mut j = index::sample(rng, m, t).into_vec();
    j.sort_unstable();
    j
}

/// `t` distinct indices drawn one at a time with probability proportional to
/// `p` among the indices not yet drawn. Needs at least `t` positive entries.
pub fn weighted_subset(rng: &mut Rng, p: &FeatureDistribution, t: usize) -> Vec<usize> {
    let mut remaining: Vec<f64> = p.probabilities().to_vec();
    debug_assert!(p.nonzero_count() >= t);
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        let total: f64 = remaining.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if u < acc {
                break;
            }
        }
        let i = pick.expect("a positive weight remains");
        out.push(i);
        remaining[i] = 0.0;
    }
    out.sort_unstable();
    out
}
