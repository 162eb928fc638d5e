//! CART regression/classification tree over numeric features.
//!
//! Leaves predict the mean label of their samples, so for 0/1 labels a
//! classification tree predicts the class-1 fraction. The split criterion is
//! Gini impurity for classification and variance for regression.

use ndarray::ArrayView2;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    /// Class labels if every target is an integer with few distinct values,
    /// otherwise a continuous target.
    pub fn infer(targets: &[f64]) -> Task {
        let mut distinct: Vec<f64> = Vec::new();
        for &y in targets {
            if y.fract() != 0.0 || !y.is_finite() {
                return Task::Regression;
            }
            if !distinct.contains(&y) {
                distinct.push(y);
                if distinct.len() > 32 {
                    return Task::Regression;
                }
            }
        }
        Task::Classification
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub split: Option<Split>,
    pub value: f64,
    pub impurity: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub max_depth: Option<usize>,
}

pub(crate) struct TreeParams {
    pub task: Task,
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
}

/// Label-side statistics, shared by both criteria.
struct Targets<'a> {
    y: &'a [f64],
    /// Class index per sample (classification only).
    class: Vec<usize>,
    n_classes: usize,
    task: Task,
}

impl<'a> Targets<'a> {
    fn new(y: &'a [f64], task: Task) -> Self {
        let mut classes: Vec<f64> = Vec::new();
        let mut class = Vec::new();
        if task == Task::Classification {
            for &v in y {
                if !classes.contains(&v) {
                    classes.push(v);
                }
            }
            classes.sort_by(f64::total_cmp);
            class = y
                .iter()
                .map(|v| classes.iter().position(|c| c == v).expect("collected above"))
                .collect();
        }
        Self {
            y,
            class,
            n_classes: classes.len(),
            task,
        }
    }

    fn impurity(&self, idx: &[usize]) -> f64 {
        let n = idx.len() as f64;
        match self.task {
            Task::Regression => {
                let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / n;
                idx.iter().map(|&i| (self.y[i] - mean).powi(2)).sum::<f64>() / n
            }
            Task::Classification => {
                let mut counts = vec![0usize; self.n_classes];
                for &i in idx {
                    counts[self.class[i]] += 1;
                }
                gini(&counts, idx.len())
            }
        }
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn variance(sum: f64, sumsq: f64, n: f64) -> f64 {
    (sumsq / n - (sum / n).powi(2)).max(0.0)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl DecisionTree {
    pub(crate) fn fit(
        x: ArrayView2<'_, f64>,
        y: &[f64],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut Rng,
    ) -> Self {
        let targets = Targets::new(y, params.task);
        let m = x.ncols();
        let k = params.features_per_split.clamp(1, m);
        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, sample indices, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();

        let root_imp = targets.impurity(&samples);
        nodes.push(Node {
            split: None,
            value: mean(y, &samples),
            impurity: root_imp,
            samples: samples.len(),
        });
        stack.push((0, samples, 0));

        while let Some((slot, idx, depth)) = stack.pop() {
            let imp = nodes[slot].impurity;
            let depth_ok = params.max_depth.is_none_or(|d| depth < d);
            if !depth_ok || idx.len() < 2 || imp <= 0.0 {
                continue;
            }
            let mut candidates = index::sample(rng, m, k).into_vec();
            candidates.sort_unstable();
            let Some(best) = best_split(x, &targets, &idx, imp, &candidates) else {
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| x[[i, best.feature]] <= best.threshold);
            debug_assert!(!left.is_empty() && !right.is_empty());
            let li = nodes.len();
            let ri = li + 1;
            for side in [&left, &right] {
                nodes.push(Node {
                    split: None,
                    value: mean(y, side),
                    impurity: targets.impurity(side),
                    samples: side.len(),
                });
            }
            nodes[slot].split = Some(Split {
                feature: best.feature,
                threshold: best.threshold,
                left: li,
                right: ri,
            });
            stack.push((ri, right, depth + 1));
            stack.push((li, left, depth + 1));
        }

        DecisionTree {
            nodes,
            max_depth: params.max_depth,
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            node = if x[s.feature] <= s.threshold {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node.value
    }

    pub fn is_leaf(&self) -> bool {
        self.nodes[0].split.is_none()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i].split {
                None => 0,
                Some(s) => 1 + go(t, s.left).max(go(t, s.right)),
            }
        }
        go(self, 0)
    }

    /// Sample-weighted impurity decrease accumulated per feature.
    pub fn impurity_decrease(&self, feature_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; feature_count];
        let root = self.nodes[0].samples as f64;
        for node in &self.nodes {
            if let Some(s) = &node.split {
                let n = node.samples as f64;
                let l = &self.nodes[s.left];
                let r = &self.nodes[s.right];
                let child = (l.samples as f64 * l.impurity + r.samples as f64 * r.impurity) / n;
                out[s.feature] += (n / root) * (node.impurity - child);
            }
        }
        out
    }
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

/// Exhaustive threshold search. Candidates are visited by ascending feature
/// index and ascending threshold, and only a strictly larger gain replaces
/// the incumbent.
fn best_split(
    x: ArrayView2<'_, f64>,
    targets: &Targets<'_>,
    idx: &[usize],
    parent_imp: f64,
    candidates: &[usize],
) -> Option<BestSplit> {
    let n = idx.len();
    let nf = n as f64;
    let min_gain = parent_imp * 1e-12;
    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = idx.to_vec();

    for &f in candidates {
        order.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]));
        if x[[order[0], f]] == x[[order[n - 1], f]] {
            continue;
        }
        match targets.task {
            Task::Regression => {
                let (tot, totsq) = order.iter().fold((0.0, 0.0), |(s, q), &i| {
                    (s + targets.y[i], q + targets.y[i] * targets.y[i])
                });
                let (mut ls, mut lq) = (0.0, 0.0);
                for p in 0..n - 1 {
                    let yi = targets.y[order[p]];
                    ls += yi;
                    lq += yi * yi;
                    let (a, b) = (x[[order[p], f]], x[[order[p + 1], f]]);
                    if a == b {
                        continue;
                    }
                    let nl = (p + 1) as f64;
                    let nr = nf - nl;
                    let child = (nl * variance(ls, lq, nl) + nr * variance(tot - ls, totsq - lq, nr)) / nf;
                    consider(&mut best, f, a, b, parent_imp - child, min_gain);
                }
            }
            Task::Classification => {
                let mut right = vec![0usize; targets.n_classes];
                for &i in &order {
                    right[targets.class[i]] += 1;
                }
                let mut left = vec![0usize; targets.n_classes];
                for p in 0..n - 1 {
                    let c = targets.class[order[p]];
                    left[c] += 1;
                    right[c] -= 1;
                    let (a, b) = (x[[order[p], f]], x[[order[p + 1], f]]);
                    if a == b {
                        continue;
                    }
                    let nl = p + 1;
                    let nr = n - nl;
                    let child = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / nf;
                    consider(&mut best, f, a, b, parent_imp - child, min_gain);
                }
            }
        }
    }
    best
}

fn consider(best: &mut Option<BestSplit>, feature: usize, a: f64, b: f64, gain: f64, min_gain: f64) {
    if !(gain > min_gain) {
        return;
    }
    if best.as_ref().is_some_and(|cur| gain <= cur.gain) {
        return;
    }
    let mid = a + (b - a) / 2.0;
    // Keep the midpoint strictly below the upper value so the partition is proper.
    let threshold = if mid < b { mid } else { a };
    *best = Some(BestSplit {
        feature,
        threshold,
        gain,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    fn params(task: Task, depth: Option<usize>) -> TreeParams {
        TreeParams {
            task,
            max_depth: depth,
            features_per_split: 2,
        }
    }

    #[test]
    fn stump_on_step_function() {
        let x = array![[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let y = [0.0, 0.0, 1.0, 1.0];
        let mut rng = Rng::seed_from_u64(0);
        let t = DecisionTree::fit(
            x.view(),
            &y,
            (0..4).collect(),
            &params(Task::Classification, None),
            &mut rng,
        );
        assert_eq!(t.nodes.len(), 3);
        let s = t.nodes[0].split.as_ref().unwrap();
        assert_eq!((s.feature, s.threshold), (0, 1.5));
        assert_eq!(t.predict_row(&[0.2, 0.0]), 0.0);
        assert_eq!(t.predict_row(&[2.7, 0.0]), 1.0);
        let imp = t.impurity_decrease(2);
        assert_eq!(imp, vec![0.5, 0.0]);
    }

    #[test]
    fn equal_gain_prefers_lowest_feature() {
        // Both columns separate the labels identically.
        let x = array![[0.0, 0.0], [1.0, 1.0]];
        let y = [0.0, 1.0];
        let mut rng = Rng::seed_from_u64(0);
        let t = DecisionTree::fit(x.view(), &y, vec![0, 1], &params(Task::Regression, None), &mut rng);
        assert_eq!(t.nodes[0].split.as_ref().unwrap().feature, 0);
    }

    #[test]
    fn impurity_never_increases_along_paths() {
        let x = array![[0.1, 0.9], [0.4, 0.2], [0.35, 0.8], [0.8, 0.1], [0.6, 0.7], [0.2, 0.3]];
        let y = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let mut rng = Rng::seed_from_u64(3);
        let t = DecisionTree::fit(
            x.view(),
            &y,
            (0..6).collect(),
            &params(Task::Classification, None),
            &mut rng,
        );
        for node in &t.nodes {
            if let Some(s) = &node.split {
                let l = &t.nodes[s.left];
                let r = &t.nodes[s.right];
                let weighted = (l.samples as f64 * l.impurity + r.samples as f64 * r.impurity) / node.samples as f64;
                assert!(weighted < node.impurity);
            }
        }
    }

    #[test]
    fn task_inference() {
        assert_eq!(Task::infer(&[0.0, 1.0, 1.0]), Task::Classification);
        assert_eq!(Task::infer(&[0.0, 0.5]), Task::Regression);
    }
}
