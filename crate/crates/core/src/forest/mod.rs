//! Random forest (bagged CART trees) and the feature distributions derived
//! from it.

mod tree;

use ndarray::ArrayView2;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::BlackBox;
use crate::data::Dataset;
use crate::error::{Result, ShapError};
use crate::numeric::{ceil_sqrt, compensated_sum};
use crate::seed;

use tree::TreeParams;
pub use tree::{DecisionTree, Node, Split, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// `None` grows trees until leaves are pure or hold one sample.
    pub max_depth: Option<usize>,
    /// Candidate features per node; `None` means `ceil(sqrt(m))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    /// `None` infers the task from the targets.
    pub task: Option<Task>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            tree_count: 10,
            max_depth: None,
            features_per_split: None,
            bootstrap: true,
            task: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub task: Task,
    pub feature_count: usize,
    pub config: ForestConfig,
}

/// Fit on a labelled dataset.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<RandomForest> {
    let y = data
        .labels()
        .ok_or_else(|| ShapError::Data("forest training needs a labelled dataset".into()))?;
    fit_forest_xy(data.features(), y, config)
}

pub fn fit_forest_xy(x: ArrayView2<'_, f64>, y: &[f64], config: &ForestConfig) -> Result<RandomForest> {
    let (n, m) = x.dim();
    if n == 0 {
        return Err(ShapError::Data("cannot fit a forest on empty data".into()));
    }
    if y.len() != n {
        return Err(ShapError::Data(format!("{} targets for {n} rows", y.len())));
    }
    if config.tree_count == 0 {
        return Err(ShapError::Config("tree_count must be >= 1".into()));
    }
    if let Some(0) = config.max_depth {
        return Err(ShapError::Config("max_depth must be >= 1".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ShapError::Data("targets must be finite".into()));
    }
    let task = config.task.unwrap_or_else(|| Task::infer(y));
    let params = TreeParams {
        task,
        max_depth: config.max_depth,
        features_per_split: config.features_per_split.unwrap_or_else(|| ceil_sqrt(m)),
    };
    let trees = (0..config.tree_count)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::rng_for(config.seed, "tree", k as u64);
            let samples: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::fit(x, y, samples, &params, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        trees,
        task,
        feature_count: m,
        config: config.clone(),
    })
}

impl RandomForest {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }
}

impl BlackBox for RandomForest {
    fn feature_count(&self) -> usize {
        self.feature_count
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let mut buf = vec![0.0; self.feature_count];
        Ok(rows
            .rows()
            .into_iter()
            .map(|r| {
                buf.iter_mut().zip(r.iter()).for_each(|(b, v)| *b = *v);
                self.predict_row(&buf)
            })
            .collect())
    }
}

/// A probability vector over feature indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDistribution(Vec<f64>);

impl FeatureDistribution {
    /// Normalize non-negative weights. All-zero weights give the uniform
    /// distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(ShapError::Domain("distribution over zero features".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(ShapError::Domain(format!("invalid weight {bad}")));
        }
        let total = compensated_sum(weights.iter().copied());
        if total == 0.0 {
            return Ok(Self::uniform(weights.len()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First index of the largest probability.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.0.iter().enumerate() {
            if *p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|p| **p > 0.0).count()
    }
}

/// Mean-over-trees impurity decrease per feature, normalized to sum to one.
pub fn impurity_importance(forest: &RandomForest) -> FeatureDistribution {
    let m = forest.feature_count;
    let mut raw = vec![0.0; m];
    for t in &forest.trees {
        for (r, d) in raw.iter_mut().zip(t.impurity_decrease(m)) {
            *r += d;
        }
    }
    let k = forest.trees.len() as f64;
    let raw = raw.into_iter().map(|r| (r / k).max(0.0)).collect();
    FeatureDistribution::from_weights(raw).expect("importances are finite and non-negative")
}

/// Softmax of `p / temperature`. Preserves the argmax for every `T > 0`.
pub fn temperature_scale(p: &FeatureDistribution, temperature: f64) -> Result<FeatureDistribution> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(ShapError::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let max = p.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = p.0.iter().map(|v| ((v - max) / temperature).exp()).collect();
    let total = compensated_sum(e.iter().copied());
    Ok(FeatureDistribution(e.into_iter().map(|v| v / total).collect()))
}
