use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapError};
use crate::forest::ForestConfig;
use crate::numeric::ceil_sqrt;

/// How member attributions are merged into one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    /// Average over the members that selected the feature.
    Mean,
    /// Average weighted by each member's neighbour weight.
    WeightedMean,
    /// Largest member value (optimistic).
    Max,
    /// Smallest member value (pessimistic).
    Min,
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combiner::Mean => "mean",
            Combiner::WeightedMean => "weighted-mean",
            Combiner::Max => "max",
            Combiner::Min => "min",
        })
    }
}

impl FromStr for Combiner {
    type Err = ShapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Combiner::Mean),
            "weighted-mean" | "weighted" => Ok(Combiner::WeightedMean),
            "max" => Ok(Combiner::Max),
            "min" => Ok(Combiner::Min),
            other => Err(ShapError::Config(format!(
                "unknown combiner '{other}' (expected mean, weighted-mean, max or min)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    /// Ensemble size N.
    pub members: usize,
    /// Features per member t; `None` means `ceil(sqrt(m))`.
    pub subset_size: Option<usize>,
    /// `None` picks the explainer's own rule (weighted mean for the
    /// neighbour-weighted ensemble, mean otherwise).
    pub combiner: Option<Combiner>,
    /// Std of the Gaussian neighbours explained by the weighted ensemble.
    pub neighbor_sigma: f64,
    /// Softmax temperature applied to the forest importance distribution.
    pub temperature: Option<f64>,
    /// Neighbours M labelled by the model to train the importance forest.
    pub rf_neighbors: usize,
    /// Std of the neighbours used to train the importance forest.
    pub rf_sigma: f64,
    pub forest: ForestConfig,
    /// Keep per-member records in the report.
    pub retain_members: bool,
    pub seed: u64,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        Self {
            members: 50,
            subset_size: None,
            combiner: None,
            neighbor_sigma: 0.01,
            temperature: None,
            rf_neighbors: 200,
            rf_sigma: 0.1,
            forest: ForestConfig::default(),
            retain_members: false,
            seed: 0,
        }
    }
}

impl ExplainerConfig {
    pub fn new(members: usize, subset_size: usize, seed: u64) -> Self {
        Self {
            members,
            subset_size: Some(subset_size),
            seed,
            ..Default::default()
        }
    }

    /// Resolved t for `m` features.
    pub fn t(&self, m: usize) -> usize {
        self.subset_size.unwrap_or_else(|| ceil_sqrt(m))
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let t = self.t(m);
        if t == 0 || t > m {
            return Err(ShapError::Config(format!(
                "subset size t = {t} must lie in 1..={m} for {m} features"
            )));
        }
        if t > crate::shapley::ENUMERATION_CAP {
            return Err(ShapError::EnumerationCap {
                requested: t,
                cap: crate::shapley::ENUMERATION_CAP,
            });
        }
        if self.members == 0 {
            return Err(ShapError::Config("ensemble size N must be >= 1".into()));
        }
        for (name, v) in [
            ("neighbor sigma", self.neighbor_sigma),
            ("forest neighbour sigma", self.rf_sigma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ShapError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0) || !t.is_finite() {
                return Err(ShapError::Config(format!("temperature must be > 0, got {t}")));
            }
        }
        if self.rf_neighbors == 0 {
            return Err(ShapError::Config("forest neighbour count M must be >= 1".into()));
        }
        Ok(())
    }
}
