//! Datasets: synthetic generators, CSV ingestion, background statistics and
//! Gaussian neighbourhoods.

mod csv_io;
mod synthetic;

use std::collections::HashSet;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, ShapError};
use crate::seed;

pub use csv_io::{load_csv, save_csv};
pub use synthetic::{generate_synthetic, SyntheticPattern, DEFAULT_INSTANCE_VALUE, SYNTHETIC_FEATURES};

/// A numeric feature matrix with column names and optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    names: Vec<String>,
    labels: Option<Vec<f64>>,
    pub provenance: String,
}

impl Dataset {
    /// Names default to `x1..xm` when not given.
    pub fn new(features: Array2<f64>, names: Option<Vec<String>>, labels: Option<Vec<f64>>) -> Result<Self> {
        let (n, m) = features.dim();
        if n == 0 {
            return Err(ShapError::Data("dataset has no rows".into()));
        }
        if m == 0 {
            return Err(ShapError::Data("dataset has no feature columns".into()));
        }
        let names = names.unwrap_or_else(|| (1..=m).map(|i| format!("x{i}")).collect());
        if names.len() != m {
            return Err(ShapError::Data(format!("{} names given for {m} features", names.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(ShapError::Data(format!("duplicate feature name '{dup}'")));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(ShapError::Data(format!("{} labels for {n} rows", l.len())));
            }
        }
        Ok(Self {
            features,
            names,
            labels,
            provenance: String::new(),
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> Option<Vec<f64>> {
        (i < self.n_rows()).then(|| self.features.row(i).to_vec())
    }

    /// Replace the labels, e.g. with black-box outputs.
    pub fn relabel(&self, labels: Vec<f64>) -> Result<Self> {
        Dataset::new(self.features.clone(), Some(self.names.clone()), Some(labels))
            .map(|d| d.with_provenance(self.provenance.clone()))
    }

    /// Seeded shuffle-split into `(train, test)`; `test_fraction` in `[0, 1)`.
    pub fn shuffle_split(&self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(ShapError::Config(format!(
                "test fraction {test_fraction} not in [0, 1)"
            )));
        }
        let n = self.n_rows();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut seed::rng_for(seed, "shuffle_split", 0));
        let n_test = ((n as f64) * test_fraction).round() as usize;
        if n_test == 0 || n_test == n {
            return Err(ShapError::Config(format!("split of {n} rows leaves an empty side")));
        }
        let pick = |ix: &[usize]| -> Result<Dataset> {
            let f = self.features.select(Axis(0), ix);
            let l = self.labels.as_ref().map(|l| ix.iter().map(|&i| l[i]).collect());
            Dataset::new(f, Some(self.names.clone()), l).map(|d| d.with_provenance(self.provenance.clone()))
        };
        Ok((pick(&idx[n_test..])?, pick(&idx[..n_test])?))
    }
}

/// Per-feature arithmetic means.
pub fn background_means(data: &Dataset) -> Vec<f64> {
    data.features
        .mean_axis(Axis(0))
        .expect("datasets are never empty")
        .to_vec()
}

/// `count` points `x + eps`, `eps ~ N(0, sigma^2)` independently per feature.
pub fn generate_neighbors(x: &[f64], count: usize, sigma: f64, seed: u64) -> Result<Array2<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(ShapError::Config(format!("neighbour sigma must be >= 0, got {sigma}")));
    }
    if count == 0 {
        return Err(ShapError::Config("neighbour count must be >= 1".into()));
    }
    let m = x.len();
    let mut out = Array2::zeros((count, m));
    if sigma == 0.0 {
        for mut r in out.rows_mut() {
            r.iter_mut().zip(x).for_each(|(o, v)| *o = *v);
        }
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut rng = seed::rng_for(seed, "neighbors", 0);
    for mut r in out.rows_mut() {
        for (o, v) in r.iter_mut().zip(x) {
            *o = v + normal.sample(&mut rng);
        }
    }
    Ok(out)
}
