use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{BlackBox, LinearModel, RbfKernelClassifier};
use crate::error::Result;
use crate::forest::RandomForest;

/// Any of the built-in models, in a form that can be dumped to and loaded
/// from JSON. The format carries no stability guarantee.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinModel {
    Linear(LinearModel),
    Rbf(RbfKernelClassifier),
    Forest(RandomForest),
}

impl BuiltinModel {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }

    fn as_model(&self) -> &dyn BlackBox {
        match self {
            BuiltinModel::Linear(m) => m,
            BuiltinModel::Rbf(m) => m,
            BuiltinModel::Forest(m) => m,
        }
    }
}

impl BlackBox for BuiltinModel {
    fn feature_count(&self) -> usize {
        self.as_model().feature_count()
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.as_model().predict_rows(rows)
    }
}
