//! Shapley feature attributions for black-box models: exact enumeration,
//! sampling baselines, and ensembles of small random-subset explanations
//! that trade a little accuracy for an exponential drop in model calls.
//!
//! ```
//! use shapkit::blackbox::LinearModel;
//! use shapkit::ensemble::{er_shap, ExplainerConfig};
//! use shapkit::shapley::{exact_shapley, ValueContext};
//!
//! let model = LinearModel::new(vec![2.0, 3.0, 0.0], 0.0);
//! let ctx = ValueContext::new(&model, vec![1.0; 3], vec![0.0; 3]).unwrap();
//! let exact = exact_shapley(&ctx, &[0, 1, 2]).unwrap();
//! assert_eq!(exact.values, vec![2.0, 3.0, 0.0]);
//!
//! let approx = er_shap(&ctx, &ExplainerConfig::new(100, 2, 7)).unwrap();
//! assert_eq!(approx.model_calls, 100 * 4);
//! ```

pub mod blackbox;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod forest;
pub mod metrics;
pub mod numeric;
pub mod seed;
pub mod shapley;

pub use blackbox::{BlackBox, BuiltinModel, ExternalModel, LinearModel, RbfKernelClassifier};
pub use data::Dataset;
pub use ensemble::{er_shap, er_shap_rf, erw_shap, Combiner, EnsembleReport, ExplainerConfig};
pub use error::{Result, ShapError};
pub use forest::{FeatureDistribution, ForestConfig, RandomForest};
pub use metrics::{concordance_index, normalized_euclidean, ComparisonResult};
pub use shapley::{exact_shapley, ShapleyResult, ValueContext};
