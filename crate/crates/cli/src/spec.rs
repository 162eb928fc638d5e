use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use shapkit::{Combiner, ShapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Explainer {
    Exact,
    Kernel,
    Perm,
    ErShap,
    ErwShap,
    ErShapRf,
}

impl Explainer {
    pub fn name(self) -> &'static str {
        match self {
            Explainer::Exact => "exact",
            Explainer::Kernel => "kernel",
            Explainer::Perm => "perm",
            Explainer::ErShap => "er-shap",
            Explainer::ErwShap => "erw-shap",
            Explainer::ErShapRf => "er-shap-rf",
        }
    }

    pub fn is_ensemble(self) -> bool {
        matches!(self, Explainer::ErShap | Explainer::ErwShap | Explainer::ErShapRf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Exact when the feature count is within the enumeration cap, kernel otherwise.
    Auto,
    Exact,
    Kernel,
    Perm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Everything a run needs. Built from flags, optionally layered over a JSON
/// file given with `--spec` (flags win).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunSpec {
    /// JSON run-spec file; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub spec: Option<PathBuf>,

    /// Subcommand the file was written for (checked, file only).
    #[arg(skip)]
    pub command: Option<String>,

    /// `synthetic:<pattern>` or a CSV path.
    #[arg(long, value_name = "SOURCE")]
    pub data: Option<String>,
    /// Label column of a CSV dataset.
    #[arg(long, value_name = "COLUMN")]
    pub label: Option<String>,
    /// Rows generated for a synthetic dataset [default: 400].
    #[arg(long)]
    pub rows: Option<usize>,

    /// `rbf`, `forest`, or a dumped model JSON file [default: rbf].
    #[arg(long, value_name = "MODEL")]
    pub model: Option<String>,
    /// External model command line speaking the NDJSON protocol.
    #[arg(long, value_name = "CMD")]
    pub model_cmd: Option<String>,
    /// Seconds to wait for each external model reply [default: 30].
    #[arg(long, value_name = "SECS")]
    pub model_timeout: Option<f64>,
    /// RBF kernel width [default: 2].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// RBF ridge penalty [default: 0.001].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Trees in the forest black box [default: 10].
    #[arg(long)]
    pub trees: Option<usize>,
    /// Depth limit of the forest black box.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Write the trained model as JSON (loadable with --model or shapkit-serve).
    #[arg(long, value_name = "FILE")]
    pub save_model: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub explainer: Option<Explainer>,
    /// Ensemble size N [default: 50].
    #[arg(long)]
    pub n: Option<usize>,
    /// Features per member t [default: ceil(sqrt(m))].
    #[arg(long)]
    pub t: Option<usize>,
    /// mean, weighted-mean, max or min.
    #[arg(long)]
    pub combiner: Option<Combiner>,
    /// Neighbour std for erw-shap [default: 0.01].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Softmax temperature for er-shap-rf subset probabilities.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Neighbours labelled to train the er-shap-rf forest [default: 200].
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Neighbour std for the er-shap-rf forest [default: 0.1].
    #[arg(long)]
    pub rf_sigma: Option<f64>,
    /// Coalitions for kernel, permutations for perm [default: 2048 / 2000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Keep per-member records in ensemble reports.
    #[arg(long)]
    pub members: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,

    /// `paper-default`, `row:K`, `rows:A..B`, `panel:K` or `v1,v2,...`.
    #[arg(long, value_name = "SELECTOR", allow_hyphen_values = true)]
    pub instance: Option<String>,

    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Reference explainer for compare and sweep.
    #[arg(long, value_enum, help_heading = "Compare and sweep")]
    pub baseline: Option<Baseline>,
    /// Ensemble sizes (rows of the grid).
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    pub n_list: Option<Vec<usize>>,
    /// Subset sizes (columns of the grid).
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    pub t_list: Option<Vec<usize>>,
    /// Explainers to time [default: exact and --explainer].
    #[arg(long, value_delimiter = ',', value_enum, help_heading = "Bench")]
    pub explainers: Option<Vec<Explainer>>,
    /// Timed runs per explainer, at least 5 [default: 5].
    #[arg(long, help_heading = "Bench")]
    pub repeats: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunSpec {
    /// Resolve `--spec` (if any) under the explicit flags.
    pub fn resolve(self, command: &str) -> Result<RunSpec, ShapError> {
        let Some(path) = self.spec.clone() else {
            return Ok(self);
        };
        let mut base = Self::load(&path)?;
        if let Some(c) = &base.command {
            if c != command {
                return Err(ShapError::Config(format!(
                    "run spec {} is for '{c}', not '{command}'",
                    path.display()
                )));
            }
        }
        let top = self;
        overlay!(base, top;
            data, label, rows, model, model_cmd, model_timeout, gamma, lambda, trees, depth,
            save_model, explainer, n, t, combiner, sigma, temperature, neighbors, rf_sigma,
            samples, members, seed, instance, out, format, baseline, n_list, t_list,
            explainers, repeats,
        );
        base.spec = Some(path);
        Ok(base)
    }

    fn load(path: &Path) -> Result<RunSpec, ShapError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ShapError::Config(format!("cannot read run spec {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ShapError::Config(format!("invalid run spec {}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn explainer(&self) -> Explainer {
        self.explainer.unwrap_or(Explainer::ErShap)
    }
}
