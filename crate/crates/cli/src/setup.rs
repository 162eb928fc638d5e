use std::time::Duration;

use anyhow::{bail, Context};
use shapkit::blackbox::{train_rbf_classifier, BlackBox, BuiltinModel, ExternalModel};
use shapkit::data::{
    background_means, generate_synthetic, load_csv, Dataset, SyntheticPattern, DEFAULT_INSTANCE_VALUE,
};
use shapkit::forest::{fit_forest, ForestConfig};
use shapkit::seed::derive_seed;
use shapkit::{ExplainerConfig, ShapError};

use crate::spec::RunSpec;

pub const DEFAULT_ROWS: usize = 400;
pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_LAMBDA: f64 = 1e-3;
pub const DEFAULT_PANEL: usize = 20;

pub enum Source {
    Synthetic(SyntheticPattern),
    Csv,
}

pub struct Problem {
    pub data: Dataset,
    pub source: Source,
    pub model: Box<dyn BlackBox>,
    pub background: Vec<f64>,
}

impl Problem {
    pub fn build(spec: &RunSpec) -> anyhow::Result<Problem> {
        let (data, source) = load_data(spec)?;
        let model = build_model(spec, &data)?;
        if model.feature_count() != data.n_features() {
            return Err(ShapError::Dimension {
                expected: data.n_features(),
                actual: model.feature_count(),
            })
            .context("model width does not match the dataset");
        }
        let background = background_means(&data);
        Ok(Problem {
            data,
            source,
            model,
            background,
        })
    }

    pub fn m(&self) -> usize {
        self.data.n_features()
    }

    /// Instances named by the selector, or the subcommand's default.
    pub fn instances(&self, spec: &RunSpec, default: &str) -> anyhow::Result<Vec<Vec<f64>>> {
        let selector = spec.instance.as_deref().unwrap_or(default);
        let m = self.m();
        let row = |i: usize| {
            self.data
                .row(i)
                .ok_or_else(|| ShapError::Config(format!("row {i} out of range for {} rows", self.data.n_rows())))
        };
        let parse = |s: &str| -> Result<usize, ShapError> {
            s.trim()
                .parse()
                .map_err(|_| ShapError::Config(format!("bad instance selector '{selector}'")))
        };
        let picked = if selector == "paper-default" {
            vec![vec![DEFAULT_INSTANCE_VALUE; m]]
        } else if let Some(k) = selector.strip_prefix("row:") {
            vec![row(parse(k)?)?]
        } else if let Some(range) = selector.strip_prefix("rows:") {
            let (a, b) = range
                .split_once("..")
                .ok_or_else(|| ShapError::Config(format!("bad instance selector '{selector}'")))?;
            (parse(a)?..parse(b)?).map(row).collect::<Result<_, _>>()?
        } else if let Some(k) = selector.strip_prefix("panel:") {
            self.panel(parse(k)?, spec.seed())?
        } else {
            let v = selector
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| ShapError::Config(format!("bad instance selector '{selector}'")))?;
            if v.len() != m {
                return Err(ShapError::Dimension {
                    expected: m,
                    actual: v.len(),
                }
                .into());
            }
            vec![v]
        };
        if picked.is_empty() {
            bail!(ShapError::Config(format!(
                "instance selector '{selector}' selects nothing"
            )));
        }
        Ok(picked)
    }

    /// Fresh points from the generator for synthetic data, the first `k`
    /// rows for a CSV file.
    fn panel(&self, k: usize, seed: u64) -> Result<Vec<Vec<f64>>, ShapError> {
        match &self.source {
            Source::Synthetic(p) => {
                let panel = generate_synthetic(p, k, derive_seed(seed, "panel", 0))?;
                Ok((0..k).filter_map(|i| panel.row(i)).collect())
            }
            Source::Csv => {
                if k > self.data.n_rows() {
                    return Err(ShapError::Config(format!(
                        "panel of {k} rows from a dataset with {}",
                        self.data.n_rows()
                    )));
                }
                Ok((0..k).filter_map(|i| self.data.row(i)).collect())
            }
        }
    }
}

fn load_data(spec: &RunSpec) -> anyhow::Result<(Dataset, Source)> {
    let Some(source) = spec.data.as_deref() else {
        bail!(ShapError::Config(
            "--data is required (synthetic:<pattern> or a CSV path)".into()
        ));
    };
    if let Some(name) = source.strip_prefix("synthetic:") {
        let pattern: SyntheticPattern = name.parse()?;
        let rows = spec.rows.unwrap_or(DEFAULT_ROWS);
        let data = generate_synthetic(&pattern, rows, derive_seed(spec.seed(), "data", 0))?;
        log::info!("generated {rows} rows of the {pattern} pattern");
        return Ok((data, Source::Synthetic(pattern)));
    }
    let data = load_csv(source, spec.label.as_deref())?;
    log::info!(
        "loaded {} rows x {} features from {source}",
        data.n_rows(),
        data.n_features()
    );
    Ok((data, Source::Csv))
}

fn build_model(spec: &RunSpec, data: &Dataset) -> anyhow::Result<Box<dyn BlackBox>> {
    if let Some(cmd) = &spec.model_cmd {
        if spec.model.is_some() {
            bail!(ShapError::Config("give either --model or --model-cmd, not both".into()));
        }
        let words = shlex::split(cmd)
            .filter(|w| !w.is_empty())
            .ok_or_else(|| ShapError::Config(format!("cannot parse --model-cmd '{cmd}'")))?;
        let timeout = spec
            .model_timeout
            .unwrap_or(ExternalModel::DEFAULT_TIMEOUT.as_secs_f64());
        if !(timeout > 0.0 && timeout.is_finite()) {
            bail!(ShapError::Config(format!(
                "--model-timeout must be positive, got {timeout}"
            )));
        }
        let model = ExternalModel::spawn_command_line(&words[0], &words[1..], Duration::from_secs_f64(timeout))?;
        return Ok(Box::new(model));
    }
    let kind = spec.model.as_deref().unwrap_or("rbf");
    let trained = match kind {
        "rbf" => BuiltinModel::Rbf(train_rbf_classifier(
            data,
            spec.gamma.unwrap_or(DEFAULT_GAMMA),
            spec.lambda.unwrap_or(DEFAULT_LAMBDA),
        )?),
        "forest" => BuiltinModel::Forest(fit_forest(
            data,
            &ForestConfig {
                tree_count: spec.trees.unwrap_or(ForestConfig::default().tree_count),
                max_depth: spec.depth,
                seed: derive_seed(spec.seed(), "model", 0),
                ..Default::default()
            },
        )?),
        path if path.ends_with(".json") => {
            BuiltinModel::load_json(path).with_context(|| format!("loading model {path}"))?
        }
        other => bail!(ShapError::Config(format!(
            "unknown model '{other}' (expected rbf, forest or a model .json file)"
        ))),
    };
    if let Some(path) = &spec.save_model {
        trained.save_json(path)?;
        log::info!("saved model to {}", path.display());
    }
    Ok(Box::new(trained))
}

/// Ensemble configuration from the flags, with member seed `seed`.
pub fn ensemble_config(spec: &RunSpec, n: usize, t: Option<usize>, seed: u64) -> ExplainerConfig {
    let mut cfg = ExplainerConfig {
        members: n,
        subset_size: t,
        combiner: spec.combiner,
        temperature: spec.temperature,
        retain_members: spec.members.unwrap_or(false),
        seed,
        ..Default::default()
    };
    if let Some(s) = spec.sigma {
        cfg.neighbor_sigma = s;
    }
    if let Some(m) = spec.neighbors {
        cfg.rf_neighbors = m;
    }
    if let Some(s) = spec.rf_sigma {
        cfg.rf_sigma = s;
    }
    cfg
}
