use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::bail;
use rayon::prelude::*;
use serde_json::{json, Value};
use shapkit::ensemble::{er_shap, er_shap_rf, erw_shap};
use shapkit::metrics::{ComparisonResult, Cost};
use shapkit::seed::derive_seed;
use shapkit::shapley::{exact_shapley, kernel_shap_baseline, permutation_shapley, ENUMERATION_CAP};
use shapkit::{ShapError, ValueContext};

use crate::setup::{ensemble_config, Problem, Source, DEFAULT_PANEL};
use crate::spec::{Baseline, Explainer, Format, RunSpec};

const KERNEL_SAMPLES: usize = 2048;
const PERMUTATIONS: usize = 2000;
const DEFAULT_N: usize = 50;
const MIN_REPEATS: usize = 5;

pub struct Explanation {
    pub values: Vec<f64>,
    pub cost: Cost,
    pub json: Value,
}

/// Ensemble size and subset size for one run.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub n: usize,
    pub t: Option<usize>,
}

impl Budget {
    fn from_spec(spec: &RunSpec) -> Self {
        Budget {
            n: spec.n.unwrap_or(DEFAULT_N),
            t: spec.t,
        }
    }
}

pub fn run_explainer(
    problem: &Problem,
    spec: &RunSpec,
    kind: Explainer,
    instance: &[f64],
    budget: Budget,
    seed: u64,
) -> anyhow::Result<Explanation> {
    let ctx = ValueContext::new(problem.model.as_ref(), instance.to_vec(), problem.background.clone())?;
    let names = problem.data.names();
    let all: Vec<usize> = (0..problem.m()).collect();
    let started = Instant::now();
    if kind.is_ensemble() {
        let cfg = ensemble_config(spec, budget.n, budget.t, seed);
        let report = match kind {
            Explainer::ErShap => er_shap(&ctx, &cfg)?,
            Explainer::ErwShap => erw_shap(&ctx, &cfg)?,
            _ => er_shap_rf(&ctx, &cfg)?,
        };
        let mut json = report.to_json(names);
        json["t"] = json!(cfg.t(problem.m()));
        json["n"] = json!(cfg.members);
        return Ok(Explanation {
            cost: Cost {
                model_calls: report.model_calls,
                wall_time: report.wall_time,
            },
            values: report.values,
            json,
        });
    }
    let result = match kind {
        Explainer::Exact => exact_shapley(&ctx, &all)?,
        Explainer::Kernel => kernel_shap_baseline(&ctx, &all, spec.samples.unwrap_or(KERNEL_SAMPLES), seed)?,
        _ => permutation_shapley(&ctx, &all, spec.samples.unwrap_or(PERMUTATIONS), seed)?,
    };
    let wall_time = started.elapsed();
    let mut json = result.to_json(names);
    json["method"] = json!(kind.name());
    json["prediction"] = json!(result.prediction);
    if let Some(se) = &result.std_errors {
        json["std_errors"] = json!(se);
    }
    json["wall_time_ms"] = json!(wall_time.as_secs_f64() * 1e3);
    Ok(Explanation {
        values: result.dense(problem.m()),
        cost: Cost {
            model_calls: result.model_calls,
            wall_time,
        },
        json,
    })
}

fn instance_seed(spec: &RunSpec, i: usize) -> u64 {
    derive_seed(spec.seed(), "instance", i as u64)
}

fn default_instance(problem: &Problem) -> &'static str {
    match problem.source {
        Source::Synthetic(_) => "paper-default",
        Source::Csv => "row:0",
    }
}

fn panel_default() -> String {
    format!("panel:{DEFAULT_PANEL}")
}

/// Write the report to `--out` or stdout.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| ShapError::Io(e).into()),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn explain(spec: &RunSpec) -> anyhow::Result<()> {
    let problem = Problem::build(spec)?;
    let instances = problem.instances(spec, default_instance(&problem))?;
    let kind = spec.explainer();
    let budget = Budget::from_spec(spec);
    let results = instances
        .iter()
        .enumerate()
        .map(|(i, x)| run_explainer(&problem, spec, kind, x, budget, instance_seed(spec, i)))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let text = match spec.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut docs: Vec<Value> = results.into_iter().map(|r| r.json).collect();
            if docs.len() == 1 {
                to_json_text(&docs.remove(0))
            } else {
                to_json_text(&Value::Array(docs))
            }
        }
        Format::Csv => {
            let mut s = String::from("instance,index,name,phi\n");
            for (i, r) in results.iter().enumerate() {
                for (j, (phi, name)) in r.values.iter().zip(problem.data.names()).enumerate() {
                    writeln!(s, "{i},{j},{},{phi}", csv_field(name)).expect("string write");
                }
            }
            s
        }
    };
    emit(spec.out.as_deref(), &text)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn baseline_kind(spec: &RunSpec, m: usize) -> Explainer {
    match spec.baseline.unwrap_or(Baseline::Auto) {
        Baseline::Auto if m <= ENUMERATION_CAP => Explainer::Exact,
        Baseline::Auto => {
            log::warn!("{m} features exceed the exact enumeration cap; comparing against kernel SHAP");
            Explainer::Kernel
        }
        Baseline::Exact => Explainer::Exact,
        Baseline::Kernel => Explainer::Kernel,
        Baseline::Perm => Explainer::Perm,
    }
}

fn candidate_kind(spec: &RunSpec) -> anyhow::Result<Explainer> {
    let kind = spec.explainer();
    if kind == Explainer::Exact {
        bail!(ShapError::Config(
            "the candidate explainer must differ from exact".into()
        ));
    }
    Ok(kind)
}

fn baselines(problem: &Problem, spec: &RunSpec, instances: &[Vec<f64>]) -> anyhow::Result<Vec<Explanation>> {
    let kind = baseline_kind(spec, problem.m());
    let budget = Budget::from_spec(spec);
    instances
        .iter()
        .enumerate()
        .map(|(i, x)| run_explainer(problem, spec, kind, x, budget, instance_seed(spec, i)))
        .collect()
}

pub fn compare(spec: &RunSpec) -> anyhow::Result<()> {
    let problem = Problem::build(spec)?;
    let candidate = candidate_kind(spec)?;
    let instances = problem.instances(spec, &panel_default())?;
    let reference = baselines(&problem, spec, &instances)?;
    let budget = Budget::from_spec(spec);
    let mut rows = Vec::with_capacity(instances.len());
    for (i, (x, base)) in instances.iter().zip(&reference).enumerate() {
        let cand = run_explainer(&problem, spec, candidate, x, budget, instance_seed(spec, i))?;
        rows.push(ComparisonResult::new(&base.values, &cand.values, cand.cost, base.cost)?);
    }
    let text = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{}\n", ComparisonResult::CSV_HEADER);
            for r in &rows {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json => to_json_text(&json!(rows
            .iter()
            .enumerate()
            .map(|(i, r)| json!({"instance": i, "comparison": r}))
            .collect::<Vec<_>>())),
    };
    emit(spec.out.as_deref(), &text)
}

struct Grid {
    n: Vec<usize>,
    t: Vec<usize>,
    concordance: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
    time_ratio: Vec<Vec<f64>>,
}

impl Grid {
    fn csv(&self, cells: &[Vec<f64>]) -> String {
        let mut s = String::from("N");
        for t in &self.t {
            write!(s, ",t={t}").expect("string write");
        }
        s.push('\n');
        for (n, row) in self.n.iter().zip(cells) {
            write!(s, "{n}").expect("string write");
            for v in row {
                write!(s, ",{v}").expect("string write");
            }
            s.push('\n');
        }
        s
    }
}

pub fn sweep(spec: &RunSpec) -> anyhow::Result<()> {
    let (Some(n_list), Some(t_list)) = (spec.n_list.clone(), spec.t_list.clone()) else {
        bail!(ShapError::Config("sweep needs --n-list and --t-list".into()));
    };
    if n_list.is_empty() || t_list.is_empty() {
        bail!(ShapError::Config("sweep grids must be non-empty".into()));
    }
    let problem = Problem::build(spec)?;
    let candidate = candidate_kind(spec)?;
    for &t in &t_list {
        ensemble_config(spec, 1, Some(t), 0).validate(problem.m())?;
    }
    let instances = problem.instances(spec, &panel_default())?;
    let reference = baselines(&problem, spec, &instances)?;

    let (rows, cols, k) = (n_list.len(), t_list.len(), instances.len());
    let jobs: Vec<(usize, usize, usize)> = (0..rows)
        .flat_map(|a| (0..cols).flat_map(move |b| (0..k).map(move |i| (a, b, i))))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(a, b, i)| {
            let budget = Budget {
                n: n_list[a],
                t: Some(t_list[b]),
            };
            let cand = run_explainer(&problem, spec, candidate, &instances[i], budget, instance_seed(spec, i))?;
            let base = &reference[i];
            Ok(ComparisonResult::new(&base.values, &cand.values, cand.cost, base.cost)?)
        })
        .collect::<anyhow::Result<Vec<ComparisonResult>>>()?;

    let cell_mean = |a: usize, b: usize, f: fn(&ComparisonResult) -> f64| -> f64 {
        let start = (a * t_list.len() + b) * k;
        outcomes[start..start + k].iter().map(f).sum::<f64>() / k as f64
    };
    let fill = |f: fn(&ComparisonResult) -> f64| -> Vec<Vec<f64>> {
        (0..n_list.len())
            .map(|a| (0..t_list.len()).map(|b| cell_mean(a, b, f)).collect())
            .collect()
    };
    let grid = Grid {
        concordance: fill(|r| r.concordance),
        distance: fill(|r| r.distance),
        time_ratio: fill(|r| r.time_ratio),
        n: n_list,
        t: t_list,
    };

    match spec.format.unwrap_or(Format::Csv) {
        Format::Json => emit(
            spec.out.as_deref(),
            &to_json_text(&json!({
                "n": grid.n,
                "t": grid.t,
                "instances": k,
                "concordance": grid.concordance,
                "distance": grid.distance,
                "time_ratio": grid.time_ratio,
            })),
        ),
        Format::Csv => match spec.out.as_deref() {
            Some(path) => {
                emit(Some(&companion(path, "E")), &grid.csv(&grid.distance))?;
                emit(Some(&companion(path, "time_ratio")), &grid.csv(&grid.time_ratio))?;
                emit(Some(path), &grid.csv(&grid.concordance))
            }
            None => {
                log::warn!("E and time-ratio grids are only written with --out");
                emit(None, &grid.csv(&grid.concordance))
            }
        },
    }
}

/// `grid.csv` -> `grid_E.csv`.
pub fn companion(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

struct BenchRow {
    kind: Explainer,
    n: Option<usize>,
    t: Option<usize>,
    model_calls: u64,
    times: Vec<Duration>,
}

pub fn bench(spec: &RunSpec) -> anyhow::Result<()> {
    let repeats = spec.repeats.unwrap_or(MIN_REPEATS);
    if repeats < MIN_REPEATS {
        bail!(ShapError::Config(format!(
            "--repeats must be at least {MIN_REPEATS}, got {repeats}"
        )));
    }
    let problem = Problem::build(spec)?;
    let instance = problem.instances(spec, default_instance(&problem))?.remove(0);
    let kinds = match &spec.explainers {
        Some(list) if !list.is_empty() => list.clone(),
        _ => {
            let mut v = vec![Explainer::Exact];
            if spec.explainer() != Explainer::Exact {
                v.push(spec.explainer());
            }
            v
        }
    };
    let budget = Budget::from_spec(spec);
    let seed = instance_seed(spec, 0);
    let mut rows = Vec::new();
    for kind in kinds {
        let mut times = Vec::with_capacity(repeats);
        let mut calls = None;
        for _ in 0..repeats {
            let r = run_explainer(&problem, spec, kind, &instance, budget, seed)?;
            match calls {
                None => calls = Some(r.cost.model_calls),
                Some(c) if c != r.cost.model_calls => {
                    bail!(
                        "{} made {c} then {} model calls for the same seed",
                        kind.name(),
                        r.cost.model_calls
                    )
                }
                Some(_) => {}
            }
            times.push(r.cost.wall_time);
        }
        times.sort();
        let ensemble = kind.is_ensemble();
        rows.push(BenchRow {
            kind,
            n: ensemble.then_some(budget.n),
            t: ensemble.then(|| ensemble_config(spec, budget.n, budget.t, 0).t(problem.m())),
            model_calls: calls.unwrap_or(0),
            times,
        });
    }

    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let text = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("explainer,n,t,model_calls,median_ms,min_ms,max_ms,runs\n");
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.kind.name(),
                    opt(r.n),
                    opt(r.t),
                    r.model_calls,
                    ms(r.times[r.times.len() / 2]),
                    ms(r.times[0]),
                    ms(r.times[r.times.len() - 1]),
                    r.times.len()
                )
                .expect("string write");
            }
            s
        }
        Format::Json => to_json_text(&json!(rows
            .iter()
            .map(|r| json!({
                "explainer": r.kind.name(),
                "n": r.n,
                "t": r.t,
                "model_calls": r.model_calls,
                "median_ms": ms(r.times[r.times.len() / 2]),
                "min_ms": ms(r.times[0]),
                "max_ms": ms(r.times[r.times.len() - 1]),
                "runs": r.times.len(),
            }))
            .collect::<Vec<_>>())),
    };
    emit(spec.out.as_deref(), &text)
}
