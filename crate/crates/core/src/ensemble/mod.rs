//! Ensembles of small exact Shapley explanations over random feature subsets.
//!
//! Each member draws `t` of the `m` features, enumerates all `2^t`
//! coalitions of that subset exactly (every other feature held at its
//! background mean) and reports attributions for its `t` features. The
//! member attributions are then combined per feature. Three explainers share
//! this machinery and differ in what a member explains and how its subset is
//! drawn:
//!
//! * [`er_shap`]: uniform subsets, the instance itself, plain averaging.
//! * [`erw_shap`]: uniform subsets of a Gaussian neighbour `h_k` of the
//!   instance, averaged with weights `exp(-|h_k - x|^2)`.
//! * [`er_shap_rf`]: subsets drawn from a forest-importance distribution
//!   learnt on model-labelled neighbours.
//!
//! Members run in parallel. Each derives its RNG stream from
//! `(seed, stream name, member index)` and the combination step folds the
//! records in member order, so reports are reproducible bit for bit.

mod combine;
mod config;
mod sampling;

use std::time::{Duration, Instant};

use ndarray::ArrayView2;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::generate_neighbors;
use crate::error::{Result, ShapError};
use crate::forest::{fit_forest_xy, impurity_importance, temperature_scale, FeatureDistribution};
use crate::seed;
use crate::shapley::{exact_shapley, feature_entries, FeatureEntry, ValueContext};

pub use combine::{combine, Combined, MemberRecord};
pub use config::{Combiner, ExplainerConfig};
pub use sampling::{uniform_subset, weighted_subset};

/// Temperature used when the forest distribution has fewer than `t`
/// positive entries and no temperature was configured.
pub const FALLBACK_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ErShap,
    ErwShap,
    ErShapRf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub method: Method,
    /// Combined attribution of every feature (0 where unobserved).
    pub values: Vec<f64>,
    pub unobserved: Vec<bool>,
    /// N_i: members whose subset contained feature i.
    pub selection_counts: Vec<usize>,
    /// W_i: total combiner weight per feature.
    pub weight_sums: Vec<f64>,
    /// `f` at the background means.
    pub base: f64,
    pub model_calls: u64,
    pub wall_time: Duration,
    pub members: Option<Vec<MemberRecord>>,
    /// Subset-sampling distribution (forest-guided ensemble only).
    pub distribution: Option<FeatureDistribution>,
    pub combiner: Combiner,
}

#[derive(Serialize)]
struct EnsembleJson<'a> {
    method: Method,
    base: f64,
    features: Vec<FeatureEntry>,
    model_calls: u64,
    selection_counts: &'a [usize],
    weight_sums: &'a [f64],
    unobserved: Vec<usize>,
    combiner: Combiner,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<&'a [MemberRecord]>,
    wall_time_ms: f64,
}

impl EnsembleReport {
    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        let indices: Vec<usize> = (0..self.values.len()).collect();
        serde_json::to_value(EnsembleJson {
            method: self.method,
            base: self.base,
            features: feature_entries(&indices, &self.values, names),
            model_calls: self.model_calls,
            selection_counts: &self.selection_counts,
            weight_sums: &self.weight_sums,
            unobserved: self
                .unobserved
                .iter()
                .enumerate()
                .filter(|(_, u)| **u)
                .map(|(i, _)| i)
                .collect(),
            combiner: self.combiner,
            distribution: self.distribution.as_ref().map(|d| d.probabilities()),
            members: self.members.as_deref(),
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
        })
        .expect("plain data serializes")
    }
}

/// Inputs of one member besides its subset.
struct MemberPlan {
    features: Vec<usize>,
    neighbor: Option<Vec<f64>>,
    weight: f64,
}

fn run_members<F>(ctx: &ValueContext<'_>, n: usize, plan: F) -> Result<Vec<MemberRecord>>
where
    F: Fn(usize) -> MemberPlan + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|k| {
            let p = plan(k);
            let r = match &p.neighbor {
                Some(h) => exact_shapley(&ctx.recentred(h.clone())?, &p.features)?,
                None => exact_shapley(ctx, &p.features)?,
            };
            Ok(MemberRecord {
                index: k,
                features: r.indices,
                values: r.values,
                weight: p.weight,
                neighbor: p.neighbor,
                base: r.base,
            })
        })
        .collect()
}

fn assemble(
    method: Method,
    members: Vec<MemberRecord>,
    rule: Combiner,
    m: usize,
    model_calls: u64,
    started: Instant,
    config: &ExplainerConfig,
    distribution: Option<FeatureDistribution>,
) -> Result<EnsembleReport> {
    let c = combine(&members, rule, m)?;
    Ok(EnsembleReport {
        method,
        values: c.values,
        unobserved: c.unobserved,
        selection_counts: c.selection_counts,
        weight_sums: c.weight_sums,
        base: members[0].base,
        model_calls,
        wall_time: started.elapsed(),
        members: config.retain_members.then_some(members),
        distribution,
        combiner: rule,
    })
}

fn member_calls(n: usize, t: usize) -> u64 {
    n as u64 * (1u64 << t)
}

/// Ensemble of random SHAPs: N uniform t-subsets of the instance, averaged.
pub fn er_shap(ctx: &ValueContext<'_>, config: &ExplainerConfig) -> Result<EnsembleReport> {
    let started = Instant::now();
    let m = ctx.feature_count();
    config.validate(m)?;
    let t = config.t(m);
    let members = run_members(ctx, config.members, |k| MemberPlan {
        features: uniform_subset(&mut seed::rng_for(config.seed, "subset", k as u64), m, t),
        neighbor: None,
        weight: 1.0,
    })?;
    let rule = config.combiner.unwrap_or(Combiner::Mean);
    assemble(
        Method::ErShap,
        members,
        rule,
        m,
        member_calls(config.members, t),
        started,
        config,
        None,
    )
}

/// `exp(-|h - x|^2)`, floored at the smallest positive double.
pub fn neighbor_weight(h: &[f64], x: &[f64]) -> f64 {
    let d2: f64 = h.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2).exp().max(f64::MIN_POSITIVE)
}

/// Ensemble of random weighted SHAPs: member k explains a Gaussian
/// neighbour `h_k` of the instance; members are weighted by
/// `exp(-|h_k - x|^2)`.
///
/// Subsets come from the same streams as [`er_shap`], so with zero noise the
/// two explainers agree exactly.
pub fn erw_shap(ctx: &ValueContext<'_>, config: &ExplainerConfig) -> Result<EnsembleReport> {
    let started = Instant::now();
    let m = ctx.feature_count();
    config.validate(m)?;
    let t = config.t(m);
    let sigma = config.neighbor_sigma;
    let x = ctx.instance();
    let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated"));
    let members = run_members(ctx, config.members, |k| {
        let features = uniform_subset(&mut seed::rng_for(config.seed, "subset", k as u64), m, t);
        let h: Vec<f64> = match &normal {
            None => x.to_vec(),
            Some(nd) => {
                let mut rng = seed::rng_for(config.seed, "erw-neighbor", k as u64);
                x.iter().map(|v| v + nd.sample(&mut rng)).collect()
            }
        };
        let weight = neighbor_weight(&h, x);
        MemberPlan {
            features,
            neighbor: Some(h),
            weight,
        }
    })?;
    let rule = config.combiner.unwrap_or(Combiner::WeightedMean);
    assemble(
        Method::ErwShap,
        members,
        rule,
        m,
        member_calls(config.members, t),
        started,
        config,
        None,
    )
}

/// Forest-guided ensemble: label `M` Gaussian neighbours of the instance
/// with the model, fit a random forest on them, and draw member subsets from
/// its impurity-importance distribution.
///
/// Costs `M + N 2^t` model calls.
pub fn er_shap_rf(ctx: &ValueContext<'_>, config: &ExplainerConfig) -> Result<EnsembleReport> {
    let m = ctx.feature_count();
    config.validate(m)?;
    let neighbors = generate_neighbors(
        ctx.instance(),
        config.rf_neighbors,
        config.rf_sigma,
        seed::derive_seed(config.seed, "rf-neighbors", 0),
    )?;
    er_shap_rf_with_rows(ctx, neighbors.view(), config)
}

/// [`er_shap_rf`] with caller-supplied pre-training points (for instance
/// training rows). They are labelled by the model like generated neighbours.
pub fn er_shap_rf_with_rows(
    ctx: &ValueContext<'_>,
    rows: ArrayView2<'_, f64>,
    config: &ExplainerConfig,
) -> Result<EnsembleReport> {
    let started = Instant::now();
    let m = ctx.feature_count();
    config.validate(m)?;
    if rows.nrows() == 0 {
        return Err(ShapError::Config(
            "no pre-training rows for the importance forest".into(),
        ));
    }
    let t = config.t(m);
    let labels = ctx.predict(rows.to_owned())?;
    let forest_cfg = crate::forest::ForestConfig {
        seed: seed::derive_seed(config.seed, "rf-forest", 0),
        ..config.forest.clone()
    };
    let forest = fit_forest_xy(rows, &labels, &forest_cfg)?;
    let mut p = impurity_importance(&forest);
    if let Some(temp) = config.temperature {
        p = temperature_scale(&p, temp)?;
    }
    if p.nonzero_count() < t {
        let temp = config.temperature.unwrap_or(FALLBACK_TEMPERATURE);
        log::warn!(
            "importance distribution has {} positive entries for t = {t}; smoothing with temperature {temp}",
            p.nonzero_count()
        );
        p = temperature_scale(&p, temp)?;
    }
    let members = run_members(ctx, config.members, |k| MemberPlan {
        features: weighted_subset(&mut seed::rng_for(config.seed, "subset", k as u64), &p, t),
        neighbor: None,
        weight: 1.0,
    })?;
    let rule = config.combiner.unwrap_or(Combiner::Mean);
    let calls = rows.nrows() as u64 + member_calls(config.members, t);
    assemble(Method::ErShapRf, members, rule, m, calls, started, config, Some(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::LinearModel;

    #[test]
    fn weight_formula() {
        let x = [0.0, 0.0];
        let h = [std::f64::consts::LN_2.sqrt(), 0.0];
        assert!((neighbor_weight(&h, &x) - 0.5).abs() < 1e-15);
        assert_eq!(neighbor_weight(&x, &x), 1.0);
        assert!(neighbor_weight(&[100.0, 0.0], &x) > 0.0);
    }

    #[test]
    fn additive_model_members_are_exact() {
        let model = LinearModel::new(vec![2.0, 3.0, 0.0], 0.0);
        let ctx = ValueContext::new(&model, vec![1.0; 3], vec![0.0; 3]).unwrap();
        let cfg = ExplainerConfig {
            retain_members: true,
            ..ExplainerConfig::new(200, 2, 5)
        };
        let r = er_shap(&ctx, &cfg).unwrap();
        for (got, want) in r.values.iter().zip([2.0, 3.0, 0.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        for rec in r.members.as_ref().unwrap() {
            for (&i, &v) in rec.features.iter().zip(&rec.values) {
                assert!((v - [2.0, 3.0, 0.0][i]).abs() < 1e-12);
            }
        }
        assert_eq!(r.model_calls, 200 * 4);
        assert_eq!(ctx.model_calls(), 200 * 4);
    }

    #[test]
    fn call_count_contract() {
        let model = LinearModel::new(vec![1.0; 5], 0.0);
        let ctx = ValueContext::new(&model, vec![0.25; 5], vec![0.0; 5]).unwrap();
        let r = er_shap(&ctx, &ExplainerConfig::new(10, 3, 1)).unwrap();
        assert_eq!(r.model_calls, 80);
        assert_eq!(r.selection_counts.iter().sum::<usize>(), 30);
    }

    #[test]
    fn json_carries_ensemble_fields() {
        let model = LinearModel::new(vec![1.0, 2.0, 3.0, 4.0], 0.0);
        let ctx = ValueContext::new(&model, vec![1.0; 4], vec![0.0; 4]).unwrap();
        let r = er_shap(&ctx, &ExplainerConfig::new(1, 2, 1)).unwrap();
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let v = r.to_json(&names);
        assert_eq!(v["features"].as_array().unwrap().len(), 4);
        assert_eq!(v["unobserved"].as_array().unwrap().len(), 2);
        assert_eq!(v["model_calls"], 4);
        assert!(v["wall_time_ms"].is_number());
        assert!(v.get("members").is_none());
    }
}
