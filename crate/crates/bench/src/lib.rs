//! Fixtures shared by the criterion benches.

use ndarray::Array2;
use rand::Rng;
use shapkit::data::{background_means, Dataset};
use shapkit::forest::{fit_forest, ForestConfig, RandomForest};

/// A 13-feature regression table shaped like the usual housing benchmark:
/// 506 rows, a smooth nonlinear target driven mostly by a few columns.
pub fn housing_like(seed: u64) -> Dataset {
    let mut rng = shapkit::seed::rng_for(seed, "bench-housing", 0);
    let x = Array2::from_shape_fn((506, 13), |_| rng.random_range(-1.0..1.0));
    let y = x
        .rows()
        .into_iter()
        .map(|r| 3.0 * r[5] - 2.0 * r[12] + r[0] * r[7] + 0.5 * r[2] * r[2] + 0.3 * r[10])
        .collect();
    Dataset::new(x, None, Some(y)).expect("valid shape")
}

/// Black box used by the benches: a regression forest on [`housing_like`].
pub fn housing_forest(data: &Dataset) -> RandomForest {
    fit_forest(
        data,
        &ForestConfig {
            tree_count: 20,
            max_depth: Some(8),
            seed: 1,
            ..Default::default()
        },
    )
    .expect("forest fits")
}

/// First row and the background means.
pub fn explained_row(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    (data.row(0).expect("non-empty"), background_means(data))
}
