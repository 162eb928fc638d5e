//! Five two-class boundary patterns over features 1 and 2; features 3..5 are
//! uniform noise on [-1, 1] that never influences the label.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;

use super::Dataset;
use crate::error::{Result, ShapError};
use crate::seed;

pub const SYNTHETIC_FEATURES: usize = 5;

/// Value of every feature in the reference explained instance.
pub const DEFAULT_INSTANCE_VALUE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticPattern {
    /// Class 1 above the line `x2 = slope * x1 + offset`.
    Linear { slope: f64, offset: f64 },
    /// Class 1 inside the horizontal band `|x2| < half_width`.
    Stripe { half_width: f64 },
    /// Class 1 above `amplitude * tri(frequency * x1)`, `tri` a unit triangle wave.
    Saw { amplitude: f64, frequency: f64 },
    /// Class 1 inside the cone `|x2| < x1 - apex` opening to the right.
    Wedge { apex: f64 },
    /// Parity of a `cells x cells` board over `[-1, 1]^2`.
    Checkerboard { cells: usize },
}

impl SyntheticPattern {
    pub fn linear() -> Self {
        SyntheticPattern::Linear {
            slope: -1.0,
            offset: 0.0,
        }
    }
    pub fn stripe() -> Self {
        SyntheticPattern::Stripe { half_width: 0.33 }
    }
    pub fn saw() -> Self {
        SyntheticPattern::Saw {
            amplitude: 0.5,
            frequency: 3.0,
        }
    }
    pub fn wedge() -> Self {
        SyntheticPattern::Wedge { apex: -0.5 }
    }
    pub fn checkerboard() -> Self {
        SyntheticPattern::Checkerboard { cells: 3 }
    }

    pub fn all() -> [SyntheticPattern; 5] {
        [
            Self::linear(),
            Self::stripe(),
            Self::saw(),
            Self::wedge(),
            Self::checkerboard(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticPattern::Linear { .. } => "linear",
            SyntheticPattern::Stripe { .. } => "stripe",
            SyntheticPattern::Saw { .. } => "saw",
            SyntheticPattern::Wedge { .. } => "wedge",
            SyntheticPattern::Checkerboard { .. } => "checkerboard",
        }
    }

    /// Class of a point given its first two coordinates.
    pub fn label(&self, x1: f64, x2: f64) -> f64 {
        let hit = match *self {
            SyntheticPattern::Linear { slope, offset } => x2 > slope * x1 + offset,
            SyntheticPattern::Stripe { half_width } => x2.abs() < half_width,
            SyntheticPattern::Saw { amplitude, frequency } => x2 > amplitude * triangle(frequency * x1),
            SyntheticPattern::Wedge { apex } => x2.abs() < x1 - apex,
            SyntheticPattern::Checkerboard { cells } => {
                let cell = |v: f64| (((v + 1.0) / 2.0 * cells as f64).floor() as i64).clamp(0, cells as i64 - 1);
                (cell(x1) + cell(x2)) % 2 == 1
            }
        };
        if hit {
            1.0
        } else {
            0.0
        }
    }
}

/// Triangle wave with period 2 and range [-1, 1]; `triangle(0) = 1`.
fn triangle(u: f64) -> f64 {
    1.0 - 2.0 * (u - 2.0 * (u / 2.0).round()).abs()
}

impl fmt::Display for SyntheticPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticPattern {
    type Err = ShapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::linear()),
            "stripe" => Ok(Self::stripe()),
            "saw" => Ok(Self::saw()),
            "wedge" => Ok(Self::wedge()),
            "checkerboard" => Ok(Self::checkerboard()),
            other => Err(ShapError::Config(format!(
                "unknown synthetic pattern '{other}' (expected linear, stripe, saw, wedge or checkerboard)"
            ))),
        }
    }
}

/// `n` points uniform on `[-1, 1]^5`, labelled by `pattern` on features 1-2.
pub fn generate_synthetic(pattern: &SyntheticPattern, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(ShapError::Config("synthetic dataset needs n >= 1".into()));
    }
    let mut rng = seed::rng_for(seed, "synthetic", 0);
    let features = Array2::from_shape_fn((n, SYNTHETIC_FEATURES), |_| rng.random_range(-1.0..=1.0));
    let labels = features.rows().into_iter().map(|r| pattern.label(r[0], r[1])).collect();
    Ok(Dataset::new(features, None, Some(labels))?.with_provenance(format!("synthetic:{pattern}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_far_points() {
        let p = SyntheticPattern::linear();
        assert_eq!(p.label(0.9, 0.9), 1.0);
        assert_eq!(p.label(-0.9, -0.9), 0.0);
    }

    #[test]
    fn two_by_two_checkerboard_parity() {
        let p = SyntheticPattern::Checkerboard { cells: 2 };
        assert_eq!(p.label(-0.5, -0.5), p.label(0.5, 0.5));
        assert_ne!(p.label(-0.5, 0.5), p.label(-0.5, -0.5));
    }

    #[test]
    fn every_pattern_is_roughly_balanced() {
        for p in SyntheticPattern::all() {
            let d = generate_synthetic(&p, 10_000, 17).unwrap();
            let ones = d.labels().unwrap().iter().sum::<f64>() / 10_000.0;
            assert!((0.3..=0.7).contains(&ones), "{p}: class-1 frequency {ones}");
        }
    }

    #[test]
    fn labels_ignore_noise_features() {
        let p = SyntheticPattern::saw();
        let d = generate_synthetic(&p, 200, 4).unwrap();
        for (r, y) in d.features().rows().into_iter().zip(d.labels().unwrap()) {
            assert_eq!(p.label(r[0], r[1]), *y);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_synthetic(&SyntheticPattern::wedge(), 50, 8).unwrap();
        let b = generate_synthetic(&SyntheticPattern::wedge(), 50, 8).unwrap();
        assert_eq!(a, b);
        for v in a.features().iter() {
            assert!((-1.0..=1.0).contains(v));
        }
    }

    #[test]
    fn unknown_pattern_is_an_error() {
        assert!("spiral".parse::<SyntheticPattern>().is_err());
        assert_eq!(
            "Stripe".parse::<SyntheticPattern>().unwrap(),
            SyntheticPattern::stripe()
        );
    }

    #[test]
    fn triangle_wave_shape() {
        assert_eq!(triangle(0.0), 1.0);
        assert_eq!(triangle(1.0), -1.0);
        assert_eq!(triangle(2.0), 1.0);
        assert_eq!(triangle(0.5), 0.0);
    }
}
