//! Empirical statistics over orbits of the random system.

pub mod circle;
pub mod coverage;
pub mod kac;
pub mod measure;
pub mod nonnormal;
pub mod occupation;
pub mod sojourn;
pub mod tail;

use serde::Serialize;

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(x: &[f64]) -> Self {
        Self {
            count: x.len(),
            mean: x.iter().sum::<f64>() / x.len() as f64,
            median: median(x),
            min: x.iter().copied().fold(f64::INFINITY, f64::min),
            max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}
