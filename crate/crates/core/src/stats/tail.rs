use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const BOOTSTRAP_REPLICATES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub samples: usize,
    pub k: usize,
    pub alpha: f64,
    /// 90% percentile-bootstrap interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub rank: usize,
    pub value: f64,
}

fn hill_sorted_desc(v: &[f64], k: usize) -> Result<f64> {
    let threshold = v[k];
    if threshold <= 0.0 {
        return Err(Error::UndefinedTail("order statistic x_(k+1) is not positive".into()));
    }
    let s: f64 = v[..k].iter().map(|x| (x / threshold).ln()).sum();
    if s <= 0.0 {
        return Err(Error::UndefinedTail("top order statistics are all equal".into()));
    }
    Ok(k as f64 / s)
}

fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Hill estimator `k / Σ_{i≤k} ln(x_(i)/x_(k+1))` over the `k` largest
/// values, with a seeded percentile bootstrap.
pub fn hill_tail_index(samples: &[f64], k: usize, seed: u64) -> Result<TailEstimate> {
    let n = samples.len();
    if k < 10 || 2 * k >= n {
        return Err(Error::InvalidParameter(format!(
            "need 10 <= k < n/2, got k = {k}, n = {n}"
        )));
    }
    let alpha = hill_sorted_desc(&sorted_desc(samples), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(BOOTSTRAP_REPLICATES);
    let mut resample = vec![0.0; n];
    for _ in 0..BOOTSTRAP_REPLICATES {
        for slot in resample.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        resample.sort_by(|a, b| b.total_cmp(a));
        // a replicate whose top k are tied carries no tail information
        if let Ok(a) = hill_sorted_desc(&resample, k) {
            boot.push(a);
        }
    }
    boot.sort_by(f64::total_cmp);
    let q = |p: f64| {
        if boot.is_empty() {
            f64::NAN
        } else {
            boot[((p * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)]
        }
    };
    Ok(TailEstimate {
        samples: n,
        k,
        alpha,
        ci_low: q(0.05),
        ci_high: q(0.95),
    })
}

/// Samples in decreasing order with their ranks (1 = largest).
pub fn tail_rows(samples: &[f64]) -> Vec<TailRow> {
    sorted_desc(samples)
        .into_iter()
        .enumerate()
        .map(|(i, value)| TailRow { rank: i + 1, value })
        .collect()
}

/// `k = n/20`, the fraction the mechanism calibration settles on.
pub fn default_k(n: usize) -> usize {
    (n / 20).max(10)
}
