use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::OrbitPoint;
use crate::error::{Error, Result};
use crate::rds::{advance, ensemble, OrbitState, SymbolStream};
use crate::sphere::SpherePoint;
use crate::systems::{HypothesisReport, IfsSystem};

pub const DEFAULT_INNER_RADIUS: f64 = 1e-3;
pub const DEFAULT_CAP: u64 = 100_000_000;
// separates the start-point generator from the symbol streams
const START_SEED_SALT: u64 = 0x6b61_635f_7374_6172;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnTime {
    pub value: u64,
    /// The cap was reached before a return; `value` is the cap.
    pub censored: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KacSamples {
    pub inner_radius: f64,
    pub cap: u64,
    pub samples: Vec<ReturnTime>,
    pub censored: usize,
    pub hypotheses: HypothesisReport,
}

/// `𝒜 = {s ≤ |z| < 2s}`.
fn in_annulus(p: &OrbitPoint, s: f64) -> bool {
    !p.abs_lt(s) && p.abs_lt(2.0 * s)
}

/// First return of `(ω, z)` to `[0] × 𝒜`: the smallest `i > 0` with
/// `z_i ∈ 𝒜` and `ω_i = 0`, starting from `z` on the annulus with `ω₀ = 0`.
pub fn return_time(
    sys: &IfsSystem,
    z: SpherePoint,
    s: f64,
    cap: u64,
    stream: &mut SymbolStream,
) -> Result<ReturnTime> {
    let mut state = OrbitState::with_history(sys, z, 0);
    advance(sys, &mut state, 0)?;
    while state.step < cap {
        let symbol = stream.next_symbol();
        if symbol == 0 && in_annulus(&state.point, s) {
            return Ok(ReturnTime {
                value: state.step,
                censored: false,
            });
        }
        advance(sys, &mut state, symbol)?;
    }
    Ok(ReturnTime {
        value: cap,
        censored: true,
    })
}

/// Start point `i`, uniform in area on the annulus.
pub fn annulus_start(seed: u64, index: u64, s: f64) -> SpherePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ START_SEED_SALT);
    rng.set_stream(index);
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let r = s * (1.0 + 3.0 * u).sqrt();
    SpherePoint::finite(Complex64::from_polar(r, 2.0 * PI * v))
}

/// I.i.d. return times, sample `i` using symbol stream `i` of `seed`.
pub fn kac_return_times(sys: &IfsSystem, s: f64, samples: u64, cap: u64, seed: u64) -> Result<KacSamples> {
    if !(s > 0.0 && s < 0.1) {
        return Err(Error::InvalidParameter(format!("inner radius {s} must lie in (0, 0.1)")));
    }
    let out = ensemble(samples, |i| {
        let z = annulus_start(seed, i, s);
        return_time(sys, z, s, cap, &mut SymbolStream::new(seed, i, sys.p0()))
    })?;
    Ok(KacSamples {
        inner_radius: s,
        cap,
        censored: out.iter().filter(|r| r.censored).count(),
        samples: out,
        hypotheses: sys.check_hypotheses(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KacRow {
    pub sample: usize,
    pub return_time: u64,
    pub censored: bool,
}

impl KacSamples {
    pub fn rows(&self) -> Vec<KacRow> {
        self.samples
            .iter()
            .enumerate()
            .map(|(sample, r)| KacRow {
                sample,
                return_time: r.value,
                censored: r.censored,
            })
            .collect()
    }

    /// Mean of the first `n` samples, censored values counted at the cap.
    pub fn running_mean(&self, n: usize) -> f64 {
        let n = n.min(self.samples.len());
        self.samples[..n].iter().map(|r| r.value as f64).sum::<f64>() / n as f64
    }

    /// Fraction of samples with `R > 2^N` (censored samples count as
    /// exceeding every level below the cap).
    pub fn tail_fraction(&self, n: u32) -> f64 {
        let level = 1u64 << n;
        self.samples.iter().filter(|r| r.value > level).count() as f64 / self.samples.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailScaling {
    pub levels: Vec<u32>,
    pub fractions: Vec<f64>,
    /// Least-squares `C` in `log(fraction) ≈ log C + N log p₀`.
    pub constant: f64,
    /// `fraction / (C p₀^N)` per level.
    pub ratios: Vec<f64>,
}

/// Compares `P(R > 2^N)` with `C p₀^N` over the given levels.
pub fn tail_scaling(samples: &KacSamples, p0: f64, levels: &[u32]) -> Result<TailScaling> {
    let fractions: Vec<f64> = levels.iter().map(|&n| samples.tail_fraction(n)).collect();
    if fractions.contains(&0.0) {
        return Err(Error::UndefinedTail("a tail level has no exceedances".into()));
    }
    let log_c = levels
        .iter()
        .zip(&fractions)
        .map(|(&n, &f)| f.ln() - n as f64 * p0.ln())
        .sum::<f64>()
        / levels.len() as f64;
    let constant = log_c.exp();
    let ratios = levels
        .iter()
        .zip(&fractions)
        .map(|(&n, &f)| f / (constant * p0.powi(n as i32)))
        .collect();
    Ok(TailScaling {
        levels: levels.to_vec(),
        fractions,
        constant,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_fill_the_annulus() {
        let s = 1e-3;
        let r: Vec<f64> = (0..4000).map(|i| annulus_start(5, i, s).abs()).collect();
        assert!(r.iter().all(|&x| (s..2.0 * s).contains(&x)));
        // uniform in area: P(|z| < 1.5 s) = (2.25 − 1)/3
        let inner = r.iter().filter(|&&x| x < 1.5 * s).count() as f64 / r.len() as f64;
        assert!((inner - 1.25 / 3.0).abs() < 0.03, "{inner}");
    }

    #[test]
    fn only_f0_never_returns() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 1.0).unwrap();
        let k = kac_return_times(&sys, 1e-3, 20, 10_000, 3).unwrap();
        assert_eq!(k.censored, 20);
        assert!(k.samples.iter().all(|r| r.censored && r.value == 10_000));
    }

    #[test]
    fn returns_require_symbol_zero_in_the_annulus() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.6).unwrap();
        for i in 0..50 {
            let z = annulus_start(11, i, 1e-3);
            let mut stream = SymbolStream::new(11, i, 0.6);
            let r = return_time(&sys, z, 1e-3, 1_000_000, &mut stream.clone()).unwrap();
            if r.censored {
                continue;
            }
            // replay with the same symbols and check the stopping condition
            let mut st = OrbitState::with_history(&sys, z, 0);
            advance(&sys, &mut st, 0).unwrap();
            for n in 1..=r.value {
                let sym = stream.next_symbol();
                let hit = sym == 0 && in_annulus(&st.point, 1e-3);
                assert_eq!(hit, n == r.value);
                if !hit {
                    advance(&sys, &mut st, sym).unwrap();
                }
            }
        }
    }
}
