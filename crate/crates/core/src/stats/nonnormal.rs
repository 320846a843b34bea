use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{koenigs_linearizer, taylor_at_zero, TruncatedSeries, CHANGE_OF_COORDINATES_ORDER};
use crate::systems::IfsSystem;

/// Extra order used to detect truncation error.
pub const TRUNCATION_PROBE: usize = 5;
pub const TRUNCATION_TOL: f64 = 1e-8;
const MAX_BLOCK: usize = 100_000;

/// `g₀` in the coordinate where `f₁` is linear, rescaled so that
/// `g₀(ζ) = 2ζ + ζ² + O(ζ³)`.
#[derive(Clone, Debug)]
pub struct ConjugatedPair {
    pub lambda: Complex64,
    /// `z²`-coefficient of `ψ ∘ f₀ ∘ ψ⁻¹` before rescaling.
    pub kappa: Complex64,
    pub g0: TruncatedSeries,
    pub g0_check: TruncatedSeries,
}

fn conjugated_f0(sys: &IfsSystem, order: usize) -> Result<TruncatedSeries> {
    let f1 = taylor_at_zero(sys.map(1), order)?;
    let f0 = taylor_at_zero(sys.map(0), order)?;
    let psi = koenigs_linearizer(&f1, order)?;
    psi.compose(&f0.compose(&psi.inverse()?)?)
}

/// `κ g(ζ/κ)`.
fn rescaled(g: &TruncatedSeries, kappa: Complex64) -> Result<TruncatedSeries> {
    let mut k_pow = Complex64::new(1.0, 0.0);
    let coeffs = g
        .coeffs()
        .iter()
        .map(|&b| {
            let v = b * k_pow;
            k_pow /= kappa;
            v
        })
        .collect();
    TruncatedSeries::new(coeffs)
}

impl ConjugatedPair {
    pub fn new(lambda: Complex64, order: usize) -> Result<Self> {
        if lambda.im == 0.0 || lambda.norm() == 0.0 || lambda.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in B(0,1) minus the reals")));
        }
        let sys = IfsSystem::critical(lambda, 0.5)?;
        let g = conjugated_f0(&sys, order)?;
        let g_check = conjugated_f0(&sys, order + TRUNCATION_PROBE)?;
        let kappa = g.coeff(2);
        Ok(Self {
            lambda,
            kappa,
            g0: rescaled(&g, kappa)?,
            g0_check: rescaled(&g_check, kappa)?,
        })
    }

    /// `(g₀(ζ), g₀′(ζ))`, failing when the two truncation orders disagree.
    pub fn g0(&self, z: Complex64, r: f64) -> Result<(Complex64, Complex64)> {
        let (a, da) = (self.g0.eval(z), self.g0.eval_derivative(z));
        let (b, db) = (self.g0_check.eval(z), self.g0_check.eval_derivative(z));
        if (a - b).norm() > TRUNCATION_TOL * b.norm() || (da - db).norm() > TRUNCATION_TOL * db.norm() {
            return Err(Error::ScaleTooLarge(r));
        }
        Ok((a, da))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeStep {
    pub n: usize,
    pub symbol: u8,
    pub re: f64,
    pub im: f64,
    /// `R_n = |v_n| / |z_n|`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonNormalityTrace {
    pub lambda: [f64; 2],
    pub r: f64,
    pub kappa: [f64; 2],
    pub cycles: usize,
    pub steps: Vec<ProbeStep>,
    /// `R` after each `g₀` block divided by `R` before it.
    pub block_gains: Vec<f64>,
}

impl NonNormalityTrace {
    pub fn ratios(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.ratio).collect()
    }

    pub fn total_gain(&self) -> f64 {
        let r = self.ratios();
        r[r.len() - 1] / r[0]
    }
}

/// `C = {0 < |z| < r/3, |arg z| < 2π/5}`.
pub fn in_cone(z: Complex64, r: f64) -> bool {
    let m = z.norm();
    m > 0.0 && m < r / 3.0 && z.arg().abs() < 2.0 * PI / 5.0
}

/// Runs the word policy "apply `g₁` until the orbit enters `C`, then `g₀`
/// until it leaves" for the given number of cycles, tracking the tangent
/// vector `v` with `v₀ = 1` from `z₀ = r`.
pub fn non_normality_probe(lambda: Complex64, r: f64, cycles: usize) -> Result<NonNormalityTrace> {
    if !(r > 0.0 && r <= 0.01) {
        return Err(Error::InvalidParameter(format!("scale r = {r} must lie in (0, 0.01]")));
    }
    let pair = ConjugatedPair::new(lambda, CHANGE_OF_COORDINATES_ORDER)?;
    let mut z = Complex64::new(r, 0.0);
    let mut v = Complex64::new(1.0, 0.0);
    let mut steps = vec![ProbeStep {
        n: 0,
        symbol: 1,
        re: z.re,
        im: z.im,
        ratio: v.norm() / z.norm(),
    }];
    let push = |steps: &mut Vec<ProbeStep>, symbol: u8, z: Complex64, v: Complex64| {
        let n = steps.len();
        steps.push(ProbeStep {
            n,
            symbol,
            re: z.re,
            im: z.im,
            ratio: v.norm() / z.norm(),
        });
    };
    let mut block_gains = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let mut guard = 0;
        while !in_cone(z, r) {
            z *= lambda;
            v *= lambda;
            push(&mut steps, 1, z, v);
            guard += 1;
            if guard > MAX_BLOCK || z.norm() == 0.0 {
                return Err(Error::Numeric("g1 block never reaches the cone".into()));
            }
        }
        let before = steps[steps.len() - 1].ratio;
        guard = 0;
        while in_cone(z, r) {
            let (gz, dg) = pair.g0(z, r)?;
            v *= dg;
            z = gz;
            push(&mut steps, 0, z, v);
            guard += 1;
            if guard > MAX_BLOCK {
                return Err(Error::Numeric("g0 block never leaves the cone".into()));
            }
        }
        block_gains.push(steps[steps.len() - 1].ratio / before);
    }
    Ok(NonNormalityTrace {
        lambda: [lambda.re, lambda.im],
        r,
        kappa: [pair.kappa.re, pair.kappa.im],
        cycles,
        steps,
        block_gains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normal_form() {
        let p = ConjugatedPair::new(c(0.0, 0.5), 20).unwrap();
        assert!((p.g0.coeff(1) - c(2.0, 0.0)).norm() < 1e-12);
        assert!((p.g0.coeff(2) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_cycles_is_singleton() {
        let t = non_normality_probe(c(0.0, 0.5), 5e-3, 0).unwrap();
        assert_eq!(t.ratios(), vec![1.0 / 5e-3]);
    }

    #[test]
    fn g1_blocks_keep_the_ratio() {
        let t = non_normality_probe(c(0.0, 0.5), 5e-3, 10).unwrap();
        for w in t.steps.windows(2) {
            if w[1].symbol == 1 {
                assert!((w[1].ratio - w[0].ratio).abs() <= 1e-12 * w[0].ratio);
            }
        }
        assert!(t.block_gains.iter().all(|&g| g > 1.0));
    }

    #[test]
    fn g0_blocks_increase_the_ratio() {
        let t = non_normality_probe(c(0.0, 0.5), 5e-3, 10).unwrap();
        for w in t.steps.windows(2) {
            if w[1].symbol == 0 {
                assert!(w[1].ratio > w[0].ratio);
            }
        }
    }

    #[test]
    fn preconditions() {
        assert!(non_normality_probe(c(0.5, 0.0), 5e-3, 1).is_err());
        assert!(non_normality_probe(c(0.0, 0.5), 0.05, 1).is_err());
        assert!(non_normality_probe(c(0.0, 1.5), 5e-3, 1).is_err());
    }

    #[test]
    fn large_scale_is_rejected_by_the_truncation_check() {
        let p = ConjugatedPair::new(c(0.0, 0.5), 20).unwrap();
        assert!(matches!(p.g0(c(1.0, 0.0), 0.9), Err(Error::ScaleTooLarge(_))));
        assert!(p.g0(c(1e-3, 0.0), 5e-3).is_ok());
    }
}
