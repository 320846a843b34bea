//! The three concrete two-map systems and their hypothesis checks.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chart::{Anchor, ChartAtlas};
use crate::error::{Error, Result};
use crate::sphere::{RationalMap, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `f₀(z) = 2z + z²`, `f₁(z) = λz/(z+1)²`.
    Critical,
    /// `f₀(z) = μz`, `f₁(z) = z/(μ+z)`.
    Mobius,
    /// `g₂` and `g₄` with `g_a(x) = a x (1 − x)`.
    Logistic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Critical => "critical",
            Family::Mobius => "mobius",
            Family::Logistic => "logistic",
        })
    }
}

/// What a distinguished point is for.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialPoint {
    #[serde(skip)]
    pub anchor: Anchor,
    pub label: String,
    pub role: String,
    /// Labels of the images under `f₀` and `f₁`.
    pub image_f0: String,
    pub image_f1: String,
}

/// A two-map random system with selection probabilities.
#[derive(Clone, Debug)]
pub struct IfsSystem {
    family: Family,
    parameter: Complex64,
    maps: [RationalMap; 2],
    p0: f64,
    special: Vec<SpecialPoint>,
    atlas: ChartAtlas,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_probability(p0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidParameter(format!("p0 = {p0} is not a probability")));
    }
    Ok(())
}

/// Chart radius: a quarter, shrunk so that charts of distinct finite
/// anchors never overlap.
fn chart_radius(anchors: &[Anchor]) -> f64 {
    let mut r: f64 = 0.25;
    for (i, a) in anchors.iter().enumerate() {
        for b in &anchors[i + 1..] {
            if let (Anchor::Finite(x), Anchor::Finite(y)) = (a, b) {
                r = r.min(0.4 * (x - y).norm());
            }
        }
    }
    r
}

impl IfsSystem {
    fn assemble(
        family: Family,
        parameter: Complex64,
        maps: [RationalMap; 2],
        p0: f64,
        special: Vec<(Anchor, &str, &str)>,
    ) -> Result<Self> {
        check_probability(p0)?;
        let anchors: Vec<Anchor> = special.iter().map(|s| s.0).collect();
        let label = |p: &SpherePoint| {
            special
                .iter()
                .find(|s| s.0.to_sphere() == *p)
                .map(|s| s.1.to_string())
                .unwrap_or_else(|| p.to_string())
        };
        let mut records = Vec::with_capacity(special.len());
        for (anchor, name, role) in &special {
            let pt = anchor.to_sphere();
            records.push(SpecialPoint {
                anchor: *anchor,
                label: name.to_string(),
                role: role.to_string(),
                image_f0: label(&maps[0].apply(&pt)?),
                image_f1: label(&maps[1].apply(&pt)?),
            });
        }
        let atlas = ChartAtlas::new(&[&maps[0], &maps[1]], anchors.clone(), chart_radius(&anchors));
        let sys = Self {
            family,
            parameter,
            maps,
            p0,
            special: records,
            atlas,
        };
        if matches!(family, Family::Critical | Family::Mobius) {
            for (i, f) in sys.maps.iter().enumerate() {
                if f.apply(&SpherePoint::ZERO)? != SpherePoint::ZERO {
                    return Err(Error::InvalidMap(format!("f{i} does not fix 0")));
                }
            }
        }
        Ok(sys)
    }

    /// `f₀ = [2zw + z² : w²]`, `f₁ = [λzw : (z+w)²]`; requires `λ ∉ {0, 1}`.
    pub fn critical(lambda: Complex64, p0: f64) -> Result<Self> {
        if lambda == c(0.0, 0.0) || lambda == c(1.0, 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} is excluded (must avoid 0 and 1)"
            )));
        }
        let f0 = RationalMap::from_real(&[0.0, 2.0, 1.0], &[1.0, 0.0, 0.0])?;
        let f1 = RationalMap::new(
            vec![c(0.0, 0.0), lambda, c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)],
        )?;
        Self::assemble(
            Family::Critical,
            lambda,
            [f0, f1],
            p0,
            vec![
                (Anchor::Finite(c(0.0, 0.0)), "0", "common repelling fixed point"),
                (Anchor::Finite(c(-1.0, 0.0)), "-1", "superattracting fixed point of f0, pole of f1"),
                (Anchor::Infinity, "inf", "superattracting fixed point of f0, sent to 0 by f1"),
            ],
        )
    }

    /// `f₀ = [μz : w]`, `f₁ = [z : μw + z]` with `p₀ = p₁ = 1/2`.
    pub fn mobius(mu: Complex64) -> Result<Self> {
        if mu == c(0.0, 0.0) {
            return Err(Error::InvalidParameter("mu must be nonzero".into()));
        }
        let f0 = RationalMap::new(vec![c(0.0, 0.0), mu], vec![c(1.0, 0.0), c(0.0, 0.0)])?;
        let f1 = RationalMap::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![mu, c(1.0, 0.0)])?;
        Self::assemble(
            Family::Mobius,
            mu,
            [f0, f1],
            0.5,
            vec![(Anchor::Finite(c(0.0, 0.0)), "0", "common neutral-on-average fixed point")],
        )
    }

    /// `f₀ = g₂`, `f₁ = g₄` on `[0, 1]` inside the real line of the sphere;
    /// `p0` is the probability of `g₂`.
    pub fn logistic(p0: f64) -> Result<Self> {
        let g = |a: f64| RationalMap::from_real(&[0.0, a, -a], &[1.0, 0.0, 0.0]);
        Self::assemble(
            Family::Logistic,
            c(0.0, 0.0),
            [g(2.0)?, g(4.0)?],
            p0,
            vec![
                (Anchor::Finite(c(0.0, 0.0)), "0", "common repelling fixed point"),
                (Anchor::Finite(c(0.5, 0.0)), "1/2", "superattracting fixed point of g2, critical point of g4"),
                (Anchor::Finite(c(1.0, 0.0)), "1", "sent to 0 by both maps"),
            ],
        )
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `λ` (critical) or `μ` (Möbius); zero for the logistic system.
    pub fn parameter(&self) -> Complex64 {
        self.parameter
    }

    pub fn map(&self, symbol: u8) -> &RationalMap {
        &self.maps[symbol as usize & 1]
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        1.0 - self.p0
    }

    pub fn special_points(&self) -> &[SpecialPoint] {
        &self.special
    }

    pub fn atlas(&self) -> &ChartAtlas {
        &self.atlas
    }

    /// Copy with a different `p0` (Möbius is pinned to 1/2 by definition but
    /// still allowed to vary for experiments).
    pub fn with_p0(&self, p0: f64) -> Result<Self> {
        check_probability(p0)?;
        Ok(Self { p0, ..self.clone() })
    }

    /// Whether `p` is one of the distinguished points.
    pub fn is_special(&self, p: &SpherePoint) -> bool {
        self.special.iter().any(|s| s.anchor.to_sphere() == *p)
    }

    /// `p₀ ln|f₀′(0)| + p₁ ln|f₁′(0)|`.
    pub fn lyapunov_at_origin(&self) -> LyapunovAtOrigin {
        let zero = c(0.0, 0.0);
        let m0 = self.maps[0].planar_derivative(zero).map(|d| d.norm()).unwrap_or(0.0);
        let m1 = self.maps[1].planar_derivative(zero).map(|d| d.norm()).unwrap_or(0.0);
        let term = |p: f64, m: f64| if p == 0.0 { 0.0 } else { p * m.ln() };
        let value = term(self.p0, m0) + term(self.p1(), m1);
        LyapunovAtOrigin {
            value,
            superattracting: value == f64::NEG_INFINITY,
        }
    }

    pub fn check_hypotheses(&self) -> HypothesisReport {
        let lyap = self.lyapunov_at_origin();
        let lyapunov_positive = lyap.value > 0.0;
        let p0_above_half = self.p0 > 0.5;
        let par = self.parameter;
        match self.family {
            Family::Critical => {
                let in_disc = par.norm() < 1.0;
                let nonreal = par.im != 0.0;
                HypothesisReport {
                    family: self.family,
                    lambda_in_unit_disc: Some(in_disc),
                    lambda_nonreal: Some(nonreal),
                    lyapunov_positive,
                    lyapunov_value: lyap.value,
                    p0_above_half,
                    mu_outside_unit_disc: None,
                    density_theorem: Some(in_disc && nonreal),
                    intermittency_theorem: Some(in_disc && nonreal && lyapunov_positive && p0_above_half),
                }
            }
            Family::Mobius => {
                let ok = par.norm() > 1.0 && par.im != 0.0 && self.p0 == 0.5;
                HypothesisReport {
                    family: self.family,
                    lambda_in_unit_disc: None,
                    lambda_nonreal: Some(par.im != 0.0),
                    lyapunov_positive,
                    lyapunov_value: lyap.value,
                    p0_above_half,
                    mu_outside_unit_disc: Some(par.norm() > 1.0),
                    density_theorem: Some(ok),
                    intermittency_theorem: Some(ok),
                }
            }
            Family::Logistic => HypothesisReport {
                family: self.family,
                lambda_in_unit_disc: None,
                lambda_nonreal: None,
                lyapunov_positive,
                lyapunov_value: lyap.value,
                p0_above_half,
                mu_outside_unit_disc: None,
                density_theorem: None,
                intermittency_theorem: None,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovAtOrigin {
    pub value: f64,
    /// A multiplier at the origin is exactly zero; `value` is `−∞`.
    pub superattracting: bool,
}

/// Hypothesis flags of the density and intermittency theorems. Fields that
/// do not apply to a family are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub family: Family,
    pub lambda_in_unit_disc: Option<bool>,
    pub lambda_nonreal: Option<bool>,
    pub lyapunov_positive: bool,
    pub lyapunov_value: f64,
    pub p0_above_half: bool,
    pub mu_outside_unit_disc: Option<bool>,
    /// Dense semigroup orbits: `λ ∈ B(0,1) \ ℝ` (Möbius: `|μ| > 1`, `μ ∉ ℝ`).
    pub density_theorem: Option<bool>,
    /// `δ₀` is the only finite stationary measure and orbits are intermittent.
    pub intermittency_theorem: Option<bool>,
}

impl HypothesisReport {
    /// Human-readable regime label attached to every statistics report.
    pub fn regime(&self) -> &'static str {
        match (self.intermittency_theorem, self.lyapunov_value) {
            (Some(true), _) => "intermittent: theorem hypotheses hold",
            (_, v) if v < 0.0 => "attracting: origin attracting on average, concentration is not intermittency",
            (_, 0.0) => "neutral: vanishing exponent at the origin",
            (Some(false), _) => "outside theorem hypotheses",
            (None, _) => "no theorem attached to this family",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn mapping_table_is_exact() {
        let grid: Vec<Complex64> = (0..25)
            .map(|k| {
                let r = 0.1 + 0.175 * (k % 5) as f64;
                let a = (k / 5) as f64 * 1.1 + 0.3;
                Complex64::from_polar(r, a)
            })
            .collect();
        let z = SpherePoint::ZERO;
        let inf = SpherePoint::INFINITY;
        let m1 = SpherePoint::from_re_im(-1.0, 0.0);
        for lam in grid {
            let s = IfsSystem::critical(lam, 0.6).unwrap();
            assert_eq!(s.map(0).apply(&z).unwrap(), z);
            assert_eq!(s.map(0).apply(&inf).unwrap(), inf);
            assert_eq!(s.map(0).apply(&m1).unwrap(), m1);
            assert_eq!(s.map(1).apply(&z).unwrap(), z);
            assert_eq!(s.map(1).apply(&inf).unwrap(), z);
            assert_eq!(s.map(1).apply(&m1).unwrap(), inf);
            let labels: Vec<_> = s
                .special_points()
                .iter()
                .map(|p| (p.image_f0.as_str(), p.image_f1.as_str()))
                .collect();
            assert_eq!(labels, vec![("0", "0"), ("-1", "inf"), ("inf", "0")]);
        }
    }

    #[test]
    fn critical_parameter_checks() {
        assert!(IfsSystem::critical(c(1.0, 0.0), 0.5).is_err());
        assert!(IfsSystem::critical(c(0.0, 0.0), 0.5).is_err());
        assert!(IfsSystem::critical(c(0.5, 0.0), 1.5).is_err());
        let s = IfsSystem::critical(c(0.0, 0.5), 0.6).unwrap();
        assert_eq!(s.map(1).apply(&SpherePoint::INFINITY).unwrap(), SpherePoint::ZERO);
    }

    #[test]
    fn mobius_examples() {
        let s = IfsSystem::mobius(c(2.0, 0.0)).unwrap();
        let img = s.map(1).eval_affine(c(2.0, 0.0)).unwrap().to_complex().unwrap();
        assert_eq!(img, c(0.5, 0.0));
        assert_eq!(s.p0(), 0.5);
        let mu = Complex64::from_polar(1.2, std::f64::consts::FRAC_PI_4);
        let s = IfsSystem::mobius(mu).unwrap();
        for k in 0..2 {
            assert_eq!(s.map(k).apply(&SpherePoint::ZERO).unwrap(), SpherePoint::ZERO);
        }
        let d = s.map(1).planar_derivative(c(0.0, 0.0)).unwrap();
        assert!((d - c(1.0, 0.0) / mu).norm() < 1e-15);
        assert!(IfsSystem::mobius(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn logistic_examples() {
        let s = IfsSystem::logistic(0.6).unwrap();
        let at = |k: u8, x: f64| s.map(k).eval_affine(c(x, 0.0)).unwrap().to_complex().unwrap().re;
        assert_eq!(at(0, 0.5), 0.5);
        assert_eq!(at(1, 0.5), 1.0);
        assert_eq!(at(1, 1.0), 0.0);
        assert_eq!(at(0, 0.25), 0.375);
    }

    #[test]
    fn lyapunov_examples() {
        let s = IfsSystem::critical(c(0.5, 0.0), 0.5).unwrap();
        assert!(s.lyapunov_at_origin().value.abs() < 1e-15);
        let s = IfsSystem::critical(c(0.0, 0.5), 0.6).unwrap();
        assert!((s.lyapunov_at_origin().value - 0.2 * LN_2).abs() < 1e-15);
        for mu in [c(1.2, 0.7), c(-3.0, 0.1), c(0.2, 0.0)] {
            let v = IfsSystem::mobius(mu).unwrap().lyapunov_at_origin().value;
            assert!(v.abs() < 1e-15);
        }
        let s = IfsSystem::critical(c(0.0, 0.5), 1.0).unwrap();
        assert_eq!(s.lyapunov_at_origin().value, LN_2);
        assert!(!s.lyapunov_at_origin().superattracting);
    }

    #[test]
    fn hypothesis_reports() {
        let r = IfsSystem::critical(c(0.0, 0.5), 0.6).unwrap().check_hypotheses();
        assert_eq!(r.lambda_in_unit_disc, Some(true));
        assert_eq!(r.lambda_nonreal, Some(true));
        assert!(r.lyapunov_positive && r.p0_above_half);
        assert_eq!(r.density_theorem, Some(true));
        assert_eq!(r.intermittency_theorem, Some(true));
        assert!((r.lyapunov_value - 0.2 * LN_2).abs() < 1e-15);

        let r = IfsSystem::critical(c(0.5, 0.0), 0.6).unwrap().check_hypotheses();
        assert_eq!(r.lambda_nonreal, Some(false));
        assert_eq!(r.density_theorem, Some(false));

        let r = IfsSystem::critical(c(0.0, 0.9), 0.4).unwrap().check_hypotheses();
        assert!(!r.p0_above_half);

        let r = IfsSystem::critical(c(0.0, 0.5), 0.1).unwrap().check_hypotheses();
        assert!(r.lyapunov_value < 0.0);
        assert!(r.regime().starts_with("attracting"));
    }
}
