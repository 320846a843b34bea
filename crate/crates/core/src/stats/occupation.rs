use serde::Serialize;

use crate::error::{Error, Result};
use crate::rds::{ensemble, run_orbit, Observer, StepEvent, SymbolStream};
use crate::sphere::SpherePoint;
use crate::stats::sojourn::Neighbourhood;
use crate::stats::{median, Summary};
use crate::systems::{HypothesisReport, IfsSystem};

/// Counts steps with `|z_n| < ε` and completed bursts, i.e. returns to
/// `W = B(0, ε) ∪ {|z| > r}` after leaving it.
#[derive(Clone, Debug)]
pub struct OccupationObserver {
    pub w: Neighbourhood,
    pub inside: u64,
    pub steps: u64,
    pub completed_bursts: u64,
    in_w: Option<bool>,
}

impl OccupationObserver {
    pub fn new(w: Neighbourhood) -> Self {
        Self {
            w,
            inside: 0,
            steps: 0,
            completed_bursts: 0,
            in_w: None,
        }
    }

    pub fn fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.inside as f64 / self.steps as f64
        }
    }
}

impl Observer for OccupationObserver {
    fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
        let near = ev.point.abs_lt(self.w.epsilon);
        self.inside += near as u64;
        self.steps += 1;
        let in_w = near || ev.point.abs_gt(self.w.r_far);
        if self.in_w == Some(false) && in_w {
            self.completed_bursts += 1;
        }
        self.in_w = Some(in_w);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OccupationReport {
    pub epsilon: f64,
    pub r_far: f64,
    pub n_steps: u64,
    pub fractions: Vec<f64>,
    pub completed_bursts: Vec<u64>,
    pub summary: Summary,
    pub hypotheses: HypothesisReport,
    pub regime: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OccupationRow {
    pub trial: u64,
    pub fraction: f64,
}

impl OccupationReport {
    pub fn rows(&self) -> Vec<OccupationRow> {
        self.fractions
            .iter()
            .enumerate()
            .map(|(i, &f)| OccupationRow {
                trial: i as u64,
                fraction: f,
            })
            .collect()
    }
}

/// Fraction of `0 ≤ n < N` with `|f_ω^n(z0)| < ε`, one independent symbol
/// stream per trial.
pub fn occupation_fraction(
    sys: &IfsSystem,
    z0: SpherePoint,
    w: Neighbourhood,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<OccupationReport> {
    if sys.is_special(&z0) {
        return Err(Error::DegenerateStart(format!("z0 = {z0} is a distinguished point")));
    }
    let per_trial = ensemble(trials, |i| {
        let mut obs = OccupationObserver::new(w);
        run_orbit(sys, z0, &mut SymbolStream::new(seed, i, sys.p0()), n, &mut [&mut obs])?;
        Ok((obs.fraction(), obs.completed_bursts))
    })?;
    let fractions: Vec<f64> = per_trial.iter().map(|t| t.0).collect();
    let hypotheses = sys.check_hypotheses();
    Ok(OccupationReport {
        epsilon: w.epsilon,
        r_far: w.r_far,
        n_steps: n,
        completed_bursts: per_trial.iter().map(|t| t.1).collect(),
        summary: Summary::of(&fractions),
        fractions,
        regime: hypotheses.regime().to_string(),
        hypotheses,
    })
}

/// Median occupation fraction over trials.
pub fn median_fraction(report: &OccupationReport) -> f64 {
    median(&report.fractions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn pure_f0_leaves_the_origin() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 1.0).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        let z0 = SpherePoint::from_re_im(0.01, 0.0);
        let short = occupation_fraction(&sys, z0, w, 100, 1, 1).unwrap();
        let long = occupation_fraction(&sys, z0, w, 10_000, 1, 1).unwrap();
        assert!(long.fractions[0] < short.fractions[0]);
        assert!(long.fractions[0] < 0.001);
    }

    #[test]
    fn distinguished_start_rejected() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.6).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        for z in [SpherePoint::ZERO, SpherePoint::INFINITY, SpherePoint::from_re_im(-1.0, 0.0)] {
            assert!(occupation_fraction(&sys, z, w, 10, 1, 1).is_err());
        }
    }

    #[test]
    fn attracting_regime_is_labelled() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.1).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        let r = occupation_fraction(&sys, SpherePoint::from_re_im(0.05, 0.01), w, 20_000, 4, 3).unwrap();
        assert!(r.summary.median > 0.99);
        assert!(r.regime.starts_with("attracting"));
        assert_eq!(r.rows().len(), 4);
    }
}
