use serde::Serialize;

use crate::error::{Error, Result};
use crate::rds::{continue_orbit, run_orbit, Mergeable, Observer, OrbitState, StepEvent, SymbolStream};
use crate::sphere::SpherePoint;
use crate::systems::IfsSystem;

/// Escape times `T₀ = 0 < T₁ < T₂ < …` of the alternation between the
/// neighbourhood `W` (odd indices leave `W`, even indices re-enter it),
/// with laminar durations `η_k = T_{2k−1} − T_{2k−2}` and burst durations
/// `ξ_k = T_{2k} − T_{2k−1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SojournRecord {
    pub n_steps: u64,
    pub escape_times: Vec<u64>,
    pub eta: Vec<u64>,
    pub xi: Vec<u64>,
    /// Length of the unfinished phase at the end of the run.
    pub eta_partial: u64,
    pub xi_partial: u64,
    /// Raw count of `n < n_steps` with `z_n ∈ W`.
    pub in_w_count: u64,
    /// No exit from `W` happened; the whole run is reported as `η₁`.
    pub no_alternation: bool,
}

impl SojournRecord {
    /// Builds the record from a membership sequence starting inside `W`.
    pub fn from_membership(membership: &[bool]) -> Result<Self> {
        let mut b = SojournBuilder::default();
        for &m in membership {
            b.push(m)?;
        }
        Ok(b.finish())
    }

    /// `(Σ η + η̃, Σ η + η̃ + Σ ξ + ξ̃)`: the two sides of the occupation
    /// identity as an integer fraction.
    pub fn decomposed_fraction(&self) -> (u64, u64) {
        let eta: u64 = self.eta.iter().sum::<u64>() + self.eta_partial;
        let xi: u64 = self.xi.iter().sum::<u64>() + self.xi_partial;
        (eta, eta + xi)
    }

    /// Expands the phases back into a membership sequence.
    pub fn membership(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.n_steps as usize);
        for k in 0..self.eta.len() {
            out.extend(std::iter::repeat_n(true, self.eta[k] as usize));
            if let Some(&x) = self.xi.get(k) {
                out.extend(std::iter::repeat_n(false, x as usize));
            }
        }
        if self.eta.len() > self.xi.len() {
            out.extend(std::iter::repeat_n(false, self.xi_partial as usize));
        } else {
            out.extend(std::iter::repeat_n(true, self.eta_partial as usize));
        }
        out
    }

    pub fn mean_eta(&self) -> Option<f64> {
        mean(&self.eta)
    }

    pub fn mean_xi(&self) -> Option<f64> {
        mean(&self.xi)
    }

    /// Rows `(k, T_{2k−1}, T_{2k}, η_k, ξ_k)`; `T_{2k}` and `ξ_k` are absent
    /// for an unfinished last burst.
    pub fn rows(&self) -> Vec<SojournRow> {
        (0..self.eta.len())
            .map(|i| SojournRow {
                k: i as u64 + 1,
                t_exit: self.escape_times.get(2 * i + 1).copied(),
                t_enter: self.escape_times.get(2 * i + 2).copied(),
                eta: self.eta[i],
                xi: self.xi.get(i).copied(),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SojournRow {
    pub k: u64,
    #[serde(rename = "T_2k-1")]
    pub t_exit: Option<u64>,
    #[serde(rename = "T_2k")]
    pub t_enter: Option<u64>,
    #[serde(rename = "eta_k")]
    pub eta: u64,
    #[serde(rename = "xi_k")]
    pub xi: Option<u64>,
}

fn mean(v: &[u64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64)
    }
}

/// Streaming construction of a [`SojournRecord`].
#[derive(Clone, Debug, Default)]
pub struct SojournBuilder {
    n: u64,
    in_w: bool,
    in_w_count: u64,
    times: Vec<u64>,
}

impl SojournBuilder {
    pub fn push(&mut self, member: bool) -> Result<()> {
        if self.n == 0 {
            if !member {
                return Err(Error::DegenerateStart("z_0 must lie in W".into()));
            }
            self.times.push(0);
            self.in_w = true;
        } else if member != self.in_w {
            self.times.push(self.n);
            self.in_w = member;
        }
        self.in_w_count += member as u64;
        self.n += 1;
        Ok(())
    }

    pub fn finish(self) -> SojournRecord {
        let t = &self.times;
        let mut eta = Vec::new();
        let mut xi = Vec::new();
        for k in 1..t.len() {
            let d = t[k] - t[k - 1];
            if k % 2 == 1 {
                eta.push(d);
            } else {
                xi.push(d);
            }
        }
        let tail = self.n - t.last().copied().unwrap_or(0);
        let no_alternation = t.len() <= 1;
        let (eta_partial, xi_partial) = if no_alternation {
            if self.n > 0 {
                eta.push(self.n);
            }
            (0, 0)
        } else if self.in_w {
            (tail, 0)
        } else {
            (0, tail)
        };
        SojournRecord {
            n_steps: self.n,
            escape_times: self.times,
            eta,
            xi,
            eta_partial,
            xi_partial,
            in_w_count: self.in_w_count,
            no_alternation,
        }
    }
}

/// `W = B(0, ε) ∪ {|z| > r} ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbourhood {
    pub epsilon: f64,
    pub r_far: f64,
}

impl Neighbourhood {
    pub fn new(epsilon: f64, r_far: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0 && r_far > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < epsilon < 1 < r_far, got epsilon = {epsilon}, r_far = {r_far}"
            )));
        }
        Ok(Self { epsilon, r_far })
    }

    pub fn contains(&self, p: &crate::chart::OrbitPoint) -> bool {
        p.abs_lt(self.epsilon) || p.abs_gt(self.r_far)
    }
}

pub struct SojournObserver {
    pub w: Neighbourhood,
    pub builder: SojournBuilder,
}

impl SojournObserver {
    pub fn new(w: Neighbourhood) -> Self {
        Self {
            w,
            builder: SojournBuilder::default(),
        }
    }
}

impl Observer for SojournObserver {
    fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
        self.builder
            .push(self.w.contains(ev.point))
            .map_err(|e| e.to_string())
    }
}

/// Alternation record of one orbit of `n` steps with respect to `W`.
pub fn sojourn_decomposition(
    sys: &IfsSystem,
    z0: SpherePoint,
    w: Neighbourhood,
    n: u64,
    stream: &mut SymbolStream,
) -> Result<SojournRecord> {
    let start = sys.atlas().localize(z0);
    if !w.contains(&start) {
        return Err(Error::DegenerateStart(format!("z0 = {z0} is not in W")));
    }
    let mut obs = SojournObserver::new(w);
    run_orbit(sys, z0, stream, n, &mut [&mut obs])?;
    Ok(obs.builder.finish())
}

/// Difference between the raw occupation of `W` and the decomposed
/// fraction, as an exact rational `(raw·den − num·n) / (n·den)`; zero for a
/// consistent record.
pub fn occupation_identity_check(record: &SojournRecord) -> i128 {
    let (num, den) = record.decomposed_fraction();
    record.in_w_count as i128 * den as i128 - num as i128 * record.n_steps as i128
}

struct LaminarObserver {
    w: Neighbourhood,
    in_w: bool,
    start: u64,
    eta: Vec<u64>,
}

impl Observer for LaminarObserver {
    fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
        let member = self.w.contains(ev.point);
        if member != self.in_w {
            if self.in_w {
                self.eta.push(ev.step - self.start);
            }
            self.start = ev.step;
            self.in_w = member;
        }
        Ok(())
    }
}

/// The first `count` completed laminar durations `η_k` of one orbit, without
/// storing the escape times. Fails if `max_steps` is exhausted first.
pub fn laminar_durations(
    sys: &IfsSystem,
    z0: SpherePoint,
    w: Neighbourhood,
    count: usize,
    max_steps: u64,
    stream: &mut SymbolStream,
) -> Result<Vec<u64>> {
    let mut state = OrbitState::new(sys, z0);
    if !w.contains(&state.point) {
        return Err(Error::DegenerateStart(format!("z0 = {z0} is not in W")));
    }
    let mut obs = LaminarObserver {
        w,
        in_w: true,
        start: 0,
        eta: Vec::with_capacity(count),
    };
    const CHUNK: u64 = 1 << 20;
    while obs.eta.len() < count {
        if state.step >= max_steps {
            return Err(Error::UndefinedTail(format!(
                "only {} of {count} laminar phases completed within {max_steps} steps",
                obs.eta.len()
            )));
        }
        let chunk = CHUNK.min(max_steps - state.step);
        continue_orbit(sys, &mut state, stream, chunk, &mut [&mut obs])?;
    }
    obs.eta.truncate(count);
    Ok(obs.eta)
}

/// Durations merged across trials, in trial order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SojournPool {
    pub eta: Vec<u64>,
    pub xi: Vec<u64>,
}

impl Mergeable for SojournPool {
    fn merge(&mut self, other: Self) {
        self.eta.extend(other.eta);
        self.xi.extend(other.xi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn laminar_durations_match_full_record() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.6).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        let z0 = SpherePoint::from_re_im(0.05, 0.01);
        let rec = sojourn_decomposition(&sys, z0, w, 200_000, &mut SymbolStream::new(3, 0, 0.6)).unwrap();
        assert!(rec.eta.len() > 5);
        let k = rec.eta.len() - 1;
        let eta = laminar_durations(&sys, z0, w, k, 200_000, &mut SymbolStream::new(3, 0, 0.6)).unwrap();
        assert_eq!(eta, rec.eta[..k]);
        assert!(laminar_durations(&sys, z0, w, 1_000_000, 1000, &mut SymbolStream::new(3, 0, 0.6)).is_err());
    }

    #[test]
    fn synthetic_trace() {
        let r = SojournRecord::from_membership(&[true, true, false, true]).unwrap();
        assert_eq!(r.escape_times, vec![0, 2, 3]);
        assert_eq!(r.eta, vec![2]);
        assert_eq!(r.xi, vec![1]);
        assert_eq!(r.eta_partial, 1);
        assert_eq!(r.decomposed_fraction(), (3, 4));
        assert_eq!(r.in_w_count, 3);
        assert_eq!(occupation_identity_check(&r), 0);
        assert_eq!(r.membership(), vec![true, true, false, true]);
    }

    #[test]
    fn entirely_inside() {
        let r = SojournRecord::from_membership(&[true; 17]).unwrap();
        assert!(r.no_alternation);
        assert_eq!(r.eta, vec![17]);
        assert!(r.xi.is_empty());
        assert_eq!(r.decomposed_fraction(), (17, 17));
        assert_eq!(occupation_identity_check(&r), 0);
        assert_eq!(r.membership(), vec![true; 17]);
    }

    #[test]
    fn start_outside_rejected() {
        assert!(SojournRecord::from_membership(&[false, true]).is_err());
        assert!(Neighbourhood::new(1.5, 10.0).is_err());
        assert!(Neighbourhood::new(0.1, 0.5).is_err());
    }

    struct Membership(Neighbourhood, Vec<bool>);
    impl Observer for Membership {
        fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
            self.1.push(self.0.contains(ev.point));
            Ok(())
        }
    }

    #[test]
    fn orbit_records_reconstruct_membership() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.6).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        let z0 = SpherePoint::from_re_im(0.05, 0.01);
        for seed in 0..5 {
            let mut raw = Membership(w, Vec::new());
            run_orbit(&sys, z0, &mut SymbolStream::new(seed, 0, 0.6), 200_000, &mut [&mut raw]).unwrap();
            let rec = sojourn_decomposition(&sys, z0, w, 200_000, &mut SymbolStream::new(seed, 0, 0.6)).unwrap();
            assert_eq!(occupation_identity_check(&rec), 0);
            assert_eq!(rec.membership(), raw.1);
            assert!(rec.eta.iter().chain(&rec.xi).all(|&d| d >= 1));
            assert!(rec.escape_times.windows(2).all(|t| t[0] < t[1]));
            assert!(!rec.xi.is_empty());
        }
    }

    #[test]
    fn start_outside_w_is_an_error() {
        let sys = IfsSystem::critical(Complex64::new(0.0, 0.5), 0.6).unwrap();
        let w = Neighbourhood::new(0.1, 10.0).unwrap();
        let r = sojourn_decomposition(&sys, SpherePoint::from_re_im(0.5, 0.0), w, 10, &mut SymbolStream::new(0, 0, 0.6));
        assert!(matches!(r, Err(Error::DegenerateStart(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn identity_and_reconstruction(tail in proptest::collection::vec(any::<bool>(), 0..300)) {
                let mut m = vec![true];
                m.extend(tail);
                let r = SojournRecord::from_membership(&m).unwrap();
                prop_assert_eq!(occupation_identity_check(&r), 0);
                prop_assert_eq!(r.membership(), m);
            }
        }
    }
}
