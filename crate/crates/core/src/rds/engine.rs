use num_complex::Complex64;
use rayon::prelude::*;

use crate::chart::{Anchor, OrbitPoint, ScaledComplex};
use crate::error::{Error, Result};
use crate::rds::stream::SymbolStream;
use crate::sphere::SpherePoint;
use crate::systems::{Family, IfsSystem};

pub const DEFAULT_HISTORY: usize = 64;

#[derive(Clone, Debug)]
pub struct OrbitState {
    pub step: u64,
    pub point: OrbitPoint,
    /// Sum of `ln` spherical derivative norms along the orbit.
    pub log_tangent: f64,
    // ring buffer: symbol of step n at n % len; `head` tracks that index
    history: Vec<u8>,
    head: usize,
}

impl OrbitState {
    pub fn new(sys: &IfsSystem, z0: SpherePoint) -> Self {
        Self::with_history(sys, z0, DEFAULT_HISTORY)
    }

    pub fn with_history(sys: &IfsSystem, z0: SpherePoint, cap: usize) -> Self {
        Self {
            step: 0,
            point: sys.atlas().localize(z0),
            log_tangent: 0.0,
            history: vec![0; cap],
            head: 0,
        }
    }

    /// The most recent symbols, oldest first.
    pub fn symbol_history(&self) -> impl Iterator<Item = u8> + '_ {
        let cap = self.history.len();
        let n = (self.step as usize).min(cap);
        let start = if n == cap && cap > 0 { self.step as usize % cap } else { 0 };
        (0..n).map(move |i| self.history[(start + i) % cap])
    }

    pub fn sphere_point(&self) -> SpherePoint {
        self.point.to_sphere()
    }
}

/// Interval systems live on `[0, 1]`; round-off outside is reflected back so
/// the orbit cannot leak to `−∞`.
fn fold_interval(p: OrbitPoint) -> OrbitPoint {
    match p {
        OrbitPoint::Regular(sp) => {
            let x = sp.to_complex().map(|z| z.re).unwrap_or(1.0);
            let x = if x < 0.0 {
                -x
            } else if x > 1.0 {
                (2.0 - x).max(0.0)
            } else {
                x
            };
            OrbitPoint::Regular(SpherePoint::from_re_im(x, 0.0))
        }
        OrbitPoint::Local {
            anchor,
            index,
            offset,
        } => {
            let m = offset.mantissa();
            let re = match anchor {
                Anchor::Finite(a) if a.re <= 0.0 => m.re.abs(),
                Anchor::Finite(a) if a.re >= 1.0 => -m.re.abs(),
                _ => m.re,
            };
            let offset = ScaledComplex::from_parts(Complex64::new(re, 0.0), offset.exponent());
            OrbitPoint::Local {
                anchor,
                index,
                offset,
            }
        }
    }
}

pub(crate) fn advance(sys: &IfsSystem, state: &mut OrbitState, symbol: u8) -> Result<()> {
    let (next, ln_d) = sys.atlas().step(symbol as usize, sys.map(symbol), &state.point)?;
    state.point = if sys.family() == Family::Logistic {
        fold_interval(next)
    } else {
        next
    };
    state.log_tangent += ln_d;
    if let Some(slot) = state.history.get_mut(state.head) {
        *slot = symbol;
        state.head += 1;
        if state.head == state.history.len() {
            state.head = 0;
        }
    }
    state.step += 1;
    Ok(())
}

/// One step of the skew product `(ω, z) ↦ (σω, f_{ω₀}(z))`.
pub fn step_skew(sys: &IfsSystem, state: &OrbitState, symbol: u8) -> Result<OrbitState> {
    let mut s = state.clone();
    advance(sys, &mut s, symbol)?;
    Ok(s)
}

/// Event delivered before the step from `z_n` with symbol `ω_n`.
#[derive(Clone, Copy, Debug)]
pub struct StepEvent<'a> {
    pub step: u64,
    pub symbol: u8,
    pub point: &'a OrbitPoint,
}

pub trait Observer {
    fn observe(&mut self, event: &StepEvent<'_>) -> std::result::Result<(), String>;
}

/// Reduction of per-trial observer state. Merging in trial order is the
/// deterministic reduction used by [`merge_in_order`].
pub trait Mergeable {
    fn merge(&mut self, other: Self);
}

pub fn merge_in_order<T: Mergeable>(parts: Vec<T>) -> Option<T> {
    let mut it = parts.into_iter();
    let mut acc = it.next()?;
    for p in it {
        acc.merge(p);
    }
    Some(acc)
}

/// Runs `steps` applications from `z0`; every observer sees
/// `(n, ω_n, z_n)` for `n = 0, …, steps−1`.
pub fn run_orbit(
    sys: &IfsSystem,
    z0: SpherePoint,
    stream: &mut SymbolStream,
    steps: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<OrbitState> {
    let mut state = OrbitState::new(sys, z0);
    continue_orbit(sys, &mut state, stream, steps, observers)?;
    Ok(state)
}

/// Extends an existing state by `steps` further applications.
pub fn continue_orbit(
    sys: &IfsSystem,
    state: &mut OrbitState,
    stream: &mut SymbolStream,
    steps: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<()> {
    for _ in 0..steps {
        let symbol = stream.next_symbol();
        let ev = StepEvent {
            step: state.step,
            symbol,
            point: &state.point,
        };
        for o in observers.iter_mut() {
            o.observe(&ev).map_err(|message| Error::Observer {
                step: state.step,
                message,
            })?;
        }
        advance(sys, state, symbol)?;
    }
    Ok(())
}

/// Re-runs a recorded symbol sequence from `z0`.
pub fn replay(sys: &IfsSystem, z0: SpherePoint, symbols: &[u8]) -> Result<OrbitState> {
    let mut state = OrbitState::with_history(sys, z0, symbols.len());
    for &s in symbols {
        advance(sys, &mut state, s)?;
    }
    Ok(state)
}

/// `log_tangent / n`.
pub fn finite_time_lyapunov(state: &OrbitState) -> Result<f64> {
    if state.step == 0 {
        return Err(Error::NoSteps);
    }
    Ok(state.log_tangent / state.step as f64)
}

/// Applies `word[0]` first, then `word[1]`, and so on.
pub fn word_apply(sys: &IfsSystem, word: &[u8], z: SpherePoint) -> Result<SpherePoint> {
    word.iter().try_fold(z, |p, &s| sys.map(s).apply(&p))
}

/// Runs `trial(i)` for `i = 0, …, trials−1` in parallel and returns the
/// results in trial order.
pub fn ensemble<T, F>(trials: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..trials).into_par_iter().map(&trial).collect()
}

/// Records `(step, symbol, re, im, |z|, chordal distance to 0)` rows.
#[derive(Clone, Debug, Default)]
pub struct TraceObserver {
    pub rows: Vec<TraceRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TraceRow {
    pub step: u64,
    pub symbol: u8,
    pub re: f64,
    pub im: f64,
    pub abs_z: f64,
    pub chordal_to_zero: f64,
}

impl Observer for TraceObserver {
    fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
        let sp = ev.point.to_sphere();
        let (re, im) = match sp.to_complex() {
            Some(z) => (z.re, z.im),
            None => (f64::INFINITY, f64::INFINITY),
        };
        self.rows.push(TraceRow {
            step: ev.step,
            symbol: ev.symbol,
            re,
            im,
            abs_z: ev.point.ln_abs().exp(),
            chordal_to_zero: ev.point.chordal_to_zero(),
        });
        Ok(())
    }
}

impl Mergeable for TraceObserver {
    fn merge(&mut self, other: Self) {
        self.rows.extend(other.rows);
    }
}
