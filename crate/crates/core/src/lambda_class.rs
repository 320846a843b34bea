//! Arithmetic classification of `S = closure{2^m λ^n : m, n ∈ ℕ}`.
//!
//! Two diagnostics decide the class, each by continued-fraction detection at
//! floating point:
//!
//! * the angle `arg(λ)/2π` is rational `p/q` or not;
//! * the log-modulus ratio `ln|λ| / ln 2` equals `−m/n` with `m, n ≥ 0`
//!   (so that `2^m |λ|^n = 1`) or not.
//!
//! The four outcomes are read as: both irrational, `S` is dense in the plane;
//! rational angle only, `S` lies on the `q` half-lines `λ^q > 0` rotates
//! through; rational modulus only, `S` lies on concentric circles whose
//! log-radii step by `ln 2 / n`; both rational, `S` is discrete and
//! `2^m λ^n = 1` for the minimal pair. This table is our reading of the
//! four-case split; a λ whose angle and modulus are both irrational but
//! jointly dependent is still reported as dense. The classification is only
//! meaningful for `0 < |λ| ≤ 1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_QMAX: u64 = 50;
pub const DEFAULT_TOL: f64 = 1e-9;

/// The continued-fraction convergent `p/q` with `q ≤ qmax` and
/// `|x − p/q| ≤ tol`, in lowest terms.
pub fn rational_approx(x: f64, qmax: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() || qmax == 0 {
        return None;
    }
    // h_{-1}/k_{-1} = 1/0, h_{-2}/k_{-2} = 0/1
    let (mut h_prev, mut h) = (0i64, 1i64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a_i = a as i64;
        let h_next = a_i.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = (a_i as u64).checked_mul(k)?.checked_add(k_prev)?;
        if k_next > qmax {
            return None;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some((h, k));
        }
        let frac = rem - a;
        if frac <= 0.0 {
            return None;
        }
        rem = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class")]
pub enum LambdaClass {
    DenseInPlane,
    /// Minimal `k` with `λ^k > 0`.
    RadialLines { k: u64 },
    /// Spacing of consecutive log-radii.
    ConcentricCircles { log_step: f64 },
    /// Minimal `(m, n)` with `2^m λ^n = 1`.
    Discrete { m: u64, n: u64 },
}

impl LambdaClass {
    pub fn name(&self) -> &'static str {
        match self {
            LambdaClass::DenseInPlane => "DenseInPlane",
            LambdaClass::RadialLines { .. } => "RadialLines",
            LambdaClass::ConcentricCircles { .. } => "ConcentricCircles",
            LambdaClass::Discrete { .. } => "Discrete",
        }
    }
}

/// `arg(λ)/2π` as `p/q`, or irrational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleDiagnostic {
    pub turns: f64,
    pub rational: Option<(i64, u64)>,
}

/// Minimal `(m, n)` with `2^m |λ|^n = 1`, or independent moduli.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulusDiagnostic {
    pub log2_modulus: f64,
    pub relation: Option<(u64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub lambda: [f64; 2],
    pub class: LambdaClass,
    pub angle: AngleDiagnostic,
    pub modulus: ModulusDiagnostic,
}

pub fn classify_lambda(lambda: Complex64, qmax: u64, tol: f64) -> Result<Classification> {
    let r = lambda.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter("lambda must be nonzero and finite".into()));
    }
    if r > 1.0 + tol {
        return Err(Error::InvalidParameter(format!(
            "|lambda| = {r} > 1: the closure of 2^m lambda^n is then discrete without a unit relation"
        )));
    }
    let turns = lambda.arg() / std::f64::consts::TAU;
    let angle = AngleDiagnostic {
        turns,
        rational: rational_approx(turns, qmax, tol),
    };
    let log2_modulus = r.log2().min(0.0);
    let relation = rational_approx(-log2_modulus, qmax, tol).map(|(m, n)| (m as u64, n));
    let modulus = ModulusDiagnostic {
        log2_modulus,
        relation,
    };
    let class = match (angle.rational, relation) {
        (None, None) => LambdaClass::DenseInPlane,
        (Some((_, q)), None) => LambdaClass::RadialLines { k: q },
        (None, Some((_, n))) => LambdaClass::ConcentricCircles {
            log_step: std::f64::consts::LN_2 / n as f64,
        },
        (Some((_, q)), Some((m, n))) => {
            let big_n = n / gcd(n, q) * q;
            LambdaClass::Discrete {
                m: m * (big_n / n),
                n: big_n,
            }
        }
    };
    Ok(Classification {
        lambda: [lambda.re, lambda.im],
        class,
        angle,
        modulus,
    })
}

/// All `2^m λ^n` for `0 ≤ m ≤ mmax`, `0 ≤ n ≤ nmax` (n-major), skipping
/// values with modulus above `1e100`.
pub fn closure_cloud(lambda: Complex64, mmax: u32, nmax: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(((mmax + 1) * (nmax + 1)) as usize);
    let mut ln = Complex64::new(1.0, 0.0);
    for _ in 0..=nmax {
        for m in 0..=mmax {
            let v = ln * 2f64.powi(m as i32);
            if v.norm() <= 1e100 {
                out.push(v);
            }
        }
        ln *= lambda;
    }
    out
}
