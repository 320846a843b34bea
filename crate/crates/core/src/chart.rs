//! Extended-range local charts around distinguished points.
//!
//! Orbits of the critical system approach `0`, `−1` and `∞` superexponentially
//! (a run of `N` squarings puts the orbit at distance `δ^(2^N)`). In plain
//! binary64 homogeneous coordinates such a point collapses onto the
//! distinguished point after a handful of steps and the orbit is absorbed
//! forever. Here a point near an anchor `s` is stored by its local
//! coordinate `t` (`z − s`, or `1/z` at `∞`) as a complex mantissa with an
//! unbounded binary exponent, and maps between anchors are evaluated as
//! `t ↦ t^k · N(t)/D(t)` with exact local polynomials.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::{cdiv, normalize, RationalMap, SpherePoint};

/// Complex number `mant · 2^exp` with `max(|re|,|im|)` of the mantissa in
/// `[0.5, 1)`, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    mant: Complex64,
    exp: i64,
}

fn ldexp(x: f64, mut n: i64) -> f64 {
    if (-1022..=1023).contains(&n) {
        return x * f64::from_bits(((n + 1023) as u64) << 52);
    }
    let mut x = x;
    while n > 1000 {
        x *= 2f64.powi(1000);
        n -= 1000;
    }
    while n < -1000 {
        x *= 2f64.powi(-1000);
        n += 1000;
    }
    x * 2f64.powi(n as i32)
}

/// Binary exponent `e` with `x = m·2^e`, `|m| ∈ [0.5, 1)`.
fn frexp_exp(x: f64) -> i64 {
    let x = x.abs();
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        frexp_exp(x * 2f64.powi(64)) - 64
    } else {
        raw - 1022
    }
}

const MIN_EXP: i64 = -(1 << 62);

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mant: Complex64::new(0.0, 0.0),
        exp: 0,
    };

    pub fn from_complex(c: Complex64) -> Self {
        Self { mant: c, exp: 0 }.renormalized()
    }

    fn renormalized(self) -> Self {
        let m = self.mant.re.abs().max(self.mant.im.abs());
        if m == 0.0 {
            return Self::ZERO;
        }
        let e = frexp_exp(m);
        let exp = self.exp.saturating_add(e);
        // An offset of 2^(-2^62) would need ~2^62 steps to leave the anchor
        // again; it is treated as the anchor itself.
        if exp < MIN_EXP {
            return Self::ZERO;
        }
        Self {
            mant: Complex64::new(ldexp(self.mant.re, -e), ldexp(self.mant.im, -e)),
            exp,
        }
    }

    /// `mant · 2^exp`.
    pub fn from_parts(mant: Complex64, exp: i64) -> Self {
        Self { mant, exp }.renormalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    /// Nearest binary64 value; underflows to zero and overflows to `inf`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.exp < -1200 {
            return Complex64::new(0.0, 0.0);
        }
        if self.exp > 1200 {
            return Complex64::new(self.mant.re * f64::INFINITY, self.mant.im * f64::INFINITY);
        }
        Complex64::new(ldexp(self.mant.re, self.exp), ldexp(self.mant.im, self.exp))
    }

    /// `ln |self|`; `−∞` at zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.norm().ln() + self.exp as f64 * std::f64::consts::LN_2
        }
    }

    /// `|self| < r` for `r > 0`, deciding by exponents where possible.
    pub fn abs_lt(&self, r: f64) -> bool {
        if self.is_zero() {
            return true;
        }
        // |mant| lies in [0.5, √2)
        let e = frexp_exp(r);
        if self.exp < e - 1 {
            return true;
        }
        if self.exp > e + 1 {
            return false;
        }
        self.ln_abs() < r.ln()
    }

    pub fn mul(&self, other: &ScaledComplex) -> Self {
        Self {
            mant: self.mant * other.mant,
            exp: self.exp.saturating_add(other.exp),
        }
        .renormalized()
    }

    pub fn mul_complex(&self, c: Complex64) -> Self {
        Self {
            mant: self.mant * c,
            exp: self.exp,
        }
        .renormalized()
    }

    pub fn powu(&self, k: u32) -> Self {
        let mut acc = Self::from_complex(Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `1/self`; zero maps to zero (callers never invert zero).
    pub fn recip(&self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self {
            mant: cdiv(Complex64::new(1.0, 0.0), self.mant),
            exp: -self.exp,
        }
        .renormalized()
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }
}

/// A distinguished point carrying a local chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    Finite(Complex64),
    Infinity,
}

impl Anchor {
    pub fn to_sphere(&self) -> SpherePoint {
        match self {
            Anchor::Finite(s) => SpherePoint::finite(*s),
            Anchor::Infinity => SpherePoint::INFINITY,
        }
    }

    /// Local coordinate of a sphere point, if it lies in this chart's domain.
    fn coordinate(&self, p: &SpherePoint) -> Option<Complex64> {
        let (z, w) = (p.num(), p.den());
        match self {
            Anchor::Finite(s) => {
                if p.is_infinity() {
                    None
                } else {
                    Some(cdiv(z - s * w, w))
                }
            }
            Anchor::Infinity => {
                if z.norm() == 0.0 {
                    None
                } else {
                    Some(cdiv(w, z))
                }
            }
        }
    }

    /// Sphere point from a (binary64-representable) local coordinate.
    fn point_at(&self, t: Complex64) -> SpherePoint {
        match self {
            Anchor::Finite(s) => SpherePoint::finite(s + t),
            Anchor::Infinity => {
                normalize(Complex64::new(1.0, 0.0), t).unwrap_or(SpherePoint::INFINITY)
            }
        }
    }

    /// `ln(1 + |x|²)` where `x` is `s + t` or, at `∞`, `t`: the log of the
    /// spherical metric weight of the chart.
    fn log_metric_weight(&self, t: Complex64) -> f64 {
        match self {
            Anchor::Finite(s) => (s + t).norm_sqr().ln_1p(),
            Anchor::Infinity => t.norm_sqr().ln_1p(),
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Finite(s) => write!(f, "{}{:+}i", s.re, s.im),
            Anchor::Infinity => write!(f, "∞"),
        }
    }
}

fn poly_eval(c: &[Complex64], t: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * t + a)
}

fn poly_deriv_eval(c: &[Complex64], t: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (j, a)| acc * t + a * j as f64)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `Σ c_j X^j Y^(d-j)` with `X`, `Y` given as polynomials in `t`.
fn substitute(c: &[Complex64], x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let one = vec![Complex64::new(1.0, 0.0)];
    let mut xp = vec![one.clone()];
    let mut yp = vec![one];
    for k in 1..=d {
        xp.push(poly_mul(&xp[k - 1], x));
        yp.push(poly_mul(&yp[k - 1], y));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
    for (j, a) in c.iter().enumerate() {
        let term = poly_mul(&xp[j], &yp[d - j]);
        for (i, v) in term.iter().enumerate() {
            out[i] += a * v;
        }
    }
    out
}

/// The germ of one map between two anchors: `u = t^k · N(t) / D(t)` with
/// `N(0) ≠ 0`, `D(0) ≠ 0`.
#[derive(Clone, Debug)]
pub struct LocalMap {
    pub target: usize,
    pub order: u32,
    numer: Vec<Complex64>,
    denom: Vec<Complex64>,
    // N(0)/D(0) and ln|k N(0)/D(0)|
    lead: Complex64,
    ln_lead: f64,
}

/// Below `2^DEEP_EXP` the germ is `lead · t^k` to full binary64 precision.
const DEEP_EXP: i64 = -64;

impl LocalMap {
    /// Builds the germ of `f` at `from`, provided `f(from) = to`.
    pub fn new(f: &RationalMap, from: Anchor, to: Anchor, target: usize) -> Option<Self> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        // Homogeneous source point as polynomials in t.
        let (x, y) = match from {
            Anchor::Finite(s) => (vec![s, one], vec![one]),
            Anchor::Infinity => (vec![one], vec![zero, one]),
        };
        let p = substitute(f.numerator(), &x, &y);
        let q = substitute(f.denominator(), &x, &y);
        let (num, den) = match to {
            Anchor::Finite(s) => (
                p.iter().zip(&q).map(|(a, b)| a - s * b).collect::<Vec<_>>(),
                q,
            ),
            Anchor::Infinity => (q, p),
        };
        let scale = num
            .iter()
            .chain(den.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let tol = 1e-13 * scale;
        if den[0].norm() <= tol || num[0].norm() > tol {
            return None;
        }
        let k = num.iter().position(|c| c.norm() > tol)?;
        let lead = cdiv(num[k], den[0]);
        Some(Self {
            target,
            order: k as u32,
            numer: num[k..].to_vec(),
            denom: den,
            lead,
            ln_lead: (lead * k as f64).norm().ln(),
        })
    }

    /// Image offset and `ln |du/dt|`.
    fn eval(&self, t: &ScaledComplex) -> (ScaledComplex, f64) {
        if t.exp < DEEP_EXP {
            let u = if self.order == 1 {
                t.mul_complex(self.lead)
            } else {
                t.powu(self.order).mul_complex(self.lead)
            };
            let mut ln_deriv = self.ln_lead;
            if self.order > 1 && !t.is_zero() {
                ln_deriv += (self.order - 1) as f64 * t.ln_abs();
            } else if self.order > 1 {
                ln_deriv = f64::NEG_INFINITY;
            }
            return (u, ln_deriv);
        }
        let tf = t.to_complex();
        let n = poly_eval(&self.numer, tf);
        let d = poly_eval(&self.denom, tf);
        let ratio = cdiv(n, d);
        let u = t.powu(self.order).mul_complex(ratio);
        // d/dt [t^k R] = t^(k-1) (k R + t R').
        let dn = poly_deriv_eval(&self.numer, tf);
        let dd = poly_deriv_eval(&self.denom, tf);
        let dratio = cdiv(dn * d - n * dd, d * d);
        let inner = ratio * self.order as f64 + tf * dratio;
        let mut ln_deriv = inner.norm().ln();
        if self.order > 1 {
            ln_deriv += (self.order - 1) as f64 * t.ln_abs();
        }
        (u, ln_deriv)
    }
}

/// A point along an orbit: either an ordinary sphere point or a point held
/// in the extended-range chart of an anchor.
#[derive(Clone, Copy, Debug)]
pub enum OrbitPoint {
    Regular(SpherePoint),
    Local {
        anchor: Anchor,
        index: u8,
        offset: ScaledComplex,
    },
}

impl OrbitPoint {
    /// Nearest binary64 sphere point (offsets below the binary64 range
    /// collapse onto the anchor).
    pub fn to_sphere(&self) -> SpherePoint {
        match self {
            OrbitPoint::Regular(p) => *p,
            OrbitPoint::Local { anchor, offset, .. } => anchor.point_at(offset.to_complex()),
        }
    }

    /// `ln |z|`, exact across the extended range; `+∞` at `∞`.
    pub fn ln_abs(&self) -> f64 {
        match self {
            OrbitPoint::Regular(p) => p.abs().ln(),
            OrbitPoint::Local { anchor, offset, .. } => match anchor {
                Anchor::Finite(s) if *s == Complex64::new(0.0, 0.0) => offset.ln_abs(),
                Anchor::Finite(s) => (s + offset.to_complex()).norm().ln(),
                Anchor::Infinity => -offset.ln_abs(),
            },
        }
    }

    /// `|z| < radius`, with `∞` never inside.
    pub fn abs_lt(&self, radius: f64) -> bool {
        match self {
            OrbitPoint::Local {
                anchor: Anchor::Finite(s),
                offset,
                ..
            } if *s == Complex64::new(0.0, 0.0) => offset.abs_lt(radius),
            _ => self.ln_abs() < radius.ln(),
        }
    }

    /// `|z| > radius` (`∞` counts).
    pub fn abs_gt(&self, radius: f64) -> bool {
        match self {
            OrbitPoint::Local {
                anchor: Anchor::Finite(s),
                offset,
                ..
            } if *s == Complex64::new(0.0, 0.0) => !offset.abs_lt(radius) && self.ln_abs() > radius.ln(),
            OrbitPoint::Local {
                anchor: Anchor::Infinity,
                offset,
                ..
            } if radius > 0.0 => offset.abs_lt(1.0 / radius),
            _ => self.ln_abs() > radius.ln(),
        }
    }

    /// Chordal distance to `0`, `2|z|/√(1+|z|²)`.
    pub fn chordal_to_zero(&self) -> f64 {
        let l = self.ln_abs();
        if l == f64::INFINITY {
            2.0
        } else if l > 20.0 {
            // 1/|z| tiny: 2/√(1+1/|z|²)
            let inv = (-l).exp();
            2.0 / (1.0 + inv * inv).sqrt()
        } else {
            let r = l.exp();
            2.0 * r / (1.0 + r * r).sqrt()
        }
    }

    /// Exactly on an anchor (zero offset).
    pub fn is_anchor(&self) -> bool {
        matches!(self, OrbitPoint::Local { offset, .. } if offset.is_zero())
    }

    /// Real part of the affine value (`±inf` at `∞`), for interval systems.
    pub fn re(&self) -> f64 {
        self.to_sphere()
            .to_complex()
            .map(|z| z.re)
            .unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for OrbitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitPoint::Regular(p) => write!(f, "{p}"),
            OrbitPoint::Local { anchor, offset, .. } => write!(
                f,
                "{anchor} + ({}{:+}i)·2^{}",
                offset.mantissa().re,
                offset.mantissa().im,
                offset.exponent()
            ),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct DeepGerm {
    target: usize,
    order: u32,
    lead: Complex64,
    ln_const: f64,
}

/// Anchors, chart radius and the germ table for a pair of maps.
#[derive(Clone, Debug)]
pub struct ChartAtlas {
    anchors: Vec<Anchor>,
    radius: f64,
    // offsets with a smaller binary exponent are inside the radius
    inner_exp: i64,
    base_weight: Vec<f64>,
    // deep[map * anchors + anchor]: the germ's leading term with the chart
    // weights folded in
    deep: Vec<Option<DeepGerm>>,
    // germs[map][anchor]
    germs: Vec<Vec<Option<LocalMap>>>,
}

impl ChartAtlas {
    /// Germs are built for every (map, anchor) pair whose image is again an
    /// anchor; other pairs fall back to ordinary evaluation.
    pub fn new(maps: &[&RationalMap], anchors: Vec<Anchor>, radius: f64) -> Self {
        assert!(anchors.len() < u8::MAX as usize);
        let germs: Vec<Vec<Option<LocalMap>>> = maps
            .iter()
            .map(|f| {
                anchors
                    .iter()
                    .map(|a| {
                        let img = f.apply(&a.to_sphere()).ok()?;
                        let (ti, to) = anchors
                            .iter()
                            .enumerate()
                            .find(|(_, b)| b.to_sphere() == img)?;
                        LocalMap::new(f, *a, *to, ti)
                    })
                    .collect()
            })
            .collect();
        let base_weight: Vec<f64> = anchors
            .iter()
            .map(|a| a.log_metric_weight(Complex64::new(0.0, 0.0)))
            .collect();
        let deep = germs
            .iter()
            .flat_map(|row: &Vec<Option<LocalMap>>| {
                row.iter().enumerate().map(|(i, g)| {
                    g.as_ref().map(|g| DeepGerm {
                        target: g.target,
                        order: g.order,
                        lead: g.lead,
                        ln_const: g.ln_lead + base_weight[i] - base_weight[g.target],
                    })
                })
            })
            .collect();
        Self {
            base_weight,
            deep,
            anchors,
            inner_exp: frexp_exp(radius) - 1,
            radius,
            germs,
        }
    }

    /// `ln(1 + |x|²)` at the point `offset` of chart `index`; below `2^-60`
    /// the offset no longer changes it in binary64.
    fn weight(&self, index: usize, offset: &ScaledComplex) -> f64 {
        if offset.exp < -60 {
            self.base_weight[index]
        } else {
            self.anchors[index].log_metric_weight(offset.to_complex())
        }
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn germ(&self, map: usize, anchor: usize) -> Option<&LocalMap> {
        self.germs.get(map)?.get(anchor)?.as_ref()
    }

    /// Moves a sphere point into an anchor chart when it lies within the
    /// chart radius.
    pub fn localize(&self, p: SpherePoint) -> OrbitPoint {
        for (i, a) in self.anchors.iter().enumerate() {
            if let Some(t) = a.coordinate(&p) {
                if t.norm() < self.radius {
                    return OrbitPoint::Local {
                        anchor: *a,
                        index: i as u8,
                        offset: ScaledComplex::from_complex(t),
                    };
                }
            }
        }
        OrbitPoint::Regular(p)
    }

    fn local(&self, index: usize, offset: ScaledComplex) -> OrbitPoint {
        let anchor = self.anchors[index];
        if offset.exp < self.inner_exp || offset.abs_lt(self.radius) {
            OrbitPoint::Local {
                anchor,
                index: index as u8,
                offset,
            }
        } else {
            self.localize(anchor.point_at(offset.to_complex()))
        }
    }

    /// One application of `maps[map]`; returns the image and
    /// `ln` of the spherical derivative norm at the source point.
    pub fn step(&self, map_index: usize, f: &RationalMap, p: &OrbitPoint) -> Result<(OrbitPoint, f64)> {
        if let OrbitPoint::Local { index, offset, .. } = p {
            if offset.exp < DEEP_EXP {
                if let Some(d) = &self.deep[map_index * self.anchors.len() + *index as usize] {
                    let (u, ln_sph) = if d.order == 1 {
                        (offset.mul_complex(d.lead), d.ln_const)
                    } else {
                        (
                            offset.powu(d.order).mul_complex(d.lead),
                            d.ln_const + (d.order - 1) as f64 * offset.ln_abs(),
                        )
                    };
                    return Ok((self.local(d.target, u), ln_sph));
                }
            }
            if let Some(g) = self.germ(map_index, *index as usize) {
                let (u, ln_du) = g.eval(offset);
                let ln_sph = ln_du + self.weight(*index as usize, offset) - self.weight(g.target, &u);
                return Ok((self.local(g.target, u), ln_sph));
            }
        }
        let src = p.to_sphere();
        let img = f.apply(&src)?;
        let ln_sph = f.spherical_derivative_norm(&src).ln();
        if ln_sph.is_nan() {
            return Err(Error::Numeric(format!("spherical derivative at {src}")));
        }
        Ok((self.localize(img), ln_sph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn critical(lambda: Complex64) -> (RationalMap, RationalMap) {
        (
            RationalMap::from_real(&[0.0, 2.0, 1.0], &[1.0, 0.0, 0.0]).unwrap(),
            RationalMap::new(vec![c(0., 0.), lambda, c(0., 0.)], vec![c(1., 0.), c(2., 0.), c(1., 0.)])
                .unwrap(),
        )
    }

    fn atlas(lambda: Complex64) -> (RationalMap, RationalMap, ChartAtlas) {
        let (f0, f1) = critical(lambda);
        let a = ChartAtlas::new(
            &[&f0, &f1],
            vec![Anchor::Finite(c(0., 0.)), Anchor::Finite(c(-1., 0.)), Anchor::Infinity],
            0.25,
        );
        (f0, f1, a)
    }

    #[test]
    fn scaled_roundtrip_and_extremes() {
        let x = ScaledComplex::from_complex(c(3.0, -1.5));
        assert_eq!(x.to_complex(), c(3.0, -1.5));
        let tiny = x.powu(400);
        assert!(tiny.ln_abs().is_finite());
        assert!((tiny.ln_abs() - 400.0 * c(3.0, -1.5).norm().ln()).abs() < 1e-9);
        let sub = ScaledComplex::from_complex(c(1e-310, 0.0));
        assert!((sub.ln_abs() - 1e-310f64.ln()).abs() < 1e-9);
        assert!((x.mul(&x.recip()).to_complex() - c(1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn germ_orders_match_the_mapping_table() {
        let (_, _, a) = atlas(c(0.0, 0.5));
        // f0: 0→0 (k=1), −1→−1 (k=2), ∞→∞ (k=2)
        assert_eq!(a.germ(0, 0).map(|g| (g.target, g.order)), Some((0, 1)));
        assert_eq!(a.germ(0, 1).map(|g| (g.target, g.order)), Some((1, 2)));
        assert_eq!(a.germ(0, 2).map(|g| (g.target, g.order)), Some((2, 2)));
        // f1: 0→0 (k=1), −1→∞ (k=2), ∞→0 (k=1)
        assert_eq!(a.germ(1, 0).map(|g| (g.target, g.order)), Some((0, 1)));
        assert_eq!(a.germ(1, 1).map(|g| (g.target, g.order)), Some((2, 2)));
        assert_eq!(a.germ(1, 2).map(|g| (g.target, g.order)), Some((0, 1)));
    }

    #[test]
    fn local_step_agrees_with_plain_evaluation() {
        let lam = c(0.3, 0.4);
        let (f0, f1, a) = atlas(lam);
        for z in [c(0.01, 0.02), c(-0.9, 0.05), c(30.0, -10.0), c(-1.1, -0.1)] {
            let p = a.localize(SpherePoint::finite(z));
            for (i, f) in [&f0, &f1].into_iter().enumerate() {
                let (img, lnd) = a.step(i, f, &p).unwrap();
                let plain = f.apply(&SpherePoint::finite(z)).unwrap();
                assert!(img.to_sphere().chordal_distance(&plain) < 1e-12, "{z} map {i}");
                let plain_d = f.spherical_derivative_norm(&SpherePoint::finite(z)).ln();
                assert!((lnd - plain_d).abs() < 1e-9, "{z} map {i}: {lnd} vs {plain_d}");
            }
        }
    }

    #[test]
    fn superexponential_approach_is_not_absorbed() {
        let (f0, f1, a) = atlas(c(0.0, 0.5));
        // Twenty squarings near −1 take the offset far below binary64 range.
        let mut p = a.localize(SpherePoint::finite(c(-0.9, 0.0)));
        for _ in 0..20 {
            p = a.step(0, &f0, &p).unwrap().0;
        }
        assert!(!p.is_anchor());
        // f1 sends it next to ∞, f1 again next to 0.
        p = a.step(1, &f1, &p).unwrap().0;
        assert!(p.ln_abs() > 1e5);
        p = a.step(1, &f1, &p).unwrap().0;
        assert!(p.ln_abs() < -1e5 && p.ln_abs().is_finite());
        // Doubling from there climbs by ln 2 per step.
        let before = p.ln_abs();
        p = a.step(0, &f0, &p).unwrap().0;
        assert!((p.ln_abs() - before - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn exact_anchor_short_circuits() {
        let (f0, f1, a) = atlas(c(0.0, 0.5));
        let zero = a.localize(SpherePoint::ZERO);
        let (img, lnd) = a.step(0, &f0, &zero).unwrap();
        assert!(img.is_anchor());
        assert!((lnd - 2f64.ln()).abs() < 1e-15);
        let m1 = a.localize(SpherePoint::from_re_im(-1.0, 0.0));
        let (img, _) = a.step(1, &f1, &m1).unwrap();
        assert!(img.to_sphere().is_infinity());
    }
}
