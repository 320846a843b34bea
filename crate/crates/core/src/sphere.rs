//! Points and rational maps on the Riemann sphere in homogeneous coordinates.
//!
//! A point is the projective class `[z : w]` of a nonzero pair of complex
//! numbers. Every constructor renormalizes to a deterministic representative:
//! the component of larger modulus is divided out, so one coordinate is
//! exactly `1` and `|num|² + |den|² ∈ [1, 2]`. Rational maps are pairs of
//! homogeneous forms of equal degree, which makes evaluation exact at `∞` and
//! at poles.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Both homogeneous forms below this modulus means the map has no defined
/// image at the point.
const INDETERMINATE_FLOOR: f64 = 1e-300;

/// Tolerance on the normalized homogeneous resultant.
const RESULTANT_TOL: f64 = 1e-12;

/// Complex division by Smith's method; avoids the overflow of the textbook
/// formula when the divisor has a component near `1e160` or beyond.
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

fn is_finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// A point of the Riemann sphere, `[num : den]`.
#[derive(Clone, Copy, Debug)]
pub struct SpherePoint {
    num: Complex64,
    den: Complex64,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint {
        num: Complex64::new(0.0, 0.0),
        den: Complex64::new(1.0, 0.0),
    };
    pub const INFINITY: SpherePoint = SpherePoint {
        num: Complex64::new(1.0, 0.0),
        den: Complex64::new(0.0, 0.0),
    };

    /// Builds `[num : den]` and normalizes it.
    pub fn new(num: Complex64, den: Complex64) -> Result<Self> {
        normalize(num, den)
    }

    /// The finite point `z = [z : 1]`.
    pub fn finite(z: Complex64) -> Self {
        normalize(z, Complex64::new(1.0, 0.0)).unwrap_or(Self::INFINITY)
    }

    pub fn from_re_im(re: f64, im: f64) -> Self {
        Self::finite(Complex64::new(re, im))
    }

    pub fn num(&self) -> Complex64 {
        self.num
    }

    pub fn den(&self) -> Complex64 {
        self.den
    }

    pub fn is_infinity(&self) -> bool {
        self.den.re == 0.0 && self.den.im == 0.0
    }

    /// Affine value `num / den`, or `None` at `∞`.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_infinity() {
            None
        } else {
            Some(cdiv(self.num, self.den))
        }
    }

    /// Planar modulus; `+∞` at the point at infinity.
    pub fn abs(&self) -> f64 {
        if self.is_infinity() {
            f64::INFINITY
        } else {
            self.num.norm() / self.den.norm()
        }
    }

    /// Chordal distance on the unit sphere (diameter 2).
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        chordal_distance(self, other)
    }

    /// Image on the unit sphere under stereographic lift; `0` is the south
    /// pole and `∞` the north pole.
    pub fn to_unit_sphere(&self) -> [f64; 3] {
        let nz = self.num.norm_sqr();
        let nw = self.den.norm_sqr();
        let s = nz + nw;
        let c = self.num * self.den.conj();
        [2.0 * c.re / s, 2.0 * c.im / s, (nz - nw) / s]
    }

    /// Projective equality up to a chordal tolerance.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        chordal_distance(self, other) <= tol
    }
}

impl PartialEq for SpherePoint {
    /// Exact projective equality: `z₁w₂ = z₂w₁`.
    fn eq(&self, other: &Self) -> bool {
        self.num * other.den == other.num * self.den
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_complex() {
            None => write!(f, "∞"),
            Some(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// Projectively equal representative with one coordinate exactly `1`.
///
/// The divisor is the component of larger modulus (`den` on ties), so the
/// representative is a deterministic function of the projective class.
pub fn normalize(num: Complex64, den: Complex64) -> Result<SpherePoint> {
    if !is_finite(num) || !is_finite(den) {
        return Err(Error::InvalidPoint(format!("{num}, {den}")));
    }
    let (an, ad) = (num.norm(), den.norm());
    if an == 0.0 && ad == 0.0 {
        return Err(Error::InvalidPoint(format!("{num}, {den}")));
    }
    let one = Complex64::new(1.0, 0.0);
    if ad >= an {
        Ok(SpherePoint {
            num: cdiv(num, den),
            den: one,
        })
    } else {
        Ok(SpherePoint {
            num: one,
            den: cdiv(den, num),
        })
    }
}

/// `2|z₁w₂ − z₂w₁| / (‖(z₁,w₁)‖ ‖(z₂,w₂)‖)`.
pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let cross = p.num * q.den - q.num * p.den;
    let np = (p.num.norm_sqr() + p.den.norm_sqr()).sqrt();
    let nq = (q.num.norm_sqr() + q.den.norm_sqr()).sqrt();
    (2.0 * cross.norm() / (np * nq)).min(2.0)
}

/// A rational map `[z : w] ↦ [P(z,w) : Q(z,w)]` given by two homogeneous
/// forms of degree `d`. Coefficient `j` multiplies `z^j w^(d-j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl RationalMap {
    /// Validates lengths and that `P` and `Q` share no projective root.
    pub fn new(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self> {
        if p.len() != q.len() || p.len() < 2 {
            return Err(Error::InvalidMap(format!(
                "coefficient lists must both have length d+1 >= 2 (got {} and {})",
                p.len(),
                q.len()
            )));
        }
        if p.iter().chain(q.iter()).any(|c| !is_finite(*c)) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        let res = homogeneous_resultant(&p, &q);
        if !(res > RESULTANT_TOL) {
            return Err(Error::InvalidMap(format!(
                "forms share a projective root (normalized resultant {res:e})"
            )));
        }
        Ok(Self { p, q })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(p: &[f64], q: &[f64]) -> Result<Self> {
        Self::new(
            p.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            q.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn identity() -> Self {
        Self::from_real(&[0.0, 1.0], &[1.0, 0.0]).expect("identity is a valid map")
    }

    pub fn degree(&self) -> usize {
        self.p.len() - 1
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.p
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.q
    }

    /// Normalized image `[P(z,w) : Q(z,w)]`.
    pub fn apply(&self, pt: &SpherePoint) -> Result<SpherePoint> {
        let (z, w) = (pt.num, pt.den);
        let pv = eval_form(&self.p, z, w);
        let qv = eval_form(&self.q, z, w);
        if pv.norm() < INDETERMINATE_FLOOR && qv.norm() < INDETERMINATE_FLOOR {
            return Err(Error::Indeterminate(pt.to_string()));
        }
        normalize(pv, qv)
    }

    /// Derivative of the affine expression `P(z,1)/Q(z,1)` at a finite,
    /// non-polar `z`.
    pub fn planar_derivative(&self, z: Complex64) -> Result<Complex64> {
        if !is_finite(z) {
            return Err(Error::Chart(format!("{z} is not a finite point")));
        }
        let one = Complex64::new(1.0, 0.0);
        let pv = eval_form(&self.p, z, one);
        let qv = eval_form(&self.q, z, one);
        if qv.norm() < INDETERMINATE_FLOOR {
            return Err(Error::Chart(format!("{z} is a pole")));
        }
        let dp = eval_dz(&self.p, z, one);
        let dq = eval_dz(&self.q, z, one);
        Ok(cdiv(dp * qv - pv * dq, qv * qv))
    }

    /// Affine value `P(z,1)/Q(z,1)` at a finite point (may be infinite).
    pub fn eval_affine(&self, z: Complex64) -> Result<SpherePoint> {
        self.apply(&SpherePoint::finite(z))
    }

    /// `|f'(z)|(1+|z|²)/(1+|f(z)|²)` evaluated chart-free.
    ///
    /// With `J = P_z Q_w − P_w Q_z` this equals
    /// `|J| (|z|²+|w|²) / (d (|P|²+|Q|²))`.
    pub fn spherical_derivative_norm(&self, pt: &SpherePoint) -> f64 {
        let (z, w) = (pt.num, pt.den);
        let d = self.degree() as f64;
        let jac = eval_dz(&self.p, z, w) * eval_dw(&self.q, z, w)
            - eval_dw(&self.p, z, w) * eval_dz(&self.q, z, w);
        let pv = eval_form(&self.p, z, w);
        let qv = eval_form(&self.q, z, w);
        jac.norm() * (z.norm_sqr() + w.norm_sqr()) / (d * (pv.norm_sqr() + qv.norm_sqr()))
    }
}

fn powers(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(acc);
        acc *= x;
    }
    out
}

pub(crate) fn eval_form(c: &[Complex64], z: Complex64, w: Complex64) -> Complex64 {
    let d = c.len() - 1;
    let zp = powers(z, d);
    let wp = powers(w, d);
    c.iter()
        .enumerate()
        .map(|(j, a)| a * zp[j] * wp[d - j])
        .sum()
}

fn eval_dz(c: &[Complex64], z: Complex64, w: Complex64) -> Complex64 {
    let d = c.len() - 1;
    let zp = powers(z, d);
    let wp = powers(w, d);
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, a)| a * (j as f64) * zp[j - 1] * wp[d - j])
        .sum()
}

fn eval_dw(c: &[Complex64], z: Complex64, w: Complex64) -> Complex64 {
    let d = c.len() - 1;
    let zp = powers(z, d);
    let wp = powers(w, d);
    c.iter()
        .enumerate()
        .take(d)
        .map(|(j, a)| a * ((d - j) as f64) * zp[j] * wp[d - j - 1])
        .sum()
}

/// Modulus of the Sylvester resultant of two forms of formal degree `d`,
/// each scaled to unit max-coefficient first.
fn homogeneous_resultant(p: &[Complex64], q: &[Complex64]) -> f64 {
    let d = p.len() - 1;
    let scale = |c: &[Complex64]| {
        let m = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            None
        } else {
            Some(c.iter().map(|x| x / m).collect::<Vec<_>>())
        }
    };
    let (Some(p), Some(q)) = (scale(p), scale(q)) else {
        return 0.0;
    };
    let n = 2 * d;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    // Rows hold the coefficients from the z^d term downwards.
    for r in 0..d {
        for j in 0..=d {
            m[r][r + j] = p[d - j];
            m[r + d][r + j] = q[d - j];
        }
    }
    determinant(m).norm()
}

fn determinant(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap_or(col);
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= factor * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f0() -> RationalMap {
        RationalMap::from_real(&[0.0, 2.0, 1.0], &[1.0, 0.0, 0.0]).unwrap()
    }

    fn f1(lambda: Complex64) -> RationalMap {
        RationalMap::new(vec![c(0., 0.), lambda, c(0., 0.)], vec![c(1., 0.), c(2., 0.), c(1., 0.)])
            .unwrap()
    }

    #[test]
    fn normalize_examples() {
        let p = normalize(c(0., 0.), c(1., 0.)).unwrap();
        assert_eq!(p.num(), c(0., 0.));
        assert_eq!(p.den(), c(1., 0.));

        let big = normalize(c(1e200, 0.), c(1e200, 0.)).unwrap();
        let s = big.num().norm_sqr() + big.den().norm_sqr();
        assert!((0.5..=2.0).contains(&s));
        assert_eq!(big, SpherePoint::from_re_im(1.0, 0.0));

        assert!(matches!(normalize(c(0., 0.), c(0., 0.)), Err(Error::InvalidPoint(_))));
        assert!(normalize(c(f64::NAN, 0.), c(1., 0.)).is_err());
    }

    #[test]
    fn projective_equality_respects_scaling() {
        let p = SpherePoint::new(c(1., 2.), c(3., -1.)).unwrap();
        let q = SpherePoint::new(c(1., 2.) * c(-4., 7.), c(3., -1.) * c(-4., 7.)).unwrap();
        assert!(p.approx_eq(&q, 1e-15));
    }

    #[test]
    fn chordal_examples() {
        let zero = SpherePoint::ZERO;
        let inf = SpherePoint::INFINITY;
        assert_eq!(zero.chordal_distance(&inf), 2.0);
        assert_eq!(zero.chordal_distance(&zero), 0.0);
        let one = SpherePoint::from_re_im(1.0, 0.0);
        assert!((zero.chordal_distance(&one) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn apply_table_entries() {
        let lam = c(0.0, 0.5);
        assert_eq!(f0().apply(&SpherePoint::ZERO).unwrap(), SpherePoint::ZERO);
        assert_eq!(f1(lam).apply(&SpherePoint::INFINITY).unwrap(), SpherePoint::ZERO);
        let minus_one = SpherePoint::from_re_im(-1.0, 0.0);
        assert!(f1(lam).apply(&minus_one).unwrap().is_infinity());
        let three = f0().apply(&SpherePoint::from_re_im(1.0, 0.0)).unwrap();
        assert_eq!(three.to_complex().unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn common_root_is_rejected() {
        // z(z+w) / (z w): shares the root z = 0.
        let bad = RationalMap::from_real(&[0.0, 1.0, 1.0], &[0.0, 1.0, 0.0]);
        assert!(matches!(bad, Err(Error::InvalidMap(_))));
        assert!(RationalMap::from_real(&[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn planar_derivatives() {
        let lam = c(0.3, 0.5);
        assert!((f0().planar_derivative(c(0., 0.)).unwrap() - c(2., 0.)).norm() < 1e-15);
        assert!((f1(lam).planar_derivative(c(0., 0.)).unwrap() - lam).norm() < 1e-15);
        let mu = c(2.0, 1.0);
        let mobius1 = RationalMap::new(vec![c(0., 0.), c(1., 0.)], vec![mu, c(1., 0.)]).unwrap();
        let d = mobius1.planar_derivative(c(0., 0.)).unwrap();
        assert!((d - cdiv(c(1., 0.), mu)).norm() < 1e-15);
        assert!(matches!(f1(lam).planar_derivative(c(-1., 0.)), Err(Error::Chart(_))));
        assert!(f0().planar_derivative(c(f64::INFINITY, 0.)).is_err());
    }

    #[test]
    fn spherical_derivative_examples() {
        assert_eq!(f0().spherical_derivative_norm(&SpherePoint::INFINITY), 0.0);
        assert!((f0().spherical_derivative_norm(&SpherePoint::ZERO) - 2.0).abs() < 1e-15);
        let id = RationalMap::identity();
        for z in [c(0.3, -2.0), c(1e5, 1.0), c(0., 0.)] {
            let v = id.spherical_derivative_norm(&SpherePoint::finite(z));
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((id.spherical_derivative_norm(&SpherePoint::INFINITY) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spherical_derivative_matches_chart_formula() {
        let f = f1(c(0.2, 0.7));
        for z in [c(0.3, 0.4), c(-2.0, 1.5), c(5.0, -3.0)] {
            let fz = f.eval_affine(z).unwrap().to_complex().unwrap();
            let expect = f.planar_derivative(z).unwrap().norm() * (1.0 + z.norm_sqr())
                / (1.0 + fz.norm_sqr());
            let got = f.spherical_derivative_norm(&SpherePoint::finite(z));
            assert!((got - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn f0_conjugacy_and_julia_circle() {
        let f = f0();
        for k in 0..1000 {
            let theta = k as f64 * std::f64::consts::TAU / 1000.0;
            let z = c(theta.cos() - 1.0, theta.sin());
            let img = f.eval_affine(z).unwrap().to_complex().unwrap();
            assert!(((img + 1.0).norm() - 1.0).abs() <= 1e-9);
        }
    }

    fn arb_point() -> impl Strategy<Value = SpherePoint> {
        (-50.0..50.0f64, -50.0..50.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_filter_map(
            "nonzero",
            |(a, b, c_, d)| SpherePoint::new(c(a, b), c(c_, d)).ok(),
        )
    }

    proptest! {
        #[test]
        fn chordal_metric_axioms(p in arb_point(), q in arb_point(), r in arb_point()) {
            let dpq = p.chordal_distance(&q);
            prop_assert!((dpq - q.chordal_distance(&p)).abs() <= 1e-12);
            prop_assert!(p.chordal_distance(&p) <= 1e-12);
            prop_assert!(dpq <= p.chordal_distance(&r) + r.chordal_distance(&q) + 1e-12);
            prop_assert!(dpq <= 2.0);
        }

        #[test]
        fn apply_is_projectively_consistent(
            p in arb_point(), cre in -5.0..5.0f64, cim in -5.0..5.0f64,
        ) {
            let scale = c(cre, cim);
            prop_assume!(scale.norm() > 1e-3);
            let f = f1(c(0.1, 0.6));
            // Scaled raw coordinates go through `eval_form` directly.
            let pv = eval_form(f.numerator(), p.num() * scale, p.den() * scale);
            let qv = eval_form(f.denominator(), p.num() * scale, p.den() * scale);
            let scaled = normalize(pv, qv).unwrap();
            prop_assert!(scaled.chordal_distance(&f.apply(&p).unwrap()) <= 1e-12);
        }

        #[test]
        fn normalized_representative(p in arb_point()) {
            let s = p.num().norm_sqr() + p.den().norm_sqr();
            prop_assert!((0.5..=2.0).contains(&s));
        }
    }
}
