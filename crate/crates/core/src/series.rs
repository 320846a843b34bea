//! Truncated power series without constant term, Koenigs linearizers and the
//! simultaneous-linearization residual.
//!
//! A [`TruncatedSeries`] of order `K` stores `a₁, …, a_K` for
//! `a₁z + a₂z² + … + a_K z^K`. All arithmetic truncates at `K`.

use std::ops::{Add, Index, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::{cdiv, RationalMap};

/// Default truncation order for probes.
pub const DEFAULT_ORDER: usize = 12;
/// Truncation order where series feed coordinate changes.
pub const CHANGE_OF_COORDINATES_ORDER: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl TruncatedSeries {
    /// Series with coefficients `a₁..a_K`; `K = coeffs.len() ≥ 2`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "series order must be at least 2 (got {})",
                coeffs.len()
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn identity(order: usize) -> Result<Self> {
        let mut c = vec![zero(); order];
        if let Some(first) = c.first_mut() {
            *first = Complex64::new(1.0, 0.0);
        }
        Self::new(c)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a₁..a_K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^j` (`j ≥ 1`); zero beyond the order.
    pub fn coeff(&self, j: usize) -> Complex64 {
        if j == 0 {
            zero()
        } else {
            self.coeffs.get(j - 1).copied().unwrap_or_else(zero)
        }
    }

    pub fn multiplier(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Same coefficients truncated or zero-padded to `order`.
    pub fn resized(&self, order: usize) -> Result<Self> {
        let mut c = self.coeffs.clone();
        c.resize(order, zero());
        Self::new(c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Truncated product (the result has no `z¹` term).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_orders(self, other)?;
        let k = self.order();
        let mut out = vec![zero(); k];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                // z^(i+1) z^(j+1) = z^(i+j+2)
                let idx = i + j + 1;
                if idx < k {
                    out[idx] += a * b;
                }
            }
        }
        Ok(Self { coeffs: out })
    }

    /// Truncated powers `self^1 ..= self^max`.
    fn powers(&self, max: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(max);
        out.push(self.clone());
        for i in 1..max {
            let next = out[i - 1].mul(self).expect("same order");
            out.push(next);
        }
        out
    }

    /// Composition `self ∘ inner`, truncated at the common order.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        check_orders(self, inner)?;
        let k = self.order();
        let mut out = vec![zero(); k];
        for (j, gp) in inner.powers(k).iter().enumerate() {
            let a = self.coeffs[j];
            if a == zero() {
                continue;
            }
            for (o, g) in out.iter_mut().zip(&gp.coeffs) {
                *o += a * g;
            }
        }
        Ok(Self { coeffs: out })
    }

    /// Compositional inverse; requires a nonzero multiplier.
    pub fn inverse(&self) -> Result<Self> {
        let a1 = self.multiplier();
        if a1.norm() == 0.0 {
            return Err(Error::InvalidParameter("series with zero multiplier has no inverse".into()));
        }
        let k = self.order();
        let mut h = vec![zero(); k];
        h[0] = cdiv(Complex64::new(1.0, 0.0), a1);
        for j in 2..=k {
            let cur = Self { coeffs: h.clone() };
            let err = self.compose(&cur)?.coeff(j);
            h[j - 1] -= cdiv(err, a1);
        }
        Self::new(h)
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(zero(), |acc, a| (acc + a) * z)
    }

    /// Derivative evaluated at `z`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(zero(), |acc, (i, a)| acc * z + a * (i + 1) as f64)
    }
}

impl Index<usize> for TruncatedSeries {
    type Output = Complex64;

    /// Zero-based index into `a₁..a_K`.
    fn index(&self, i: usize) -> &Complex64 {
        &self.coeffs[i]
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: Self) -> TruncatedSeries {
        assert_eq!(self.order(), rhs.order(), "series order mismatch");
        TruncatedSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: Self) -> TruncatedSeries {
        assert_eq!(self.order(), rhs.order(), "series order mismatch");
        TruncatedSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

fn check_orders(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch(a.order(), b.order()));
    }
    Ok(())
}

/// Expansion at `0` of the affine chart `P(z,1)/Q(z,1)` by power-series
/// long division.
pub fn taylor_at_zero(f: &RationalMap, order: usize) -> Result<TruncatedSeries> {
    let num = f.numerator();
    let den = f.denominator();
    let scale = num.iter().chain(den).map(|c| c.norm()).fold(0.0, f64::max);
    if den[0].norm() <= 1e-14 * scale {
        return Err(Error::NotExpandable("pole at 0".into()));
    }
    if num[0].norm() > 1e-14 * scale {
        return Err(Error::NotExpandable("0 is not fixed".into()));
    }
    // c_n = (N_n − Σ_{i=1}^{n} D_i c_{n−i}) / D_0, with c_0 = 0.
    let mut c = vec![zero(); order + 1];
    for n in 1..=order {
        let mut acc = num.get(n).copied().unwrap_or_else(zero);
        for i in 1..=n.min(den.len() - 1) {
            acc -= den[i] * c[n - i];
        }
        c[n] = cdiv(acc, den[0]);
    }
    TruncatedSeries::new(c[1..].to_vec())
}

/// The tangent-to-identity `φ` with `φ ∘ f = a₁ φ` to order `K`.
///
/// The order-`j` coefficient solves
/// `b_j (a₁ − a₁^j) = Σ_{i<j} b_i [f^i]_j`, which only involves lower
/// coefficients, so one forward pass is exact.
pub fn koenigs_linearizer(f: &TruncatedSeries, order: usize) -> Result<TruncatedSeries> {
    let f = f.resized(order)?;
    let a1 = f.multiplier();
    let m = a1.norm();
    if m == 0.0 || (m - 1.0).abs() < 1e-12 {
        return Err(Error::NotKoenigs(m));
    }
    let pw = f.powers(order);
    let mut b = vec![zero(); order];
    b[0] = Complex64::new(1.0, 0.0);
    let mut a1_pow = a1;
    for j in 2..=order {
        a1_pow *= a1;
        let mut acc = zero();
        for i in 1..j {
            acc += b[i - 1] * pw[i - 1].coeff(j);
        }
        b[j - 1] = cdiv(acc, a1 - a1_pow);
    }
    TruncatedSeries::new(b)
}

/// `φ ∘ g − multiplier · φ`; all-zero means `φ` also linearizes `g`.
pub fn linearization_residual(
    phi: &TruncatedSeries,
    g: &TruncatedSeries,
    multiplier: Complex64,
) -> Result<TruncatedSeries> {
    let lhs = phi.compose(g)?;
    Ok(&lhs - &phi.scale(multiplier))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::IfsSystem;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Taylor coefficients of ln(1+z), the closed-form linearizer of f₀.
    fn log1p_coeffs(k: usize) -> Vec<f64> {
        (1..=k)
            .map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64)
            .collect()
    }

    fn f0_series(k: usize) -> TruncatedSeries {
        let sys = IfsSystem::critical(c(0.0, 0.5), 0.5).unwrap();
        taylor_at_zero(sys.map(0), k).unwrap()
    }

    #[test]
    fn taylor_examples() {
        let s = f0_series(5);
        let want = [2.0, 1.0, 0.0, 0.0, 0.0];
        for (a, w) in s.coeffs().iter().zip(want) {
            assert_eq!(*a, c(w, 0.0));
        }
        for lam in [c(0.3, 0.4), c(-3.0, 0.0), c(0.0, 0.5)] {
            let sys = IfsSystem::critical(lam, 0.5).unwrap();
            let t = taylor_at_zero(sys.map(1), 3).unwrap();
            assert!((t[0] - lam).norm() < 1e-15);
            assert!((t[1] + lam * 2.0).norm() < 1e-15);
            assert!((t[2] - lam * 3.0).norm() < 1e-15);
        }
        let mob = IfsSystem::mobius(c(2.0, 0.0)).unwrap();
        let t = taylor_at_zero(mob.map(1), 2).unwrap();
        assert_eq!(t.coeffs(), &[c(0.5, 0.0), c(-0.25, 0.0)]);
    }

    #[test]
    fn taylor_rejects_non_fixed_and_poles() {
        let shifted = RationalMap::from_real(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!(matches!(taylor_at_zero(&shifted, 4), Err(Error::NotExpandable(_))));
        let pole = RationalMap::from_real(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(taylor_at_zero(&pole, 4).is_err());
    }

    #[test]
    fn compose_examples() {
        let g = TruncatedSeries::from_real(&[0.5, -2.0, 3.0]).unwrap();
        let id = TruncatedSeries::identity(3).unwrap();
        assert_eq!(id.compose(&g).unwrap(), g);
        let sq = TruncatedSeries::from_real(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sq.compose(&id).unwrap(), sq);
        let h = TruncatedSeries::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(h.compose(&h).unwrap().coeffs(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let short = TruncatedSeries::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(g.compose(&short), Err(Error::OrderMismatch(3, 2)));
    }

    #[test]
    fn koenigs_of_f0_is_log1p() {
        let phi = koenigs_linearizer(&f0_series(12), 12).unwrap();
        assert!((phi[1] - c(-0.5, 0.0)).norm() < 1e-12);
        // Closed form gives a₃ = 1/3.
        assert!((phi[2] - c(1.0 / 3.0, 0.0)).norm() < 1e-12);
        for (a, w) in phi.coeffs().iter().zip(log1p_coeffs(12)) {
            assert!((a - c(w, 0.0)).norm() < 1e-10);
        }
        let lin = TruncatedSeries::from_real(&[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(koenigs_linearizer(&lin, 4).unwrap(), TruncatedSeries::identity(4).unwrap());
    }

    #[test]
    fn koenigs_regime_is_enforced() {
        let neutral = TruncatedSeries::new(vec![Complex64::from_polar(1.0, 0.7), c(1.0, 0.0)]).unwrap();
        assert!(matches!(koenigs_linearizer(&neutral, 4), Err(Error::NotKoenigs(_))));
        let superatt = TruncatedSeries::from_real(&[0.0, 1.0]).unwrap();
        assert!(koenigs_linearizer(&superatt, 4).is_err());
    }

    #[test]
    fn residual_second_and_third_order() {
        let phi = koenigs_linearizer(&f0_series(12), 12).unwrap();
        for lam in [c(0.3, 0.4), c(-3.0, 0.0), c(0.0, 0.5), c(-0.7, -0.2)] {
            let sys = IfsSystem::critical(lam, 0.5).unwrap();
            let g = taylor_at_zero(sys.map(1), 12).unwrap();
            let r = linearization_residual(&phi, &g, lam).unwrap();
            assert_eq!(r.coeff(1), c(0.0, 0.0));
            let z2 = -(lam / 2.0) * (lam + 3.0);
            assert!((r.coeff(2) - z2).norm() < 1e-12);
            let z3 = (lam / 3.0) * (lam + 2.0) * (lam + 4.0);
            assert!((r.coeff(3) - z3).norm() < 1e-12);
        }
        let sys = IfsSystem::critical(c(-3.0, 0.0), 0.5).unwrap();
        let g = taylor_at_zero(sys.map(1), 12).unwrap();
        let r = linearization_residual(&phi, &g, c(-3.0, 0.0)).unwrap();
        assert!(r.coeff(2).norm() < 1e-12);
        assert!((r.coeff(3) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn residual_of_own_linearizer_vanishes() {
        let f = TruncatedSeries::new(vec![c(0.3, 0.2), c(1.0, -1.0), c(0.5, 0.0), c(0.0, 2.0)]).unwrap();
        let phi = koenigs_linearizer(&f, 4).unwrap();
        let r = linearization_residual(&phi, &f, f.multiplier()).unwrap();
        assert!(r.max_abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        let f = TruncatedSeries::new(vec![c(0.5, 0.5), c(1.0, -1.0), c(0.5, 0.0), c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        let h = f.inverse().unwrap();
        let id = f.compose(&h).unwrap();
        assert!((&id - &TruncatedSeries::identity(5).unwrap()).max_abs() < 1e-12);
    }

    fn arb_series() -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6)
            .prop_map(|v| TruncatedSeries::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn composition_is_associative(f in arb_series(), g in arb_series(), h in arb_series()) {
            let left = f.compose(&g).unwrap().compose(&h).unwrap();
            let right = f.compose(&g.compose(&h).unwrap()).unwrap();
            prop_assert!((&left - &right).max_abs() <= 1e-10);
        }
    }
}
