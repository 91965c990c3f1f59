//! Scalar backends: exact rationals and double-precision complex numbers.

use std::fmt::Debug;
use std::ops::{Div, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::linalg::{self, Matrix};

/// Arbitrary-precision rational number, always reduced with positive denominator.
pub type Rational = num_rational::BigRational;
/// Double-precision complex number.
pub type Complex = num_complex::Complex64;

/// Relative tolerance under which a float coefficient is treated as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-9;

/// Field operations shared by the exact and floating backends.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Sub<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this backend is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_complex(&self) -> Complex;
    /// Exact value when the backend is exact, `None` otherwise.
    fn to_rational(&self) -> Option<Rational>;
    /// Absolute value as a float.
    fn magnitude(&self) -> f64;
    /// Zero exactly (exact backend) or below `FLOAT_ZERO_TOL * scale` (float backend).
    fn is_negligible(&self, scale: f64) -> bool;
    fn is_finite(&self) -> bool;
    /// Random value of height at most `height`: an integer for the exact
    /// backend, a uniform real for the float backend.
    fn random<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Self;

    fn rank(m: &Matrix<Self>) -> usize;
    fn nullspace(m: &Matrix<Self>) -> Vec<Vec<Self>>;
    fn solve(m: &Matrix<Self>, rhs: &[Self]) -> Option<Vec<Self>>;
}

fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down until they fit into a double.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v.into())
    }

    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_complex(&self) -> Complex {
        Complex::new(rational_to_f64(self), 0.0)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn random<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Self {
        let h = height.max(1);
        Rational::from_integer(rng.gen_range(-h..=h).into())
    }

    fn rank(m: &Matrix<Self>) -> usize {
        linalg::exact_rank(m)
    }

    fn nullspace(m: &Matrix<Self>) -> Vec<Vec<Self>> {
        linalg::exact_nullspace(m)
    }

    fn solve(m: &Matrix<Self>, rhs: &[Self]) -> Option<Vec<Self>> {
        linalg::exact_solve(m, rhs)
    }
}

impl Scalar for Complex {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_bigint(v: &BigInt) -> Self {
        Complex::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        Complex::new(rational_to_f64(q), 0.0)
    }

    fn to_complex(&self) -> Complex {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        None
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_ZERO_TOL * scale.max(f64::MIN_POSITIVE)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn random<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Self {
        let h = height.max(1) as f64;
        Complex::new(rng.gen_range(-h..=h), 0.0)
    }

    fn rank(m: &Matrix<Self>) -> usize {
        linalg::float_rank(m)
    }

    fn nullspace(m: &Matrix<Self>) -> Vec<Vec<Self>> {
        linalg::float_nullspace(m)
    }

    fn solve(m: &Matrix<Self>, rhs: &[Self]) -> Option<Vec<Self>> {
        linalg::float_solve(m, rhs)
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions). Returns `None` for non-finite input.
pub fn rationalize(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(max_den) {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
        if !r.is_finite() || r.abs() > 1e15 {
            break;
        }
    }
    if k1.is_zero() {
        return None;
    }
    let q = Rational::new(h1, k1);
    Some(if q.denom().is_negative() { -q } else { q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_reduced() {
        let q = Rational::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(
            rationalize(-0.75, 1000),
            Some(Rational::new((-3).into(), 4.into()))
        );
        assert_eq!(rationalize(2.0, 10), Some(Rational::from_integer(2.into())));
        assert_eq!(rationalize(f64::NAN, 10), None);
    }

    #[test]
    fn huge_rationals_convert_to_floats() {
        let big = BigInt::from(10).pow(400);
        let q = Rational::new(big.clone() * 3, big);
        assert!((q.magnitude() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn float_negligibility_is_relative() {
        let c = Complex::new(1e-12, 0.0);
        assert!(c.is_negligible(1.0));
        assert!(!c.is_negligible(1e-6));
    }
}
