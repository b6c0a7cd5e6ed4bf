//! Scalar backends: exact big rationals and `f64`.
//!
//! All algebra in this crate is generic over [`Coeff`]. The exact backend is
//! the default; every identity test run over it asserts residuals equal to
//! zero, literally. The float backend exists for the perturbation series in
//! the non-terminating regime and carries an "inexact" marker that downstream
//! tolerance checks key off.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Scalar ring operations used throughout the crate.
///
/// Implementations must be exact field arithmetic (`EXACT = true`) or `f64`.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    /// Whether arithmetic on this backend is exact. Inexact backends make
    /// downstream certificates report residual bounds instead of zeros.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn try_recip(&self) -> Option<Self>;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Embed an exact rational (lossy on the float backend).
    fn from_rat(r: &Rat) -> Self;
    /// Square root of a non-negative rational. Exact backends return `None`
    /// unless the root is rational; the float backend always succeeds.
    fn from_sqrt_rat(r: &Rat) -> Option<Self>;
    /// Upper bound on the absolute value as an `f64` (rounded away from zero).
    fn abs_upper_f64(&self) -> f64;
    /// Rendering used in reports: `"num/den"` for rationals, decimal for floats.
    fn render(&self) -> String;

    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }
}

/// Nudge a non-negative float a few ulps toward +inf. Used wherever a float
/// is reported as an upper bound for an exactly-known quantity.
pub fn bump_up(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    debug_assert!(x > 0.0);
    f64::from_bits(x.to_bits() + 8)
}

impl Coeff for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(<Rat as One>::one() / self)
        }
    }
    fn from_i64(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn from_sqrt_rat(r: &Rat) -> Option<Self> {
        sqrt_exact(r)
    }
    fn abs_upper_f64(&self) -> f64 {
        let a = self.abs();
        match a.to_f64() {
            Some(x) if x.is_finite() => bump_up(x),
            _ => f64::INFINITY,
        }
    }
    fn render(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Coeff for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_recip(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn from_sqrt_rat(r: &Rat) -> Option<Self> {
        let x = r.to_f64()?;
        (x >= 0.0).then(|| x.sqrt())
    }
    fn abs_upper_f64(&self) -> f64 {
        bump_up(self.abs())
    }
    fn render(&self) -> String {
        format!("{self:.17e}")
    }
}

/// Exact factorial as a rational.
pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Exact square root of a rational if it is a perfect square.
pub fn sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
        Some(Rat::new(num, den))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_field_ops_are_closed_and_exact() {
        let a = Rat::from_ratio(1, 3);
        let b = Rat::from_ratio(1, 6);
        assert_eq!(a.add(&b), Rat::from_ratio(1, 2));
        assert_eq!(a.sub(&b), b);
        assert_eq!(a.mul(&b), Rat::from_ratio(1, 18));
        assert_eq!(Coeff::try_recip(&a).unwrap(), Rat::from_i64(3));
        assert!(<Rat as Coeff>::try_recip(&<Rat as Coeff>::zero()).is_none());
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), Rat::from_i64(1));
        assert_eq!(factorial(5), Rat::from_i64(120));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn exact_sqrt_detects_squares() {
        assert_eq!(sqrt_exact(&Rat::from_ratio(9, 4)), Some(Rat::from_ratio(3, 2)));
        assert_eq!(sqrt_exact(&Rat::from_ratio(2, 1)), None);
    }

    #[test]
    fn upper_float_is_an_upper_bound() {
        let x = Rat::from_ratio(1, 3);
        let up = x.abs_upper_f64();
        assert!(up > 1.0 / 3.0);
        assert!(up - 1.0 / 3.0 < 1e-12);
    }

    #[test]
    fn render_rationals() {
        assert_eq!(Rat::from_ratio(-3, 6).render(), "-1/2");
        assert_eq!(Rat::from_i64(7).render(), "7");
    }
}
