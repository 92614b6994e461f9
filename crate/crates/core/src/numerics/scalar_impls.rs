use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::format::log10_abs_rational;
use super::{rational_from_f64, Real, Regime, Scalar};

impl Scalar for BigRational {
    type Ctx = ();

    fn ctx(&self) {}

    fn regime(_: ()) -> Regime {
        Regime::ExactRational
    }

    fn zero(_: ()) -> Self {
        Zero::zero()
    }

    fn one(_: ()) -> Self {
        One::one()
    }

    fn from_i64(v: i64, _: ()) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn pow2(k: i64, _: ()) -> Self {
        let p = BigInt::from(1u8) << k.unsigned_abs() as usize;
        if k >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new_raw(BigInt::from(1u8), p)
        }
    }

    fn from_f64(v: f64, _: ()) -> Self {
        rational_from_f64(v)
    }

    fn from_rational(r: &BigRational, _: ()) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn log10_abs(&self) -> f64 {
        log10_abs_rational(self)
    }

    fn mantissa_bits(_: ()) -> Option<u32> {
        None
    }

    fn mul_i64(&self, k: i64) -> Self {
        self * BigInt::from(k)
    }

    fn abs_gt(&self, other: &Self) -> bool {
        // |a/b| > |c/d|  <=>  |a| d > |c| b  (denominators are positive)
        self.numer().abs() * other.denom() > other.numer().abs() * self.denom()
    }
}

impl Scalar for f64 {
    type Ctx = ();

    fn ctx(&self) {}

    fn regime(_: ()) -> Regime {
        Regime::Binary64
    }

    fn zero(_: ()) -> Self {
        0.0
    }

    fn one(_: ()) -> Self {
        1.0
    }

    fn from_i64(v: i64, _: ()) -> Self {
        v as f64
    }

    fn pow2(k: i64, _: ()) -> Self {
        2f64.powi(k.clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as i32)
    }

    fn from_f64(v: f64, _: ()) -> Self {
        v
    }

    fn from_rational(r: &BigRational, _: ()) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn log10_abs(&self) -> f64 {
        f64::abs(*self).log10()
    }

    fn mantissa_bits(_: ()) -> Option<u32> {
        Some(f64::MANTISSA_DIGITS)
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}
