//! Scalar arithmetic regimes and dense containers.
//!
//! Three regimes are supported: exact rationals ([`BigRational`]), IEEE
//! binary64 (`f64`), and [`BigFloat`], a binary floating-point number with a
//! configurable mantissa width and round-to-nearest-even. Every algorithm in
//! the crate is generic over [`Scalar`], so the same elimination code runs
//! exactly or in floating point.

mod bigfloat;
mod format;
mod matrix;
mod scalar_impls;
pub(crate) mod triangular;

pub use bigfloat::{BigFloat, Precision, DEFAULT_MANTISSA_BITS, MIN_MANTISSA_BITS};
pub use format::{format_f64, format_rational, log10_abs_rational, parse_rational};
pub use matrix::{Matrix, Vector};
pub use triangular::{triangular_inverse, triangular_inverse_rational, unit_lower_inverse};

pub use num_rational::BigRational;

use std::fmt;

use crate::error::{Error, Result};

/// The arithmetic regime a scalar lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    ExactRational,
    Binary64,
    BigFloat { mantissa_bits: u32 },
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::ExactRational => f.write_str("rational"),
            Regime::Binary64 => f.write_str("binary64"),
            Regime::BigFloat { mantissa_bits } => write!(f, "bigfloat{mantissa_bits}"),
        }
    }
}

/// A real number in one arithmetic regime.
///
/// Arithmetic is by reference so that big-number regimes do not need to clone
/// operands. `Ctx` carries whatever a regime needs to create fresh values
/// (nothing for rationals and binary64, the mantissa width for [`BigFloat`]).
///
/// Division by an exact zero is a caller bug for the exact and big-float
/// regimes and panics; callers check pivots and denominators first.
pub trait Scalar: Clone + fmt::Debug + PartialEq + PartialOrd + Send + Sync + 'static {
    type Ctx: Copy + fmt::Debug + PartialEq + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn regime(ctx: Self::Ctx) -> Regime;

    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_i64(v: i64, ctx: Self::Ctx) -> Self;
    /// Exactly `2^k` (rounded only if it leaves the exponent range of binary64).
    fn pow2(k: i64, ctx: Self::Ctx) -> Self;
    /// Exact for every finite `v` in the rational and big-float regimes.
    fn from_f64(v: f64, ctx: Self::Ctx) -> Self;
    /// Correctly rounded conversion from an exact rational.
    fn from_rational(r: &BigRational, ctx: Self::Ctx) -> Self;

    /// Exact value, or `None` for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;
    /// Correctly rounded to binary64.
    fn to_f64(&self) -> f64;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;

    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;

    /// `log10 |x|` as binary64; `-inf` for zero.
    fn log10_abs(&self) -> f64;

    /// Mantissa width of a floating regime, `None` when exact.
    fn mantissa_bits(ctx: Self::Ctx) -> Option<u32>;

    fn mul_i64(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k, self.ctx()))
    }

    /// `|self| > |other|`, used by pivot search.
    fn abs_gt(&self, other: &Self) -> bool {
        self.abs() > other.abs()
    }
}

/// Scalars with a square root, needed by norm estimation and SVD.
pub trait Real: Scalar {
    fn sqrt(&self) -> Self;
}

/// Converts a scalar between regimes through its exact rational value.
///
/// Widening (binary64 into rationals or big floats) is exact; narrowing is
/// correctly rounded. Fails with [`Error::Overflow`] when the source is not
/// finite or the rounded value leaves the target's range.
pub fn promote<S: Scalar, T: Scalar>(x: &S, ctx: T::Ctx) -> Result<T> {
    let exact = x
        .to_rational()
        .ok_or_else(|| Error::Overflow(format!("{x:?}")))?;
    let out = T::from_rational(&exact, ctx);
    if !out.is_finite() {
        return Err(Error::Overflow(format_rational(&exact)));
    }
    Ok(out)
}

/// Exact rational from a binary64 value. Panics on non-finite input.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite binary64 value")
}
