use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{format::log10_abs_bigint, rational_from_f64, Real, Regime, Scalar};
use crate::error::{Error, Result};

pub const MIN_MANTISSA_BITS: u32 = 64;
pub const DEFAULT_MANTISSA_BITS: u32 = 512;

/// Mantissa width of a [`BigFloat`], at least [`MIN_MANTISSA_BITS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision(u32);

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_MANTISSA_BITS {
            return Err(Error::InvalidPrecision {
                got: bits,
                min: MIN_MANTISSA_BITS,
            });
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_MANTISSA_BITS)
    }
}

/// Binary floating point `mant * 2^exp` with `|mant| < 2^prec`.
///
/// The mantissa is kept odd (or zero with `exp == 0`), so structural equality
/// is value equality. Every operation rounds its exact result once, to nearest
/// with ties to even. There are no infinities or NaNs.
#[derive(Clone)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: Precision,
}

impl BigFloat {
    pub fn zero_with(prec: Precision) -> Self {
        BigFloat {
            mant: BigInt::zero(),
            exp: 0,
            prec,
        }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Rounds the exact value `(-1)^neg * mag * 2^exp` to `prec` bits.
    fn round(neg: bool, mut mag: BigUint, mut exp: i64, prec: Precision) -> Self {
        if mag.is_zero() {
            return Self::zero_with(prec);
        }
        let p = u64::from(prec.0);
        let bits = mag.bits();
        if bits > p {
            let shift = bits - p;
            let tz = mag.trailing_zeros().unwrap_or(0);
            let half = mag.bit(shift - 1);
            let sticky = tz < shift - 1;
            mag >>= shift;
            exp += shift as i64;
            if half && (sticky || mag.bit(0)) {
                mag += 1u32;
            }
        }
        // Carry out of the top bit is absorbed by normalization.
        let tz = mag.trailing_zeros().unwrap_or(0);
        mag >>= tz;
        exp += tz as i64;
        let sign = if neg { Sign::Minus } else { Sign::Plus };
        BigFloat {
            mant: BigInt::from_biguint(sign, mag),
            exp,
            prec,
        }
    }

    fn from_parts(mant: BigInt, exp: i64, prec: Precision) -> Self {
        let neg = mant.sign() == Sign::Minus;
        Self::round(neg, mant.into_parts().1, exp, prec)
    }

    /// Highest set bit position plus one, i.e. `floor(log2 |x|) + 1`.
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    fn wider(&self, other: &Self) -> Precision {
        if self.prec.0 >= other.prec.0 {
            self.prec
        } else {
            other.prec
        }
    }

    fn add_impl(&self, rhs: &Self, negate_rhs: bool) -> Self {
        let prec = self.wider(rhs);
        let rhs_mant = if negate_rhs {
            -rhs.mant.clone()
        } else {
            rhs.mant.clone()
        };
        if rhs.mant.is_zero() {
            return Self::from_parts(self.mant.clone(), self.exp, prec);
        }
        if self.mant.is_zero() {
            return Self::from_parts(rhs_mant, rhs.exp, prec);
        }
        let (big_m, big_e, small_m, small_e) = if self.top() >= rhs.top() {
            (self.mant.clone(), self.exp, rhs_mant, rhs.exp)
        } else {
            (rhs_mant, rhs.exp, self.mant.clone(), self.exp)
        };
        let small_top = small_e + small_m.bits() as i64;
        let big_top = big_e + big_m.bits() as i64;
        let ulp = big_top - i64::from(prec.0);
        if small_top < ulp - 2 {
            // The smaller operand is below a quarter ulp of the larger; only
            // its sign can influence rounding, so a sticky unit stands in.
            let base = ulp - 3;
            let shifted = big_m << (big_e - base) as usize;
            let nudge = if small_m.sign() == Sign::Minus { -1 } else { 1 };
            return Self::from_parts(shifted + nudge, base, prec);
        }
        let e = big_e.min(small_e);
        let sum = (big_m << (big_e - e) as usize) + (small_m << (small_e - e) as usize);
        Self::from_parts(sum, e, prec)
    }

    /// Correctly rounded `num / den` of two nonzero-denominator integers.
    fn quotient(num: &BigInt, den: &BigInt, exp: i64, prec: Precision) -> Self {
        assert!(!den.is_zero(), "BigFloat division by zero");
        if num.is_zero() {
            return Self::zero_with(prec);
        }
        let neg = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
        let n = num.magnitude();
        let d = den.magnitude();
        // Quotient must carry at least prec + 2 bits before the sticky bit.
        let shift = (i64::from(prec.0) + 2 + d.bits() as i64 - n.bits() as i64).max(0);
        let scaled = n << shift as usize;
        let (q, r) = num_integer::Integer::div_rem(&scaled, d);
        let sticky = u32::from(!r.is_zero());
        let q = (q << 1usize) + sticky;
        Self::round(neg, q, exp - shift - 1, prec)
    }

    fn to_rational_exact(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            let den = BigInt::from(1u8) << (-self.exp) as usize;
            BigRational::new(self.mant.clone(), den)
        }
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BigFloat({}*2^{}, p={})",
            self.mant, self.exp, self.prec.0
        )
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::format_f64(self.to_f64()))
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.mant == other.mant && self.exp == other.exp
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.add_impl(other, true);
        Some(match diff.mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        })
    }
}

impl Scalar for BigFloat {
    type Ctx = Precision;

    fn ctx(&self) -> Precision {
        self.prec
    }

    fn regime(ctx: Precision) -> Regime {
        Regime::BigFloat {
            mantissa_bits: ctx.0,
        }
    }

    fn zero(ctx: Precision) -> Self {
        Self::zero_with(ctx)
    }

    fn one(ctx: Precision) -> Self {
        Self::from_i64(1, ctx)
    }

    fn from_i64(v: i64, ctx: Precision) -> Self {
        Self::from_parts(BigInt::from(v), 0, ctx)
    }

    fn pow2(k: i64, ctx: Precision) -> Self {
        BigFloat {
            mant: BigInt::from(1u8),
            exp: k,
            prec: ctx,
        }
    }

    fn from_f64(v: f64, ctx: Precision) -> Self {
        // Every binary64 fits in 53 <= MIN_MANTISSA_BITS bits.
        Self::from_rational(&rational_from_f64(v), ctx)
    }

    fn from_rational(r: &BigRational, ctx: Precision) -> Self {
        Self::quotient(r.numer(), r.denom(), 0, ctx)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.to_rational_exact())
    }

    fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        if self.mant.bits() <= 53 && (-1022..=971).contains(&self.exp) {
            let m = self.mant.to_f64().expect("53-bit mantissa");
            return m * 2f64.powi(self.exp as i32);
        }
        ToPrimitive::to_f64(&self.to_rational_exact()).unwrap_or(f64::NAN)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.add_impl(rhs, false)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add_impl(rhs, true)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self::from_parts(&self.mant * &rhs.mant, self.exp + rhs.exp, self.wider(rhs))
    }

    fn div(&self, rhs: &Self) -> Self {
        Self::quotient(&self.mant, &rhs.mant, self.exp - rhs.exp, self.wider(rhs))
    }

    fn neg(&self) -> Self {
        BigFloat {
            mant: -self.mant.clone(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    fn abs(&self) -> Self {
        BigFloat {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn log10_abs(&self) -> f64 {
        if self.mant.is_zero() {
            return f64::NEG_INFINITY;
        }
        log10_abs_bigint(&self.mant) + self.exp as f64 * std::f64::consts::LOG10_2
    }

    fn mantissa_bits(ctx: Precision) -> Option<u32> {
        Some(ctx.0)
    }

    fn abs_gt(&self, other: &Self) -> bool {
        if self.mant.is_zero() {
            return false;
        }
        if other.mant.is_zero() {
            return true;
        }
        match self.top().cmp(&other.top()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.abs() > other.abs(),
        }
    }
}

impl Real for BigFloat {
    fn sqrt(&self) -> Self {
        assert!(
            self.mant.sign() != Sign::Minus,
            "square root of a negative BigFloat"
        );
        if self.mant.is_zero() {
            return self.clone();
        }
        let p = i64::from(self.prec.0);
        let mag = self.mant.magnitude();
        // Scale so the integer root has at least p + 2 bits and the exponent is even.
        let mut shift = (2 * p + 4 - mag.bits() as i64).max(0);
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let scaled = mag << shift as usize;
        let root = scaled.sqrt();
        let sticky = u32::from(&root * &root != scaled);
        let q = (root << 1usize) + sticky;
        Self::round(false, q, (self.exp - shift) / 2 - 1, self.prec)
    }
}
