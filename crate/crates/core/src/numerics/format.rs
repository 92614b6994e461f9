//! Text rendering shared by every file format the crate writes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shortest round-trip decimal for a binary64 value.
///
/// Positional notation for magnitudes in `[1e-5, 1e16)`, scientific
/// otherwise; `inf`, `-inf` and `nan` for non-finite values. The output
/// always parses back to the identical bit pattern.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or an integer exactly; anything else is read as a binary64
/// decimal and promoted exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(i) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(i));
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    BigRational::from_float(v).ok_or_else(|| Error::Parse(format!("non-finite value {s:?}")))
}

pub(crate) fn log10_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift as usize).to_f64().expect("64-bit head");
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// `log10 |r|` without overflowing binary64 for huge numerators or denominators.
pub fn log10_abs_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    let v = r.to_f64().unwrap_or(0.0).abs();
    if v.is_normal() && v < 1e300 {
        return v.log10();
    }
    log10_abs_bigint(r.numer()) - log10_abs_bigint(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for v in [
            0.0,
            1.0,
            -2.5,
            1e-8,
            8.60206,
            6.338253001141147e29,
            1e300,
            5e-324,
            0.1,
        ] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(1e-8), "1e-8");
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(f64::NAN), "nan");
    }

    #[test]
    fn rational_text() {
        let r = parse_rational("-6/4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert_eq!(
            parse_rational("0.5").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn log10_of_huge_rationals() {
        let big = BigRational::from_integer(BigInt::from(1u8) << 5000usize);
        assert!((log10_abs_rational(&big) - 5000.0 * std::f64::consts::LOG10_2).abs() < 1e-9);
        let tiny = BigRational::new(3.into(), BigInt::from(1u8) << 5000usize);
        let want = 3f64.log10() - 5000.0 * std::f64::consts::LOG10_2;
        assert!((log10_abs_rational(&tiny) - want).abs() < 1e-9);
    }
}
