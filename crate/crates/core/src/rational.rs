//! Exact rational arithmetic.
//!
//! `Rational` is `num_rational::BigRational`: arbitrary-precision, always in
//! canonical form (positive denominator, reduced). This module adds the
//! handful of helpers the rest of the crate needs: construction from machine
//! integers, floor and fractional part, powers of two, parsing and formatting
//! of the `"p/q"` wire form.

use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `p / q` as a rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` for any sign of `e`.
pub fn pow2(e: i64) -> Rational {
    let one = BigInt::one();
    if e >= 0 {
        Rational::from_integer(one << (e as usize))
    } else {
        Rational::new(one, BigInt::one() << ((-e) as usize))
    }
}

/// Exact integer part rounded toward minus infinity.
pub fn floor_int(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Exact fractional part `x - floor(x)`, always in `[0, 1)`.
pub fn frac_exact(x: &Rational) -> Rational {
    x - Rational::from_integer(floor_int(x))
}

/// Parses the `"p/q"` form; a bare integer is accepted as `p/1`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(alloc::format!("bad rational {s:?}")))?;
    let q: BigInt = q
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(alloc::format!("bad rational {s:?}")))?;
    if q.is_zero() {
        return Err(Error::InvalidArgument(alloc::format!(
            "zero denominator in {s:?}"
        )));
    }
    Ok(Rational::new(p, q))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with `digits` places, rounded toward zero, for advisory
/// output columns. Exact fields use [`format_rational`].
pub fn decimal_string(x: &Rational, digits: u32) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (int_part, frac_part) = scaled.div_rem(&scale);
    let mut frac = frac_part.to_string();
    while (frac.len() as u32) < digits {
        frac.insert(0, '0');
    }
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        alloc::format!("{sign}{int_part}")
    } else {
        alloc::format!("{sign}{int_part}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_exact_examples() {
        assert_eq!(frac_exact(&rat(7, 3)), rat(1, 3));
        assert_eq!(frac_exact(&rat(-1, 3)), rat(2, 3));
        assert_eq!(frac_exact(&rat_int(5)), rat_int(0));
    }

    #[test]
    fn frac_plus_floor_reconstructs() {
        for (p, q) in [(7, 3), (-9, 4), (0, 1), (22, 7), (-1, 1)] {
            let x = rat(p, q);
            let back = frac_exact(&x) + Rational::from_integer(floor_int(&x));
            assert_eq!(back, x);
        }
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/3", "-7/2", "5", "0"] {
            let x = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(1, 3), 4), "0.3333");
        assert_eq!(decimal_string(&rat(-1, 2), 2), "-0.50");
        assert_eq!(decimal_string(&rat_int(3), 0), "3");
    }

    #[test]
    fn pow2_signs() {
        assert_eq!(pow2(3), rat_int(8));
        assert_eq!(pow2(-2), rat(1, 4));
        assert_eq!(pow2(0), rat_int(1));
    }
}
