//! Precision-indexed oracles for a fixed set of computable constants.
//!
//! An oracle answers `refine(g)` with a ball of radius at most `2^-g` around
//! its value, deterministically: the same `g` always returns the same ball,
//! and balls for different `g` all contain the value, hence intersect.
//!
//! Supported constants: rationals, `sqrt(r) + n` for rational `r >= 0` and
//! integer `n` (perfect squares are normalized away, so the square-root form
//! is always irrational), the golden ratio, and finite binary digit strings.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::ball::Ball;
use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::rational::{frac_exact, rat, Rational};

/// Default cap on refinement precision during digit extraction.
pub const DEFAULT_DIGIT_CAP: u32 = 1024;

/// A finite supply of binary digits of a fractional part.
///
/// When `dyadic` is set the expansion is declared to terminate: digits past
/// the end are zero and the value is the exact truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitString {
    bits: Vec<u8>,
    dyadic: bool,
}

impl DigitString {
    pub fn new(bits: Vec<u8>, dyadic: bool) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument(alloc::format!(
                "digit strings are binary; got a digit above 1"
            )));
        }
        Ok(DigitString { bits, dyadic })
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn parse(text: &str, dyadic: bool) -> Result<Self> {
        let mut bits = Vec::new();
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "unexpected character {c:?} in digit string"
                    )))
                }
            }
        }
        DigitString::new(bits, dyadic)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Exact dyadic truncation after `m` digits.
    fn truncation(&self, m: usize) -> Dyadic {
        let mut acc = BigInt::zero();
        for &b in &self.bits[..m] {
            acc = (acc << 1) + BigInt::from(b);
        }
        Dyadic::new(acc, -(m as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Rational(Rational),
    /// `sqrt(radicand) + offset`, radicand not a perfect square.
    Sqrt { radicand: Rational, offset: BigInt },
    GoldenRatio,
    Digits(DigitString),
}

/// A consistent producer of balls around one computable real.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealOracle {
    kind: OracleKind,
}

impl RealOracle {
    pub fn rational(x: Rational) -> Self {
        RealOracle {
            kind: OracleKind::Rational(x),
        }
    }

    /// `sqrt(r) + offset`; rejects negative radicands and normalizes perfect
    /// squares to the rational kind.
    pub fn sqrt(radicand: Rational, offset: i64) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::InvalidArgument(alloc::format!(
                "negative radicand {radicand}"
            )));
        }
        let p = radicand.numer();
        let q = radicand.denom();
        let sp = p.sqrt();
        let sq = q.sqrt();
        if &(&sp * &sp) == p && &(&sq * &sq) == q {
            return Ok(RealOracle::rational(
                Rational::new(sp, sq) + Rational::from_integer(BigInt::from(offset)),
            ));
        }
        Ok(RealOracle {
            kind: OracleKind::Sqrt {
                radicand,
                offset: BigInt::from(offset),
            },
        })
    }

    pub fn golden_ratio() -> Self {
        RealOracle {
            kind: OracleKind::GoldenRatio,
        }
    }

    pub fn digits(d: DigitString) -> Self {
        RealOracle {
            kind: OracleKind::Digits(d),
        }
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    /// The exact rational value, when known.
    pub fn as_rational(&self) -> Option<Rational> {
        match &self.kind {
            OracleKind::Rational(q) => Some(q.clone()),
            OracleKind::Digits(d) if d.dyadic => {
                Some(d.truncation(d.bits.len()).to_rational())
            }
            _ => None,
        }
    }

    /// True when the value is known to be irrational.
    pub fn is_irrational(&self) -> bool {
        matches!(self.kind, OracleKind::Sqrt { .. } | OracleKind::GoldenRatio)
    }

    /// For dyadic rationals `p / 2^k` (reduced), the exponent `k`.
    pub fn dyadic_exponent(&self) -> Option<u64> {
        match &self.kind {
            OracleKind::Rational(q) => {
                let bits = q.denom().bits();
                if q.denom() == &(BigInt::from(1) << ((bits - 1) as usize)) {
                    Some(bits - 1)
                } else {
                    None
                }
            }
            OracleKind::Digits(d) if d.dyadic => Some(d.bits.len() as u64),
            _ => None,
        }
    }

    /// Ball of radius at most `2^-g` around the value.
    pub fn refine(&self, g: u32) -> Result<Ball> {
        match &self.kind {
            OracleKind::Rational(q) => Ok(Ball::from_rational(q, g)),
            OracleKind::Sqrt { radicand, offset } => {
                let b = sqrt_ball(radicand, g);
                Ok(Ball::new(
                    b.center() + &Dyadic::new(offset.clone(), 0),
                    b.radius().clone(),
                ))
            }
            OracleKind::GoldenRatio => {
                // (1 + sqrt 5) / 2.
                let b = sqrt_ball(&rat(5, 1), g);
                Ok(Ball::new(
                    (b.center() + &Dyadic::one()).shift(-1),
                    b.radius().shift(-1),
                ))
            }
            OracleKind::Digits(d) => {
                let m = g as usize;
                if d.bits.len() >= m {
                    Ok(Ball::new(
                        d.truncation(m),
                        Dyadic::power_of_two(-(m as i64)),
                    ))
                } else if d.dyadic {
                    Ok(Ball::exact(d.truncation(d.bits.len())))
                } else {
                    Err(Error::DigitFileExhausted {
                        available: d.bits.len(),
                        needed: m,
                    })
                }
            }
        }
    }

    /// First `m` binary digits of the fractional part, using the exact path
    /// for rationals and certified refinement (capped at `cap` bits) for the
    /// rest.
    pub fn binary_digits(&self, m: usize, cap: u32) -> Result<Vec<u8>> {
        match &self.kind {
            OracleKind::Rational(q) => Ok(rational_digits(q, m)),
            OracleKind::Digits(d) => {
                if d.bits.len() >= m {
                    Ok(d.bits[..m].to_vec())
                } else if d.dyadic {
                    let mut out = d.bits.clone();
                    out.resize(m, 0);
                    Ok(out)
                } else {
                    Err(Error::DigitFileExhausted {
                        available: d.bits.len(),
                        needed: m,
                    })
                }
            }
            _ => self.digits_by_refinement(m, cap),
        }
    }

    /// Generic digit extraction through balls, usable for any oracle. Refuses
    /// to guess when the scaled value cannot be separated from an integer
    /// within the precision cap.
    pub fn digits_by_refinement(&self, m: usize, cap: u32) -> Result<Vec<u8>> {
        let mut g = (m as u32).saturating_add(16);
        loop {
            if g > cap {
                return Err(Error::AmbiguousDigit { position: m, cap });
            }
            let b = self.refine(g)?;
            if let Some(d) = digits_of_ball(&b, m) {
                return Ok(d);
            }
            g = g.saturating_mul(2);
        }
    }
}

/// Digits of the fractional part when `2^m x` separates from the integer
/// grid; `None` asks for more precision.
pub fn digits_of_ball(b: &Ball, m: usize) -> Option<Vec<u8>> {
    let scaled = b.shift(m as i64);
    let fl = scaled.inf().floor_int();
    if fl != scaled.sup().floor_int() {
        return None;
    }
    // Digits are the low m bits of floor(2^m x) modulo 2^m.
    let frac_scaled = fl.mod_floor(&(BigInt::from(1) << m));
    let mut out = Vec::with_capacity(m);
    for j in (0..m).rev() {
        out.push(if frac_scaled.bit(j as u64) { 1 } else { 0 });
    }
    Some(out)
}

/// Digits of `{x}` for a rational by long division; exact, never ambiguous.
fn rational_digits(x: &Rational, m: usize) -> Vec<u8> {
    let f = frac_exact(x);
    let mut num = f.numer().clone();
    let den = f.denom().clone();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        num <<= 1;
        if num >= den {
            out.push(1);
            num -= &den;
        } else {
            out.push(0);
        }
    }
    out
}

/// Dyadic ball around `sqrt(r)` with radius at most `2^-g`, produced from the
/// integer square root of `numer * denom` scaled onto a grid.
fn sqrt_ball(r: &Rational, g: u32) -> Ball {
    let grid = g + 2;
    let n = r.numer() * r.denom();
    // sqrt(p/q) = sqrt(p q) / q.
    let (s_lo, s_hi) = Dyadic::new(n, 0).sqrt_grid(grid);
    let den = Dyadic::new(r.denom().clone(), 0);
    let lo = s_lo.div_grid(&den, grid, Round::Down);
    let hi = s_hi.div_grid(&den, grid, Round::Up);
    let center = (&lo + &hi).shift(-1);
    let radius = (&hi - &lo).shift(-1);
    Ball::new(center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2, rat_int};

    #[test]
    fn rational_oracle_contains_value() {
        let o = RealOracle::rational(rat(1, 3));
        let b = o.refine(4).unwrap();
        assert!(b.contains_rational(&rat(1, 3)));
        assert!(b.radius().to_rational() <= pow2(-4));
    }

    #[test]
    fn sqrt_oracle_certified_by_squaring() {
        let o = RealOracle::sqrt(rat_int(2), 0).unwrap();
        let b = o.refine(10).unwrap();
        assert!(b.radius().to_rational() <= pow2(-10));
        // The square of the enclosure must contain 2.
        assert!(b.sq().contains_rational(&rat_int(2)));
        let b = o.refine(200).unwrap();
        assert!(b.sq().contains_rational(&rat_int(2)));
        assert!(b.radius().to_rational() <= pow2(-200));
    }

    #[test]
    fn perfect_squares_normalize_to_rationals() {
        let o = RealOracle::sqrt(rat(9, 4), -1).unwrap();
        assert_eq!(o.as_rational(), Some(rat(1, 2)));
        assert!(!o.is_irrational());
        assert!(RealOracle::sqrt(rat(-1, 1), 0).is_err());
    }

    #[test]
    fn golden_ratio_satisfies_its_equation() {
        let o = RealOracle::golden_ratio();
        let b = o.refine(100).unwrap();
        // phi^2 = phi + 1.
        let diff = b.sq().sub(&b.add(&Ball::from_int(1)));
        assert!(diff.contains_rational(&Rational::zero()));
    }

    #[test]
    fn oracle_consistency_across_precisions() {
        let oracles = [
            RealOracle::rational(rat(22, 7)),
            RealOracle::sqrt(rat_int(2), -1).unwrap(),
            RealOracle::golden_ratio(),
        ];
        for o in &oracles {
            let mut prev: Option<Ball> = None;
            for g in [3u32, 17, 64, 128, 256] {
                let b = o.refine(g).unwrap();
                if let Some(p) = &prev {
                    // Balls around the same value intersect.
                    assert!(b.sub(p).contains_rational(&Rational::zero()));
                }
                prev = Some(b);
            }
        }
    }

    #[test]
    fn digit_oracle_truncations() {
        let d = DigitString::parse("0101", false).unwrap();
        let o = RealOracle::digits(d);
        let b = o.refine(4).unwrap();
        assert_eq!(b.center().to_rational(), rat(5, 16));
        assert_eq!(b.radius().to_rational(), pow2(-4));
        assert_eq!(
            o.refine(20),
            Err(Error::DigitFileExhausted {
                available: 4,
                needed: 20
            })
        );
        // Declared dyadic: exact beyond the listed digits.
        let d = DigitString::parse("101", true).unwrap();
        let o = RealOracle::digits(d);
        assert_eq!(
            o.refine(20).unwrap(),
            Ball::exact(Dyadic::new(BigInt::from(5), -3))
        );
    }

    #[test]
    fn digits_by_long_division() {
        let o = RealOracle::rational(rat(1, 3));
        assert_eq!(o.binary_digits(6, 64).unwrap(), [0, 1, 0, 1, 0, 1]);
        let o = RealOracle::rational(rat(2, 3));
        assert_eq!(o.binary_digits(6, 64).unwrap(), [1, 0, 1, 0, 1, 0]);
        let o = RealOracle::rational(rat(5, 8));
        assert_eq!(o.binary_digits(3, 64).unwrap(), [1, 0, 1]);
        // Digits of the fractional part for a negative rational.
        let o = RealOracle::rational(rat(-1, 3)); // frac = 2/3
        assert_eq!(o.binary_digits(4, 64).unwrap(), [1, 0, 1, 0]);
    }

    #[test]
    fn refinement_digits_match_reference() {
        let o = RealOracle::sqrt(rat_int(2), -1).unwrap();
        let by_ref = o.binary_digits(20, 256).unwrap();
        // sqrt(2) - 1 = 0.41421356... = 0.01101010000010011110... in binary.
        assert_eq!(
            by_ref,
            [0, 1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1, 0]
        );
    }

    #[test]
    fn dyadic_boundary_refuses_to_guess() {
        // Exact paths have no trouble at the boundary.
        let o = RealOracle::rational(rat(1, 2));
        assert_eq!(o.binary_digits(3, 64).unwrap(), [1, 0, 0]);
        assert_eq!(o.digits_by_refinement(3, 64).unwrap(), [1, 0, 0]);
        // A near-dyadic digit source that is not declared dyadic can never
        // separate the value from 1/2, so refinement must refuse at the cap.
        let half_ish = DigitString::parse(&"1".chars().chain("0".repeat(100).chars()).collect::<alloc::string::String>(), false).unwrap();
        let o = RealOracle::digits(half_ish);
        assert_eq!(
            o.digits_by_refinement(3, 64),
            Err(Error::AmbiguousDigit { position: 3, cap: 64 })
        );
    }

    #[test]
    fn truncation_error_below_two_to_minus_m() {
        let o = RealOracle::sqrt(rat_int(3), 0).unwrap();
        let m = 40;
        let digits = o.binary_digits(m, 256).unwrap();
        let mut acc = BigInt::zero();
        for &b in &digits {
            acc = (acc << 1) + BigInt::from(b);
        }
        let trunc = Rational::new(acc, BigInt::from(1) << m);
        // 0.d1..dm <= {x} < 0.d1..dm + 2^-m, checked against a finer ball.
        let fine = o.refine(200).unwrap();
        let frac = fine.frac().unwrap();
        assert!(frac.inf().to_rational() >= trunc.clone() - pow2(-(m as i64)));
        assert!(frac.sup().to_rational() <= trunc + pow2(-(m as i64)) * rat_int(2));
    }

    #[test]
    fn dyadic_exponent_detection() {
        assert_eq!(RealOracle::rational(rat(5, 8)).dyadic_exponent(), Some(3));
        assert_eq!(RealOracle::rational(rat(1, 3)).dyadic_exponent(), None);
        assert_eq!(RealOracle::rational(rat_int(7)).dyadic_exponent(), Some(0));
    }
}
