//! Arbitrary-precision dyadic numbers `mantissa * 2^exponent`.
//!
//! Canonical form: the mantissa is odd or zero (zero carries exponent 0), so
//! equality is syntactic. Addition, subtraction and multiplication are exact;
//! rounding happens only in the explicit grid operations
//! ([`Dyadic::round_to_grid`], [`Dyadic::div_grid`], [`Dyadic::sqrt_grid`]),
//! which round onto the absolute grid `2^-g` in a caller-chosen direction.

use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use alloc::string::String;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{decimal_string, Rational};

/// Rounding direction for grid operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Toward minus infinity.
    Down,
    /// Toward plus infinity.
    Up,
    /// To the nearest grid point, ties away from zero resolved upward.
    Nearest,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    /// Builds `mantissa * 2^exponent` in canonical form.
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        let mut m = mantissa;
        let mut e = exponent;
        if m.is_zero() {
            return Dyadic {
                mantissa: m,
                exponent: 0,
            };
        }
        let tz = m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            m >>= tz;
            e += tz as i64;
        }
        Dyadic {
            mantissa: m,
            exponent: e,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `2^e`.
    pub fn power_of_two(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` (exact).
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Number of significant bits of the mantissa.
    pub fn mantissa_bits(&self) -> u64 {
        self.mantissa.bits()
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << (self.exponent as usize))
        } else {
            Rational::new(
                self.mantissa.clone(),
                BigInt::one() << ((-self.exponent) as usize),
            )
        }
    }

    /// Exact conversion when the rational is dyadic.
    pub fn try_from_rational(x: &Rational) -> Option<Self> {
        let denom = x.denom();
        if denom.is_one() {
            return Some(Dyadic::new(x.numer().clone(), 0));
        }
        // A reduced denominator that is a power of two has a single set bit.
        let bits = denom.bits();
        if denom == &(BigInt::one() << ((bits - 1) as usize)) {
            Some(Dyadic::new(x.numer().clone(), -((bits - 1) as i64)))
        } else {
            None
        }
    }

    /// Rounds a rational onto the grid `2^-g` in the given direction.
    pub fn from_rational(x: &Rational, g: u32, mode: Round) -> Self {
        let shifted = x * crate::rational::pow2(g as i64);
        let m = match mode {
            Round::Down => shifted.numer().div_floor(shifted.denom()),
            Round::Up => shifted.numer().div_ceil(shifted.denom()),
            Round::Nearest => {
                let two_num = shifted.numer() << 1usize;
                let bumped = two_num + shifted.denom();
                bumped.div_floor(&(shifted.denom() << 1usize))
            }
        };
        Dyadic::new(m, -(g as i64))
    }

    /// Rounds onto the grid `2^-g`. Values already on the grid are returned
    /// unchanged; otherwise the rounding error is below `2^-g` (at most
    /// `2^-(g+1)` for `Nearest`).
    pub fn round_to_grid(&self, g: u32, mode: Round) -> Self {
        let sh = -(self.exponent + g as i64);
        if sh <= 0 || self.is_zero() {
            return self.clone();
        }
        let sh = sh as usize;
        let m = match mode {
            Round::Down => self.mantissa.div_floor(&(BigInt::one() << sh)),
            Round::Up => self.mantissa.div_ceil(&(BigInt::one() << sh)),
            Round::Nearest => {
                let bumped = &self.mantissa + (BigInt::one() << (sh - 1));
                bumped.div_floor(&(BigInt::one() << sh))
            }
        };
        Dyadic::new(m, -(g as i64))
    }

    /// `self / other` rounded onto the grid `2^-g`. Panics if `other` is zero.
    pub fn div_grid(&self, other: &Dyadic, g: u32, mode: Round) -> Self {
        assert!(!other.is_zero(), "division by zero dyadic");
        let sh = self.exponent - other.exponent + g as i64;
        let (num, den) = if sh >= 0 {
            (&self.mantissa << (sh as usize), other.mantissa.clone())
        } else {
            (
                self.mantissa.clone(),
                &other.mantissa << ((-sh) as usize),
            )
        };
        // Normalize the denominator sign so floor/ceil round in value order.
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let m = match mode {
            Round::Down => num.div_floor(&den),
            Round::Up => num.div_ceil(&den),
            Round::Nearest => ((num << 1usize) + &den).div_floor(&(&den << 1usize)),
        };
        Dyadic::new(m, -(g as i64))
    }

    /// Lower and upper grid-`2^-g` bounds of `sqrt(self)`; the enclosure has
    /// width `2^-g`. Panics if `self` is negative.
    pub fn sqrt_grid(&self, g: u32) -> (Dyadic, Dyadic) {
        assert!(!self.is_negative(), "square root of a negative dyadic");
        if self.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        // floor(sqrt(self) * 2^g) = floor(sqrt(mant * 2^(e + 2g))).
        let sh = self.exponent + 2 * g as i64;
        let m = if sh >= 0 {
            (&self.mantissa << (sh as usize)).sqrt()
        } else {
            // Shift up by an even amount to make the scaled value an integer,
            // then shift the root back down (floor commutes with halving the
            // exponent).
            let extra = ((-sh) as u64 + 1) & !1;
            let n = &self.mantissa << ((sh + extra as i64) as usize);
            n.sqrt() >> ((extra / 2) as usize)
        };
        let lo = Dyadic::new(m.clone(), -(g as i64));
        let hi = Dyadic::new(m + BigInt::one(), -(g as i64));
        (lo, hi)
    }

    /// Integer part rounded toward minus infinity.
    pub fn floor_int(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << (self.exponent as usize)
        } else {
            self.mantissa
                .div_floor(&(BigInt::one() << ((-self.exponent) as usize)))
        }
    }

    /// Decimal rendering for advisory output.
    pub fn decimal(&self, digits: u32) -> String {
        decimal_string(&self.to_rational(), digits)
    }

    fn cmp_value(&self, other: &Dyadic) -> Ordering {
        match (self.mantissa.sign(), other.mantissa.sign()) {
            (num_bigint::Sign::Minus, num_bigint::Sign::NoSign)
            | (num_bigint::Sign::Minus, num_bigint::Sign::Plus)
            | (num_bigint::Sign::NoSign, num_bigint::Sign::Plus) => return Ordering::Less,
            (num_bigint::Sign::Plus, num_bigint::Sign::NoSign)
            | (num_bigint::Sign::Plus, num_bigint::Sign::Minus)
            | (num_bigint::Sign::NoSign, num_bigint::Sign::Minus) => return Ordering::Greater,
            (num_bigint::Sign::NoSign, num_bigint::Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &other.mantissa << ((other.exponent - e) as usize);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &other.mantissa << ((other.exponent - e) as usize);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, other: &Dyadic) -> Dyadic {
        self + &(-other)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
        )
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: if self.mantissa.is_zero() { 0 } else { self.exponent },
        }
    }
}

impl core::fmt::Display for Dyadic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn canonical_form_is_odd_or_zero() {
        let d = Dyadic::new(BigInt::from(12), -2);
        assert_eq!(d.mantissa(), &BigInt::from(3));
        assert_eq!(d.exponent(), 0);
        let z = Dyadic::new(BigInt::zero(), 42);
        assert_eq!(z.exponent(), 0);
        assert!(z.is_zero());
    }

    #[test]
    fn exact_ring_ops() {
        let a = Dyadic::new(BigInt::from(3), -2); // 3/4
        let b = Dyadic::new(BigInt::from(5), -3); // 5/8
        assert_eq!((&a + &b).to_rational(), rat(11, 8));
        assert_eq!((&a - &b).to_rational(), rat(1, 8));
        assert_eq!((&a * &b).to_rational(), rat(15, 32));
    }

    #[test]
    fn grid_rounding_directions() {
        let x = Dyadic::new(BigInt::from(5), -3); // 0.625
        let down = x.round_to_grid(1, Round::Down);
        let up = x.round_to_grid(1, Round::Up);
        let near = x.round_to_grid(1, Round::Nearest);
        assert_eq!(down.to_rational(), rat(1, 2));
        assert_eq!(up.to_rational(), rat(1, 1));
        assert_eq!(near.to_rational(), rat(1, 2));
        // Exact tie rounds up.
        let tie = Dyadic::new(BigInt::from(3), -2); // 0.75
        assert_eq!(tie.round_to_grid(1, Round::Nearest).to_rational(), rat(1, 1));
        // Already on the grid: unchanged.
        assert_eq!(x.round_to_grid(3, Round::Down), x);
    }

    #[test]
    fn grid_rounding_negative_values() {
        let x = Dyadic::new(BigInt::from(-5), -3); // -0.625
        assert_eq!(x.round_to_grid(1, Round::Down).to_rational(), rat(-1, 1));
        assert_eq!(x.round_to_grid(1, Round::Up).to_rational(), rat(-1, 2));
    }

    #[test]
    fn sqrt_grid_encloses() {
        let two = Dyadic::from_int(2);
        let (lo, hi) = two.sqrt_grid(20);
        let lo_q = lo.to_rational();
        let hi_q = hi.to_rational();
        assert!(&lo_q * &lo_q <= rat(2, 1));
        assert!(&hi_q * &hi_q >= rat(2, 1));
        assert_eq!(hi_q - lo_q, crate::rational::pow2(-20));
    }

    #[test]
    fn div_grid_directions() {
        let one = Dyadic::one();
        let three = Dyadic::from_int(3);
        let lo = one.div_grid(&three, 10, Round::Down);
        let hi = one.div_grid(&three, 10, Round::Up);
        assert!(lo.to_rational() <= rat(1, 3));
        assert!(hi.to_rational() >= rat(1, 3));
        assert!((hi.to_rational() - lo.to_rational()) <= crate::rational::pow2(-10));
        // Negative divisor keeps value ordering.
        let neg = one.div_grid(&Dyadic::from_int(-3), 10, Round::Down);
        assert!(neg.to_rational() <= rat(-1, 3));
    }

    #[test]
    fn floor_int_handles_negatives() {
        assert_eq!(
            Dyadic::new(BigInt::from(-5), -2).floor_int(),
            BigInt::from(-2)
        );
        assert_eq!(Dyadic::new(BigInt::from(5), -2).floor_int(), BigInt::from(1));
        assert_eq!(Dyadic::from_int(7).floor_int(), BigInt::from(7));
    }

    #[test]
    fn ordering_across_exponents() {
        let a = Dyadic::new(BigInt::from(1), 10);
        let b = Dyadic::new(BigInt::from(1023), 0);
        assert!(a > b);
        assert!(-&a < b);
    }
}
