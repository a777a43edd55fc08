//! Outward-rounded ball arithmetic in center-radius form.
//!
//! A [`Ball`] carries a dyadic center and a non-negative dyadic radius and
//! encloses every real in `[center - radius, center + radius]`. Ring
//! operations on dyadics are exact, so enclosure is preserved without any
//! rounding; the only radius growth outside of `+ - *` happens in
//! [`Ball::compress`], [`Ball::mul_rational`] and [`Ball::from_rational`],
//! which account for their rounding error explicitly.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    center: Dyadic,
    radius: Dyadic,
}

impl Ball {
    pub fn new(center: Dyadic, radius: Dyadic) -> Self {
        assert!(!radius.is_negative(), "ball radius must be non-negative");
        Ball { center, radius }
    }

    pub fn exact(center: Dyadic) -> Self {
        Ball {
            center,
            radius: Dyadic::zero(),
        }
    }

    pub fn zero() -> Self {
        Ball::exact(Dyadic::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Ball::exact(Dyadic::from_int(n))
    }

    /// Encloses a rational with radius at most `2^-g` (radius 0 for dyadics).
    pub fn from_rational(x: &Rational, g: u32) -> Self {
        if let Some(d) = Dyadic::try_from_rational(x) {
            return Ball::exact(d);
        }
        let center = Dyadic::from_rational(x, g + 2, Round::Nearest);
        Ball {
            center,
            radius: Dyadic::power_of_two(-(g as i64 + 2)),
        }
    }

    pub fn center(&self) -> &Dyadic {
        &self.center
    }

    pub fn radius(&self) -> &Dyadic {
        &self.radius
    }

    pub fn radius_rational(&self) -> Rational {
        self.radius.to_rational()
    }

    /// Lower endpoint `center - radius` (exact dyadic).
    pub fn inf(&self) -> Dyadic {
        &self.center - &self.radius
    }

    /// Upper endpoint `center + radius` (exact dyadic).
    pub fn sup(&self) -> Dyadic {
        &self.center + &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        let d = x - self.center.to_rational();
        d.clone().abs() <= self.radius.to_rational()
    }

    /// True when the whole ball is strictly below `x`.
    pub fn strictly_below(&self, x: &Rational) -> bool {
        self.sup().to_rational() < *x
    }

    /// True when the whole ball is strictly above `x`.
    pub fn strictly_above(&self, x: &Rational) -> bool {
        self.inf().to_rational() > *x
    }

    pub fn neg(&self) -> Ball {
        Ball {
            center: -&self.center,
            radius: self.radius.clone(),
        }
    }

    pub fn add(&self, other: &Ball) -> Ball {
        Ball {
            center: &self.center + &other.center,
            radius: &self.radius + &other.radius,
        }
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        // |c1 c2 - t1 t2| <= |c1| r2 + |c2| r1 + r1 r2 for ti in the balls.
        let center = &self.center * &other.center;
        let radius = &(&(&self.center.abs() * &other.radius)
            + &(&other.center.abs() * &self.radius))
            + &(&self.radius * &other.radius);
        Ball { center, radius }
    }

    pub fn sq(&self) -> Ball {
        self.mul(self)
    }

    /// Exact scaling by a dyadic factor.
    pub fn scale_dyadic(&self, f: &Dyadic) -> Ball {
        Ball {
            center: &self.center * f,
            radius: &self.radius * &f.abs(),
        }
    }

    /// Exact scaling by `2^k`.
    pub fn shift(&self, k: i64) -> Ball {
        Ball {
            center: self.center.shift(k),
            radius: self.radius.shift(k),
        }
    }

    /// Scaling by an arbitrary rational; the center is rounded onto the grid
    /// `2^-(g+2)` and the rounding error is absorbed into the radius, so the
    /// result still encloses `q * t` for every `t` in the ball.
    pub fn mul_rational(&self, q: &Rational, g: u32) -> Ball {
        if let Some(d) = Dyadic::try_from_rational(q) {
            return self.scale_dyadic(&d);
        }
        let exact_center = self.center.to_rational() * q;
        let center = Dyadic::from_rational(&exact_center, g + 2, Round::Nearest);
        let scaled_radius = self.radius.to_rational() * q.clone().abs();
        let radius_up = Dyadic::from_rational(&scaled_radius, g + 2, Round::Up);
        let radius = &radius_up + &Dyadic::power_of_two(-(g as i64 + 2));
        Ball { center, radius }
    }

    /// Rounds the center onto the grid `2^-(g+3)` and folds the rounding
    /// error into the radius; the radius itself is rounded up onto the same
    /// grid. Total radius growth is below `2^-(g+1)`.
    pub fn compress(&self, g: u32) -> Ball {
        let grid = g + 3;
        let center = self.center.round_to_grid(grid, Round::Nearest);
        let err = (&self.center - &center).abs();
        let radius = (&self.radius + &err).round_to_grid(grid, Round::Up);
        Ball { center, radius }
    }

    /// Fractional part, defined only when the ball stays clear of integers.
    ///
    /// With radius zero an integer center reduces to zero; with positive
    /// radius any enclosed integer is an error, because membership of the
    /// enclosed real in `[0,1)`-intervals could not be decided.
    pub fn frac(&self) -> Result<Ball> {
        let i = self.center.floor_int();
        let f = &self.center - &Dyadic::new(i, 0);
        if self.radius.is_zero() {
            return Ok(Ball::exact(f));
        }
        let one = Dyadic::one();
        if f <= self.radius || &f + &self.radius >= one {
            return Err(Error::StraddlesInteger);
        }
        Ok(Ball {
            center: f,
            radius: self.radius.clone(),
        })
    }

    /// Reduction modulo one onto `[-1/2, 1/2]`, which never fails; used for
    /// evaluating periodic functions where the branch does not matter.
    pub fn frac_centered(&self) -> Ball {
        let half = Dyadic::new(BigInt::from(1), -1);
        let n = (&self.center + &half).floor_int();
        Ball {
            center: &self.center - &Dyadic::new(n, 0),
            radius: self.radius.clone(),
        }
    }
}

/// Rectangular complex enclosure: independent balls for the real and
/// imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        ComplexBall { re, im }
    }

    pub fn zero() -> Self {
        ComplexBall {
            re: Ball::zero(),
            im: Ball::zero(),
        }
    }

    pub fn one() -> Self {
        ComplexBall {
            re: Ball::from_int(1),
            im: Ball::zero(),
        }
    }

    pub fn add(&self, other: &ComplexBall) -> ComplexBall {
        ComplexBall {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &ComplexBall) -> ComplexBall {
        ComplexBall {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn mul(&self, other: &ComplexBall) -> ComplexBall {
        ComplexBall {
            re: self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            im: self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        }
    }

    pub fn mul_rational(&self, q: &Rational, g: u32) -> ComplexBall {
        ComplexBall {
            re: self.re.mul_rational(q, g),
            im: self.im.mul_rational(q, g),
        }
    }

    pub fn compress(&self, g: u32) -> ComplexBall {
        ComplexBall {
            re: self.re.compress(g),
            im: self.im.compress(g),
        }
    }

    /// Enclosure of `|z|^2` (exact dyadic endpoints).
    pub fn modulus_squared(&self) -> Ball {
        self.re.sq().add(&self.im.sq())
    }

    /// Enclosure `[lo, hi]` of `|z|` on the grid `2^-g`, with `lo >= 0`.
    pub fn modulus_bounds(&self, g: u32) -> (Dyadic, Dyadic) {
        let m2 = self.modulus_squared();
        let inf = m2.inf();
        let lo = if inf.is_negative() {
            Dyadic::zero()
        } else {
            inf.sqrt_grid(g).0
        };
        let hi = m2.sup().sqrt_grid(g).1;
        (lo, hi)
    }

    /// Total radius `r_re + r_im`, an upper bound on the modulus deviation.
    pub fn radius_sum(&self) -> Dyadic {
        self.re.radius() + self.im.radius()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2, rat};

    fn ball(c: Rational, r: Rational) -> Ball {
        Ball::new(
            Dyadic::try_from_rational(&c).unwrap(),
            Dyadic::try_from_rational(&r).unwrap(),
        )
    }

    #[test]
    fn frac_examples() {
        // Exact half-integer.
        let b = Ball::from_rational(&rat(7, 2), 10);
        assert_eq!(b.frac().unwrap(), ball(rat(1, 2), rat(0, 1)));
        // Negative input follows x - floor(x).
        let b = Ball::from_rational(&rat(-1, 4), 10);
        assert_eq!(b.frac().unwrap(), ball(rat(3, 4), rat(0, 1)));
        // Exact integer reduces to zero at radius zero...
        let b = Ball::from_int(3);
        assert_eq!(b.frac().unwrap(), Ball::zero());
        // ...but any positive radius around an integer straddles.
        let b = Ball::new(Dyadic::from_int(3), Dyadic::power_of_two(-10));
        assert_eq!(b.frac(), Err(Error::StraddlesInteger));
    }

    #[test]
    fn frac_straddle_on_upper_edge() {
        let b = ball(rat(127, 128), rat(1, 64));
        assert_eq!(b.frac(), Err(Error::StraddlesInteger));
    }

    #[test]
    fn frac_centered_never_fails() {
        let b = Ball::new(Dyadic::from_int(3), Dyadic::power_of_two(-10));
        let t = b.frac_centered();
        assert!(t.center().is_zero());
        let b = ball(rat(7, 8), rat(1, 64));
        assert_eq!(t.radius(), &Dyadic::power_of_two(-10));
        assert_eq!(b.frac_centered().center().to_rational(), rat(-1, 8));
    }

    #[test]
    fn mul_contains_products() {
        let a = ball(rat(3, 4), rat(1, 16));
        let b = ball(rat(-5, 8), rat(1, 32));
        let prod = a.mul(&b);
        // Corner products of the operand intervals all land inside.
        for ta in [rat(3, 4) - rat(1, 16), rat(3, 4) + rat(1, 16)] {
            for tb in [rat(-5, 8) - rat(1, 32), rat(-5, 8) + rat(1, 32)] {
                assert!(prod.contains_rational(&(ta.clone() * tb)));
            }
        }
    }

    #[test]
    fn compress_keeps_enclosure_and_bounds_growth() {
        // Center with a 26-bit mantissa, off the compression grid.
        let center = rat((1 << 25) + 1, 1 << 25);
        let a = ball(center.clone(), rat(1, 1 << 20));
        let c = a.compress(16);
        assert!(c.radius().to_rational() <= a.radius().to_rational() + pow2(-17));
        // Everything the original encloses stays enclosed.
        assert!(c.contains_rational(&center));
        assert!(c.contains_rational(&(center + rat(1, 1 << 21))));
    }

    #[test]
    fn from_rational_radius_bound() {
        let b = Ball::from_rational(&rat(1, 3), 20);
        assert!(b.contains_rational(&rat(1, 3)));
        assert!(b.radius().to_rational() <= pow2(-20));
        assert!(Ball::from_rational(&rat(5, 8), 20).is_exact());
    }

    #[test]
    fn modulus_squared_and_bounds() {
        let z = ComplexBall::new(
            Ball::from_rational(&rat(3, 5), 40),
            Ball::from_rational(&rat(4, 5), 40),
        );
        let m2 = z.modulus_squared();
        assert!(m2.contains_rational(&rat(1, 1)));
        let (lo, hi) = z.modulus_bounds(30);
        assert!(lo.to_rational() <= rat(1, 1));
        assert!(hi.to_rational() >= rat(1, 1));
        assert!(hi.to_rational() - lo.to_rational() <= pow2(-28));
    }
}
