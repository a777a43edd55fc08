//! Certified enclosures of pi, `e(x) = exp(2 pi i x)` and natural logarithms.
//!
//! `e(x)` is evaluated by reduction modulo one onto `[-1/2, 1/2]` followed by
//! sine/cosine power series at the exact dyadic center; the alternating-series
//! remainder bounds the truncation error and the input radius enters through
//! the Lipschitz constant `2 pi`. Logarithms are produced as exact rational
//! enclosures from the `atanh` series after scaling into `[1, 2)`.

use core::cell::RefCell;

use alloc::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::ball::{Ball, ComplexBall};
use crate::dyadic::Dyadic;
use crate::rational::{pow2, rat, rat_int, Rational};

/// Rational enclosure `[lo, hi]` of `arctan(1/p)` with `hi - lo <= 2^-g`.
fn atan_inv(p: i64, g: u32) -> (Rational, Rational) {
    let threshold = pow2(-(g as i64));
    let p2 = rat_int(p * p);
    let mut sum = Rational::zero();
    let mut power = rat(1, p); // 1/p^(2k+1)
    let mut k: i64 = 0;
    loop {
        let term = &power / rat_int(2 * k + 1);
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        power /= &p2;
        let next = &power / rat_int(2 * k + 3);
        if next < threshold {
            // Alternating with decreasing terms: the remainder has the sign
            // of the first omitted term and is at most `next` in size.
            return if k % 2 == 0 {
                (sum.clone() - next, sum)
            } else {
                (sum.clone(), sum + next)
            };
        }
        k += 1;
    }
}

/// Ball containing pi with radius at most `2^-g`.
pub fn pi_ball(g: u32) -> Ball {
    // Machin: pi = 16 arctan(1/5) - 4 arctan(1/239).
    let (a_lo, a_hi) = atan_inv(5, g + 7);
    let (b_lo, b_hi) = atan_inv(239, g + 5);
    let lo = &a_lo * rat_int(16) - &b_hi * rat_int(4);
    let hi = &a_hi * rat_int(16) - &b_lo * rat_int(4);
    ball_from_bounds(&lo, &hi, g + 2)
}

/// Ball enclosing the rational interval `[lo, hi]`; the center is rounded
/// onto the `2^-(g+2)` grid and all rounding goes into the radius.
pub fn ball_from_bounds(lo: &Rational, hi: &Rational, g: u32) -> Ball {
    debug_assert!(lo <= hi);
    let mid = (lo + hi) / rat_int(2);
    let half_width = (hi - lo) / rat_int(2);
    let center = Dyadic::from_rational(&mid, g + 2, crate::dyadic::Round::Nearest);
    let center_err = (mid - center.to_rational()).abs();
    let radius = Dyadic::from_rational(&(half_width + center_err), g + 2, crate::dyadic::Round::Up);
    Ball::new(center, radius)
}

/// Rational enclosure `[lo, hi]` of `ln(x)` for `x > 0`, width at most `2^-g`.
pub fn ln_bounds(x: &Rational, g: u32) -> (Rational, Rational) {
    assert!(x.is_positive(), "ln of a non-positive rational");
    // Scale into [1, 2): x = 2^m * y.
    let mut m: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut y = x / pow2(m);
    while y >= rat_int(2) {
        y /= rat_int(2);
        m += 1;
    }
    while y < rat_int(1) {
        y *= rat_int(2);
        m -= 1;
    }
    let (y_lo, y_hi) = ln_reduced(&y, g + 2);
    if m == 0 {
        return (y_lo, y_hi);
    }
    // Absorb the factor m into the precision of the ln 2 enclosure.
    let extra = 64 - m.unsigned_abs().leading_zeros();
    let (l2_lo, l2_hi) = ln_reduced(&rat_int(2), g + 2 + extra);
    let mq = rat_int(m);
    if m > 0 {
        (&mq * l2_lo + y_lo, &mq * l2_hi + y_hi)
    } else {
        (&mq * l2_hi + y_lo, &mq * l2_lo + y_hi)
    }
}

/// `ln(y)` for `y` in `[1, 2]` via `2 atanh((y-1)/(y+1))`.
fn ln_reduced(y: &Rational, g: u32) -> (Rational, Rational) {
    let z = (y - rat_int(1)) / (y + rat_int(1));
    if z.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let z2 = &z * &z;
    let threshold = pow2(-(g as i64 + 2));
    let mut sum = Rational::zero();
    let mut power = z.clone();
    let mut k: i64 = 0;
    loop {
        sum += &power / rat_int(2 * k + 1);
        power *= &z2;
        // Tail: sum_{j>k} z^(2j+1)/(2j+1) <= z^(2k+3) / ((2k+3)(1-z^2)).
        let tail = &power / (rat_int(2 * k + 3) * (rat_int(1) - &z2));
        if tail < threshold {
            let lo = &sum * rat_int(2);
            let hi = (&sum + &tail) * rat_int(2);
            return (lo, hi);
        }
        k += 1;
    }
}

/// Evaluator for `e(x) = exp(2 pi i x)` at a fixed working precision, with a
/// memo table keyed by the reduced exact center. Build one per computation
/// and reuse it across the inner loops.
pub struct Trig {
    g: u32,
    pi: Ball,
    two_pi_upper: Rational,
    memo: RefCell<BTreeMap<Dyadic, ComplexBall>>,
    memo_limit: usize,
}

impl Trig {
    pub fn new(g: u32) -> Self {
        let pi = pi_ball(g + 8);
        let two_pi_upper = pi.sup().to_rational() * rat_int(2);
        Trig {
            g,
            pi,
            two_pi_upper,
            memo: RefCell::new(BTreeMap::new()),
            memo_limit: 1 << 17,
        }
    }

    pub fn precision(&self) -> u32 {
        self.g
    }

    /// Rational upper bound on `2 pi`.
    pub fn two_pi_upper(&self) -> &Rational {
        &self.two_pi_upper
    }

    /// `e(x)` for the enclosed value; component radii are at most
    /// `2^-g + 7 * radius(x)`.
    pub fn e(&self, x: &Ball) -> ComplexBall {
        let t = x.frac_centered();
        let out = self.e_of_dyadic(t.center());
        if t.radius().is_zero() {
            return out;
        }
        // Each component of e is 2 pi Lipschitz; 7 > 2 pi.
        let pad = &Dyadic::from_int(7) * t.radius();
        ComplexBall::new(
            Ball::new(out.re.center().clone(), out.re.radius() + &pad),
            Ball::new(out.im.center().clone(), out.im.radius() + &pad),
        )
    }

    /// `e(c)` at an exact dyadic argument, memoized on the reduced center.
    /// Long mantissas are not cached: they do not recur, and the table is
    /// size-capped to keep memory bounded on large scans.
    pub fn e_of_dyadic(&self, c: &Dyadic) -> ComplexBall {
        let reduced = Ball::exact(c.clone()).frac_centered();
        let c = reduced.center().clone();
        let cacheable = c.mantissa_bits() <= 64;
        if cacheable {
            if let Some(hit) = self.memo.borrow().get(&c) {
                return hit.clone();
            }
        }
        let val = self.e_series(&c);
        if cacheable {
            let mut memo = self.memo.borrow_mut();
            if memo.len() < self.memo_limit {
                memo.insert(c, val.clone());
            }
        }
        val
    }

    fn e_series(&self, c: &Dyadic) -> ComplexBall {
        // Exact quarter turns.
        if c.is_zero() {
            return ComplexBall::one();
        }
        let half = Dyadic::new(BigInt::from(1), -1);
        let quarter = Dyadic::new(BigInt::from(1), -2);
        if c.abs() == half {
            return ComplexBall::new(Ball::from_int(-1), Ball::zero());
        }
        if *c == quarter {
            return ComplexBall::new(Ball::zero(), Ball::from_int(1));
        }
        if *c == -&quarter {
            return ComplexBall::new(Ball::zero(), Ball::from_int(-1));
        }
        let theta = self.pi.shift(1).scale_dyadic(c);
        let (cos, sin) = cos_sin(&theta, self.g);
        ComplexBall::new(cos, sin)
    }
}

/// Simultaneous `(cos, sin)` of an enclosed angle with `|theta| <= pi + 1`,
/// each with radius at most `2^-g` plus the propagated input radius.
pub fn cos_sin(theta: &Ball, g: u32) -> (Ball, Ball) {
    let work = g + 8;
    let u = theta.sq().compress(work);
    let u_sup = u.sup().to_rational();
    let threshold = Dyadic::power_of_two(-(g as i64 + 4));

    let mut cos_acc = Ball::from_int(1);
    let mut sin_acc = theta.compress(work);
    let mut cos_term = Ball::from_int(1);
    let mut sin_term = sin_acc.clone();
    let mut k: i64 = 1;
    loop {
        // cos term k: theta^(2k) / (2k)!; sin term k: theta^(2k+1) / (2k+1)!
        cos_term = cos_term
            .mul(&u)
            .mul_rational(&rat(1, (2 * k - 1) * (2 * k)), work)
            .compress(work);
        sin_term = sin_term
            .mul(&u)
            .mul_rational(&rat(1, (2 * k) * (2 * k + 1)), work)
            .compress(work);
        if k % 2 == 1 {
            cos_acc = cos_acc.sub(&cos_term);
            sin_acc = sin_acc.sub(&sin_term);
        } else {
            cos_acc = cos_acc.add(&cos_term);
            sin_acc = sin_acc.add(&sin_term);
        }
        cos_acc = cos_acc.compress(work);
        sin_acc = sin_acc.compress(work);
        // Once the term magnitudes decrease, the alternating remainder is
        // bounded by the size of the last added term.
        let decreasing = u_sup < rat_int((2 * k + 1) * (2 * k + 2));
        let small =
            cos_term.sup().abs() < threshold && sin_term.sup().abs() < threshold;
        if decreasing && small {
            let pad_c = cos_term.sup().abs();
            let pad_s = sin_term.sup().abs();
            let cos_out = Ball::new(cos_acc.center().clone(), cos_acc.radius() + &pad_c);
            let sin_out = Ball::new(sin_acc.center().clone(), sin_acc.radius() + &pad_s);
            return (cos_out, sin_out);
        }
        k += 1;
    }
}
