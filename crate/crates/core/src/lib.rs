//! Exact-arithmetic toolkit for uniform distribution modulo one.
//!
//! The crate is organized around a small numeric substrate and the
//! constructions built on top of it:
//!
//! - [`dyadic`] / [`rational`] / [`ball`]: arbitrary-precision dyadic and
//!   rational numbers, and outward-rounded ball arithmetic. Dyadic addition
//!   and multiplication are exact; rounding happens only at explicit
//!   precision-compression points, where the error is added to the radius.
//! - [`oracle`]: precision-indexed producers of balls for a fixed set of
//!   computable constants (rationals, square roots with an integer offset,
//!   the golden ratio, binary digit strings), plus certified binary digit
//!   extraction.
//! - [`trig`]: certified enclosures of pi, `e(x) = exp(2 pi i x)`, and
//!   natural logarithms with directed rounding.
//! - [`intervals`]: finite unions of half-open rational intervals with exact
//!   measure, set algebra, fractional-part projection and prefix
//!   representations of effectively open sets with tail-measure bounds.
//! - [`families`]: indexed function families `n -> u_n` with derivatives,
//!   the Koksma-class checker and the constructive example builders.
//! - [`weyl`]: Weyl sums, the squared-index subsequence schedule, empirical
//!   equidistribution counting, star discrepancy, and Monte Carlo
//!   verification of the metric bound.
//! - [`solovay`]: the total-Solovay-test constructor: threshold sets `A_k`,
//!   their rational-interval sandwiches `B_k`, measure and tail bounds, and
//!   the computable total-measure approximation.
//! - [`witness`]: the padded-image construction turning an interval test
//!   enumeration plus a Lipschitz family into an effectively open witness
//!   set with certified measure error.
//! - [`orbits`]: exact orbits of the doubling map and irrational rotations,
//!   with Birkhoff frequency counting.
//!
//! All values are immutable and all operations are pure functions; the crate
//! is `no_std`-compatible (requires `alloc`).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ball;
pub mod dyadic;
pub mod error;
pub mod families;
pub mod intervals;
pub mod mc;
pub mod oracle;
pub mod orbits;
pub mod rational;
pub mod solovay;
pub mod trig;
pub mod weyl;
pub mod witness;

pub use ball::{Ball, ComplexBall};
pub use dyadic::Dyadic;
pub use error::Error;
pub use rational::Rational;
