//! Indexed function families `n -> u_n : [0,1] -> R` with derivatives, the
//! Koksma-class checker, and the constructive example builders.
//!
//! Built-in kinds: linear `a_n x` (affine index formula, explicit list, or
//! primes), geometric `t^n x` for rational `t > 1`, rotation `x + n a`,
//! power `x^n`, and per-index piecewise polynomials. Built-ins evaluate
//! exactly at rational points and carry closed-form derivative data; that is
//! what makes symbolic Koksma certification and the exact downstream
//! constructions possible.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::intervals::{QInterval, QIntervalSet, Sigma01Prefix, TailBound};
use crate::oracle::RealOracle;
use crate::rational::{pow2, rat, rat_int, Rational};

/// Index formula for linear families `u_n(x) = a_n x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSpec {
    /// `a_n = scale * n + offset`.
    Affine { scale: BigInt, offset: BigInt },
    /// Explicit coefficients `a_1, a_2, ...`.
    List(Vec<BigInt>),
    /// `a_n` = the n-th prime.
    Primes,
}

impl LinearSpec {
    fn coefficient(&self, n: u64) -> Result<BigInt> {
        match self {
            LinearSpec::Affine { scale, offset } => Ok(scale * BigInt::from(n) + offset),
            LinearSpec::List(v) => v
                .get((n - 1) as usize)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(alloc::format!(
                    "linear list has no index {n}"
                ))),
            LinearSpec::Primes => Ok(BigInt::from(nth_prime(n))),
        }
    }
}

fn nth_prime(n: u64) -> u64 {
    let mut count = 0;
    let mut cand = 1u64;
    while count < n {
        cand += 1;
        if is_prime(cand) {
            count += 1;
        }
    }
    cand
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial with rational coefficients, `coeffs[i]` multiplying `x^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Rational>,
}

impl Poly {
    pub fn constant(c: Rational) -> Self {
        Poly { coeffs: alloc::vec![c] }
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_ball(&self, x: &Ball, g: u32) -> Ball {
        let mut acc = Ball::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&Ball::from_rational(c, g + 4)).compress(g + 4);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(Rational::zero());
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat_int(i as i64))
                .collect(),
        }
    }

    /// `sum |c_i|`, an upper bound for `|p|` on `[0, 1]`.
    pub fn abs_coeff_sum(&self) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, c| acc + c.abs())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }
}

/// One function given as polynomial pieces over a partition of `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewisePolyFn {
    pub pieces: Vec<(QInterval, Poly)>,
}

/// Per-index piecewise polynomials: entry `n - 1` defines `u_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewisePoly {
    pub per_index: Vec<PiecewisePolyFn>,
}

impl PiecewisePoly {
    /// Constant functions `u_n = c_n` on all of `[0, 1]`.
    pub fn constants(values: Vec<Rational>) -> Self {
        PiecewisePoly {
            per_index: values
                .into_iter()
                .map(|c| PiecewisePolyFn {
                    pieces: alloc::vec![(
                        QInterval { lo: rat_int(0), hi: rat_int(1) },
                        Poly::constant(c),
                    )],
                })
                .collect(),
        }
    }

    fn function(&self, n: u64) -> Result<&PiecewisePolyFn> {
        self.per_index
            .get((n - 1) as usize)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("no polynomial for index {n}")))
    }

    fn piece_at(&self, n: u64, x: &Rational) -> Result<&Poly> {
        let f = self.function(n)?;
        // The last piece also owns its closed upper endpoint so that x = 1
        // is evaluable.
        for (i, (iv, p)) in f.pieces.iter().enumerate() {
            if iv.contains(x) || (i + 1 == f.pieces.len() && *x == iv.hi) {
                return Ok(p);
            }
        }
        Err(Error::InvalidArgument(alloc::format!(
            "point outside the piece partition"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Linear(LinearSpec),
    Geometric { t: Rational },
    Rotation { a: RealOracle },
    Power,
    PiecewisePoly(PiecewisePoly),
}

/// An indexed family `n >= 1` of evaluable functions with derivative data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionFamily {
    kind: FamilyKind,
}

impl FunctionFamily {
    pub fn linear(spec: LinearSpec) -> Result<Self> {
        if let LinearSpec::Affine { scale, .. } = &spec {
            if scale.is_zero() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "affine linear family needs a nonzero scale: coefficients must be distinct"
                )));
            }
        }
        if let LinearSpec::List(v) = &spec {
            for i in 0..v.len() {
                for j in 0..i {
                    if v[i] == v[j] {
                        return Err(Error::InvalidArgument(alloc::format!(
                            "duplicate linear coefficient {}",
                            v[i]
                        )));
                    }
                }
            }
        }
        Ok(FunctionFamily {
            kind: FamilyKind::Linear(spec),
        })
    }

    pub fn geometric(t: Rational) -> Result<Self> {
        if t <= rat_int(1) {
            return Err(Error::InvalidArgument(alloc::format!(
                "geometric family needs t > 1"
            )));
        }
        Ok(FunctionFamily {
            kind: FamilyKind::Geometric { t },
        })
    }

    pub fn rotation(a: RealOracle) -> Self {
        FunctionFamily {
            kind: FamilyKind::Rotation { a },
        }
    }

    pub fn power() -> Self {
        FunctionFamily {
            kind: FamilyKind::Power,
        }
    }

    pub fn piecewise(p: PiecewisePoly) -> Self {
        FunctionFamily {
            kind: FamilyKind::PiecewisePoly(p),
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// `u_n` over an enclosed point, outward rounded.
    pub fn eval(&self, n: u64, x: &Ball, g: u32) -> Result<Ball> {
        match &self.kind {
            FamilyKind::Linear(spec) => {
                let a = spec.coefficient(n)?;
                Ok(x.scale_dyadic(&Dyadic::new(a, 0)))
            }
            FamilyKind::Geometric { t } => {
                let tn = rational_pow(t, n);
                Ok(x.mul_rational(&tn, g))
            }
            FamilyKind::Rotation { a } => {
                let extra = 64 - n.leading_zeros() as u32;
                let ab = a.refine(g + extra + 2)?;
                Ok(x.add(&ab.scale_dyadic(&Dyadic::new(BigInt::from(n), 0))))
            }
            FamilyKind::Power => Ok(ball_pow(x, n, g)),
            FamilyKind::PiecewisePoly(p) => {
                let lo = x.inf().to_rational();
                let hi = x.sup().to_rational();
                let poly_lo = p.piece_at(n, &lo)?;
                let poly_hi = p.piece_at(n, &hi)?;
                if poly_lo != poly_hi {
                    return Err(Error::UnsupportedFamily(
                        "ball straddles a piece boundary; refine first",
                    ));
                }
                Ok(poly_lo.eval_ball(x, g))
            }
        }
    }

    /// Exact value at a rational point, where the family permits.
    pub fn eval_rational(&self, n: u64, x: &Rational) -> Result<Rational> {
        match &self.kind {
            FamilyKind::Linear(spec) => {
                Ok(Rational::from_integer(spec.coefficient(n)?) * x)
            }
            FamilyKind::Geometric { t } => Ok(rational_pow(t, n) * x),
            FamilyKind::Power => Ok(rational_pow(x, n)),
            FamilyKind::PiecewisePoly(p) => Ok(p.piece_at(n, x)?.eval_rational(x)),
            FamilyKind::Rotation { a } => match a.as_rational() {
                Some(q) => Ok(x + q * rat_int(n as i64)),
                None => Err(Error::UnsupportedFamily(
                    "rotation by an irrational angle has no exact rational values",
                )),
            },
        }
    }

    /// `u_n'` over an enclosed point.
    pub fn deriv(&self, n: u64, x: &Ball, g: u32) -> Result<Ball> {
        match &self.kind {
            FamilyKind::Linear(spec) => {
                Ok(Ball::exact(Dyadic::new(spec.coefficient(n)?, 0)))
            }
            FamilyKind::Geometric { t } => {
                Ok(Ball::from_rational(&rational_pow(t, n), g))
            }
            FamilyKind::Rotation { .. } => Ok(Ball::from_int(1)),
            FamilyKind::Power => {
                if n == 1 {
                    return Ok(Ball::from_int(1));
                }
                Ok(ball_pow(x, n - 1, g).scale_dyadic(&Dyadic::new(BigInt::from(n), 0)))
            }
            FamilyKind::PiecewisePoly(p) => {
                let lo = x.inf().to_rational();
                let hi = x.sup().to_rational();
                let poly_lo = p.piece_at(n, &lo)?;
                let poly_hi = p.piece_at(n, &hi)?;
                if poly_lo != poly_hi {
                    return Err(Error::UnsupportedFamily(
                        "ball straddles a piece boundary; refine first",
                    ));
                }
                Ok(poly_lo.derivative().eval_ball(x, g))
            }
        }
    }

    /// The constant value of `u_n'` when the derivative does not depend on
    /// `x` (linear, geometric, rotation, constant-derivative pieces).
    pub fn deriv_constant(&self, n: u64) -> Result<Option<Rational>> {
        match &self.kind {
            FamilyKind::Linear(spec) => {
                Ok(Some(Rational::from_integer(spec.coefficient(n)?)))
            }
            FamilyKind::Geometric { t } => Ok(Some(rational_pow(t, n))),
            FamilyKind::Rotation { .. } => Ok(Some(rat_int(1))),
            FamilyKind::Power => Ok(if n == 1 { Some(rat_int(1)) } else { None }),
            FamilyKind::PiecewisePoly(p) => {
                let f = p.function(n)?;
                let mut value: Option<Rational> = None;
                for (_, poly) in &f.pieces {
                    let d = poly.derivative();
                    if !d.is_constant() {
                        return Ok(None);
                    }
                    let c = d.coeffs[0].clone();
                    match &value {
                        Some(v) if *v != c => return Ok(None),
                        _ => value = Some(c),
                    }
                }
                Ok(value)
            }
        }
    }

    /// Rational upper bound on `sup |u_n'|` over `[0, 1]`; also serves as the
    /// Lipschitz constant of `u_n`.
    pub fn sup_abs_deriv(&self, n: u64) -> Result<Rational> {
        match &self.kind {
            FamilyKind::Linear(spec) => {
                Ok(Rational::from_integer(spec.coefficient(n)?.abs()))
            }
            FamilyKind::Geometric { t } => Ok(rational_pow(t, n)),
            FamilyKind::Rotation { .. } => Ok(rat_int(1)),
            FamilyKind::Power => Ok(rat_int(n as i64)),
            FamilyKind::PiecewisePoly(p) => {
                let f = p.function(n)?;
                let mut best = Rational::zero();
                for (_, poly) in &f.pieces {
                    let b = poly.derivative().abs_coeff_sum();
                    if b > best {
                        best = b;
                    }
                }
                Ok(best)
            }
        }
    }

    /// Rational upper bound on `sup |u_n''|` over `[0, 1]`.
    pub fn deriv2_bound(&self, n: u64) -> Result<Rational> {
        match &self.kind {
            // Linear, geometric and rotation all have constant derivative.
            FamilyKind::Linear(_) | FamilyKind::Geometric { .. } | FamilyKind::Rotation { .. } => {
                Ok(Rational::zero())
            }
            FamilyKind::Power => Ok(rat_int((n * n.saturating_sub(1)) as i64)),
            FamilyKind::PiecewisePoly(p) => {
                let f = p.function(n)?;
                let mut best = Rational::zero();
                for (_, poly) in &f.pieces {
                    let b = poly.derivative().derivative().abs_coeff_sum();
                    if b > best {
                        best = b;
                    }
                }
                Ok(best)
            }
        }
    }
}

/// `x^n` for rational `x` and `n >= 0`.
pub fn rational_pow(x: &Rational, n: u64) -> Rational {
    let mut acc = Rational::one();
    let mut base = x.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

fn ball_pow(x: &Ball, n: u64, g: u32) -> Ball {
    let mut acc = Ball::from_int(1);
    let mut base = x.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base).compress(g + 8);
        }
        e >>= 1;
        if e > 0 {
            base = base.sq().compress(g + 8);
        }
    }
    acc
}

/// Per-index Lipschitz constants, checked against the closed-form derivative
/// bounds of the built-ins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzData {
    bounds: Vec<Rational>,
}

impl LipschitzData {
    /// Bounds taken from the family itself, indices `1..=n_max`.
    pub fn from_family(family: &FunctionFamily, n_max: u64) -> Result<Self> {
        let mut bounds = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            bounds.push(family.sup_abs_deriv(n)?);
        }
        Ok(LipschitzData { bounds })
    }

    /// Explicit bounds; rejected when below the family's derivative bound.
    pub fn checked(family: &FunctionFamily, bounds: Vec<Rational>) -> Result<Self> {
        for (i, b) in bounds.iter().enumerate() {
            let need = family.sup_abs_deriv(i as u64 + 1)?;
            if *b < need {
                return Err(Error::InvalidArgument(alloc::format!(
                    "Lipschitz bound for index {} is below the derivative bound",
                    i + 1
                )));
            }
        }
        Ok(LipschitzData { bounds })
    }

    pub fn at(&self, n: u64) -> &Rational {
        &self.bounds[(n - 1) as usize]
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }
}

/// Outcome of a Koksma-class check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KoksmaVerdict {
    /// The derivative-gap and monotonicity conditions hold for all pairs.
    Certified,
    /// A concrete rational witness where the gap drops below `K` (or the
    /// difference fails to be monotone).
    Refuted { m: u64, n: u64, x: Rational },
    /// A grid check passed but no symbolic certificate exists.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckMethod {
    Symbolic,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KoksmaReport {
    pub claimed_k: Rational,
    pub verdict: KoksmaVerdict,
    pub checked_pairs: u64,
    pub method: CheckMethod,
}

/// Checks the derivative-gap and monotone-difference conditions at constant
/// `K` over indices up to `n_max`.
///
/// Built-ins are decided symbolically: constant-derivative families reduce to
/// exact minimum-gap computations, and the power map is refuted by an exact
/// zero of the gap. Piecewise polynomials get a grid check that can refute
/// with a rational witness but never certify.
pub fn koksma_check(
    family: &FunctionFamily,
    k_const: &Rational,
    n_max: u64,
    grid: u64,
) -> Result<KoksmaReport> {
    if !k_const.is_positive() {
        return Err(Error::InvalidArgument(alloc::format!("K must be positive")));
    }
    if n_max < 2 {
        return Err(Error::InvalidArgument(alloc::format!("n_max must be at least 2")));
    }
    let pairs = n_max * (n_max - 1) / 2;
    match family.kind() {
        FamilyKind::Linear(_) | FamilyKind::Geometric { .. } => {
            // Derivatives are constants c_n; differences are constant, hence
            // monotone, and the gap condition is min |c_m - c_n| >= K.
            let mut consts = Vec::with_capacity(n_max as usize);
            for n in 1..=n_max {
                consts.push(family.deriv_constant(n)?.expect("constant derivative"));
            }
            let mut best: Option<(u64, u64, Rational)> = None;
            for m in 0..consts.len() {
                for n in 0..m {
                    let gap = (&consts[m] - &consts[n]).abs();
                    if best.as_ref().map(|(_, _, b)| &gap < b).unwrap_or(true) {
                        best = Some((m as u64 + 1, n as u64 + 1, gap));
                    }
                }
            }
            let (m, n, min_gap) = best.expect("n_max >= 2");
            let verdict = if &min_gap >= k_const {
                KoksmaVerdict::Certified
            } else {
                KoksmaVerdict::Refuted { m, n, x: rat_int(0) }
            };
            Ok(KoksmaReport {
                claimed_k: k_const.clone(),
                verdict,
                checked_pairs: pairs,
                method: CheckMethod::Symbolic,
            })
        }
        FamilyKind::Rotation { .. } => {
            // All derivatives are 1: the gap is identically zero.
            Ok(KoksmaReport {
                claimed_k: k_const.clone(),
                verdict: KoksmaVerdict::Refuted { m: 2, n: 1, x: rat_int(0) },
                checked_pairs: pairs,
                method: CheckMethod::Symbolic,
            })
        }
        FamilyKind::Power => {
            // u_m' - u_n' = m x^(m-1) - n x^(n-1) has an exact zero in [0,1]:
            // at x = 0 for m, n >= 2, and at x = 1/2 for the pair (1, 2).
            let witness = if n_max >= 3 {
                KoksmaVerdict::Refuted { m: 3, n: 2, x: rat_int(0) }
            } else {
                KoksmaVerdict::Refuted { m: 2, n: 1, x: rat(1, 2) }
            };
            Ok(KoksmaReport {
                claimed_k: k_const.clone(),
                verdict: witness,
                checked_pairs: pairs,
                method: CheckMethod::Symbolic,
            })
        }
        FamilyKind::PiecewisePoly(_) => {
            koksma_grid_check(family, k_const, n_max, grid.max(2), pairs)
        }
    }
}

fn koksma_grid_check(
    family: &FunctionFamily,
    k_const: &Rational,
    n_max: u64,
    grid: u64,
    pairs: u64,
) -> Result<KoksmaReport> {
    let points: Vec<Rational> = (0..=grid).map(|i| rat(i as i64, grid as i64)).collect();
    for m in 2..=n_max {
        for n in 1..m {
            let mut prev_diff: Option<Rational> = None;
            let mut direction: Option<bool> = None; // Some(true) = nondecreasing
            for x in &points {
                let dm = family
                    .deriv(m, &Ball::from_rational(x, 64), 64)?
                    .center()
                    .to_rational();
                let dn = family
                    .deriv(n, &Ball::from_rational(x, 64), 64)?
                    .center()
                    .to_rational();
                let diff = dm - dn;
                if diff.abs() < *k_const {
                    return Ok(KoksmaReport {
                        claimed_k: k_const.clone(),
                        verdict: KoksmaVerdict::Refuted { m, n, x: x.clone() },
                        checked_pairs: pairs,
                        method: CheckMethod::Grid,
                    });
                }
                if let Some(p) = &prev_diff {
                    let step_up = diff >= *p;
                    let step_down = diff <= *p;
                    match direction {
                        None if !(step_up && step_down) => direction = Some(step_up),
                        Some(true) if !step_up => {
                            return Ok(KoksmaReport {
                                claimed_k: k_const.clone(),
                                verdict: KoksmaVerdict::Refuted { m, n, x: x.clone() },
                                checked_pairs: pairs,
                                method: CheckMethod::Grid,
                            });
                        }
                        Some(false) if !step_down => {
                            return Ok(KoksmaReport {
                                claimed_k: k_const.clone(),
                                verdict: KoksmaVerdict::Refuted { m, n, x: x.clone() },
                                checked_pairs: pairs,
                                method: CheckMethod::Grid,
                            });
                        }
                        _ => {}
                    }
                }
                prev_diff = Some(diff);
            }
        }
    }
    // The grid passed, but a grid cannot prove a universally quantified
    // condition over [0, 1].
    Ok(KoksmaReport {
        claimed_k: k_const.clone(),
        verdict: KoksmaVerdict::Inconclusive,
        checked_pairs: pairs,
        method: CheckMethod::Grid,
    })
}

/// Branch taken by the doubling-exponent construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop15Case {
    /// The value is `p / 2^k`: every shift past `k` lands on zero.
    Dyadic { k: u64 },
    /// Positions of zero binary digits were extracted.
    NonDyadic,
}

/// Exponent sequence along which `(2^(a-1) x)` avoids the upper half of the
/// unit interval: for dyadic `x = p/2^k` the shifts `k, k+1, ...`; otherwise
/// the ranks of the zero digits of `{x}`, so the shifted fractional part
/// starts with digit 0.
pub fn build_prop15_exponents(
    x: &RealOracle,
    count: usize,
    cap: u32,
) -> Result<(Prop15Case, Vec<u64>)> {
    if count == 0 {
        return Err(Error::InvalidArgument(alloc::format!("count must be positive")));
    }
    if let Some(k) = x.dyadic_exponent() {
        let exponents = (0..count as u64).map(|i| k + i).collect();
        return Ok((Prop15Case::Dyadic { k }, exponents));
    }
    let mut window = (2 * count + 64).min(cap as usize);
    loop {
        let digits = x.binary_digits(window, cap)?;
        let zeros: Vec<u64> = digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| i as u64 + 1)
            .take(count)
            .collect();
        if zeros.len() == count {
            return Ok((Prop15Case::NonDyadic, zeros));
        }
        if window >= cap as usize {
            return Err(Error::ZeroDigitsExhausted {
                found: zeros.len(),
                requested: count,
            });
        }
        window = (window * 2).min(cap as usize);
    }
}

/// Stage-wise dyadic cylinders around the orbit `{n x}`: stage `n` adds the
/// half-open cylinder of the first `2n + 1` binary digits of `{n x}`, so the
/// orbit point lies in its own stage and the stage increment has measure
/// `2^-(2n+1)`. The tail after stage `p` is bounded by `(4/3) 4^-p`.
pub fn build_prop23_set(x: &RealOracle, p: usize, cap: u32) -> Result<Sigma01Prefix> {
    if p == 0 {
        return Err(Error::InvalidArgument(alloc::format!("need at least one stage")));
    }
    if !x.is_irrational() {
        return Err(Error::InvalidArgument(alloc::format!(
            "the construction needs a declared-irrational value"
        )));
    }
    let mut increments = Vec::with_capacity(p);
    for n in 1..=p {
        let m = 2 * n + 1;
        let digits = digits_of_multiple(x, n as u64, m, cap)?;
        let mut acc = BigInt::zero();
        for &b in &digits {
            acc = (acc << 1) + BigInt::from(b);
        }
        let lo = Rational::new(acc, BigInt::one() << m);
        let hi = &lo + pow2(-(m as i64));
        increments.push(QIntervalSet::from_intervals([QInterval { lo, hi }]));
    }
    Ok(Sigma01Prefix::from_increments(
        increments,
        Some(TailBound::GeometricDecay {
            coeff: rat(4, 3),
            ratio: rat(1, 4),
        }),
    ))
}

/// First `m` binary digits of `{n x}` by refining the oracle.
pub fn digits_of_multiple(x: &RealOracle, n: u64, m: usize, cap: u32) -> Result<Vec<u8>> {
    let extra = 64 - n.leading_zeros() as u32;
    let mut g = (m as u32).saturating_add(extra).saturating_add(16);
    loop {
        if g > cap {
            return Err(Error::AmbiguousDigit { position: m, cap });
        }
        let b = x.refine(g)?;
        let nx = b.scale_dyadic(&Dyadic::new(BigInt::from(n), 0));
        if let Some(d) = crate::oracle::digits_of_ball(&nx, m) {
            return Ok(d);
        }
        g = g.saturating_mul(2);
    }
}

/// Union of the first `count` padded neighborhoods `({p_n} - 2^(-n-2),
/// {p_n} + 2^(-n-2))` clipped to the unit interval. The total measure is at
/// most `sum 2^(-n-1) < 1/2` while every listed point is covered, which is
/// what makes the set a counterexample target for equidistribution.
pub fn build_pitfall_set(points: &[Ball], count: usize) -> Result<QIntervalSet> {
    if count > points.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "count {count} exceeds the {} supplied points",
            points.len()
        )));
    }
    let mut pieces = Vec::with_capacity(count);
    for (i, pt) in points.iter().take(count).enumerate() {
        let n = i as i64 + 1;
        let pad = pow2(-n - 2);
        let c = pt.center().to_rational();
        if pt.radius().to_rational() >= pad {
            return Err(Error::InvalidArgument(alloc::format!(
                "point {} is wider than its padding",
                n
            )));
        }
        let lo = (&c - &pad).max(Rational::zero());
        let hi = (&c + &pad).min(rat_int(1));
        pieces.push(QInterval { lo, hi });
    }
    Ok(QIntervalSet::from_intervals(pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Membership;

    fn linear_n() -> FunctionFamily {
        FunctionFamily::linear(LinearSpec::Affine {
            scale: BigInt::one(),
            offset: BigInt::zero(),
        })
        .unwrap()
    }

    #[test]
    fn koksma_verdicts_match_the_classical_examples() {
        let geo = FunctionFamily::geometric(rat_int(2)).unwrap();
        let r = koksma_check(&geo, &rat_int(1), 10, 0).unwrap();
        assert_eq!(r.verdict, KoksmaVerdict::Certified);
        assert_eq!(r.method, CheckMethod::Symbolic);

        let lin = linear_n();
        let r = koksma_check(&lin, &rat_int(1), 10, 0).unwrap();
        assert_eq!(r.verdict, KoksmaVerdict::Certified);

        let pow = FunctionFamily::power();
        let r = koksma_check(&pow, &rat(1, 2), 5, 0).unwrap();
        assert!(matches!(r.verdict, KoksmaVerdict::Refuted { .. }));
        // The witness is exact: both derivatives vanish at it.
        if let KoksmaVerdict::Refuted { m, n, x } = &r.verdict {
            let dm = pow.deriv(*m, &Ball::from_rational(x, 64), 64).unwrap();
            let dn = pow.deriv(*n, &Ball::from_rational(x, 64), 64).unwrap();
            let gap = dm.sub(&dn);
            assert!(gap.contains_rational(&Rational::zero()));
            assert!(gap.sup().to_rational() < rat(1, 2));
        }

        let rot = FunctionFamily::rotation(RealOracle::sqrt(rat_int(2), 0).unwrap());
        let r = koksma_check(&rot, &rat(1, 100), 10, 0).unwrap();
        assert!(matches!(r.verdict, KoksmaVerdict::Refuted { .. }));
    }

    #[test]
    fn geometric_certifies_exactly_at_t_minus_one() {
        // t = 3/2: the family is (t-1)-Koksma and the minimal gap over
        // n >= 1 is t(t-1) = 3/4.
        let geo = FunctionFamily::geometric(rat(3, 2)).unwrap();
        let r = koksma_check(&geo, &rat(1, 2), 8, 0).unwrap();
        assert_eq!(r.verdict, KoksmaVerdict::Certified);
        let r = koksma_check(&geo, &rat(3, 4), 8, 0).unwrap();
        assert_eq!(r.verdict, KoksmaVerdict::Certified);
        let r = koksma_check(&geo, &rat(7, 8), 8, 0).unwrap();
        assert!(matches!(r.verdict, KoksmaVerdict::Refuted { .. }));
    }

    #[test]
    fn duplicate_linear_coefficients_rejected() {
        assert!(FunctionFamily::linear(LinearSpec::List(
            alloc::vec![BigInt::from(3), BigInt::from(5), BigInt::from(3)]
        ))
        .is_err());
        assert!(FunctionFamily::linear(LinearSpec::Affine {
            scale: BigInt::zero(),
            offset: BigInt::from(7),
        })
        .is_err());
    }

    #[test]
    fn primes_family_coefficients() {
        let fam = FunctionFamily::linear(LinearSpec::Primes).unwrap();
        let c: Vec<i64> = (1..=6)
            .map(|n| {
                fam.deriv_constant(n)
                    .unwrap()
                    .unwrap()
                    .numer()
                    .try_into()
                    .unwrap()
            })
            .collect();
        assert_eq!(c, [2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        // Central difference with certified slack from the second-derivative
        // bound: |f'(x) - (f(x+h) - f(x-h)) / 2h| <= sup|f''| h / 2... the
        // step and radii are folded into the acceptance below.
        let fams = [
            linear_n(),
            FunctionFamily::geometric(rat_int(2)).unwrap(),
            FunctionFamily::power(),
        ];
        let h = rat(1, 1 << 12);
        for fam in &fams {
            for n in [1u64, 2, 3, 5] {
                for xi in [rat(1, 3), rat(1, 7), rat(3, 5)] {
                    let g = 64;
                    let fp = fam
                        .eval(n, &Ball::from_rational(&(&xi + &h), g), g)
                        .unwrap();
                    let fm = fam
                        .eval(n, &Ball::from_rational(&(&xi - &h), g), g)
                        .unwrap();
                    let approx = fp.sub(&fm).mul_rational(&(rat(1, 2) / &h), g);
                    let d = fam.deriv(n, &Ball::from_rational(&xi, g), g).unwrap();
                    let gap = approx.sub(&d);
                    let tol = fam.deriv2_bound(n).unwrap() * &h
                        + gap.radius_rational()
                        + pow2(-32);
                    assert!(
                        gap.center().to_rational().abs() <= tol,
                        "family {:?} n={n} x={xi}",
                        fam.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn prop15_dyadic_branch() {
        let o = RealOracle::rational(rat(5, 8));
        let (case, exps) = build_prop15_exponents(&o, 2, 256).unwrap();
        assert_eq!(case, Prop15Case::Dyadic { k: 3 });
        assert_eq!(exps, [3, 4]);
    }

    #[test]
    fn prop15_nondyadic_zero_ranks() {
        let o = RealOracle::rational(rat(1, 3));
        let (case, exps) = build_prop15_exponents(&o, 3, 256).unwrap();
        assert_eq!(case, Prop15Case::NonDyadic);
        assert_eq!(exps, [1, 3, 5]);
        let o = RealOracle::rational(rat(2, 3));
        let (_, exps) = build_prop15_exponents(&o, 3, 256).unwrap();
        assert_eq!(exps, [2, 4, 6]);
    }

    #[test]
    fn prop15_shifted_fractional_parts_stay_low() {
        // For every exponent a, {2^(a-1) x} has leading digit 0, so it lies
        // in [0, 1/2) exactly.
        let o = RealOracle::rational(rat(1, 3));
        let (_, exps) = build_prop15_exponents(&o, 8, 512).unwrap();
        let half = rat(1, 2);
        for a in exps {
            let shifted = crate::rational::frac_exact(&(rat(1, 3) * pow2(a as i64 - 1)));
            assert!(shifted < half);
        }
    }

    #[test]
    fn prop15_zero_digits_exhausted_for_near_dyadic_digit_file() {
        // All-ones digit file: no zero digits at all.
        let d = crate::oracle::DigitString::parse("11111111", false).unwrap();
        let o = RealOracle::digits(d);
        let err = build_prop15_exponents(&o, 3, 8).unwrap_err();
        assert!(matches!(err, Error::ZeroDigitsExhausted { .. }));
    }

    #[test]
    fn prop23_stages_contain_the_orbit() {
        let x = RealOracle::sqrt(rat_int(2), -1).unwrap();
        let p = 6;
        let prefix = build_prop23_set(&x, p, 1024).unwrap();
        assert_eq!(prefix.stage_count(), p);
        let last = prefix.stage(p);
        for n in 1..=p as u64 {
            let b = x.refine(80).unwrap();
            let nx = b.scale_dyadic(&Dyadic::new(BigInt::from(n), 0));
            let f = nx.frac().unwrap();
            assert_eq!(last.contains_ball(&f), Membership::In, "n = {n}");
        }
        // Measure accounting: the union is at most the sum of the cylinder
        // widths, and with the tail stays below 1/3.
        let sum: Rational = (1..=p as i64).map(|n| pow2(-(2 * n + 1))).sum();
        assert!(last.measure() <= sum);
        let tail = prefix.tail_at(p).unwrap();
        assert_eq!(tail, rat(4, 3) * rational_pow(&rat(1, 4), p as u64));
        assert!(last.measure() + tail <= rat(1, 3));
        // Rational inputs are rejected: the construction needs irrationality.
        assert!(build_prop23_set(&RealOracle::rational(rat(1, 3)), 3, 256).is_err());
    }

    #[test]
    fn pitfall_set_covers_points_with_small_measure() {
        let pts: Vec<Ball> = [rat(1, 2), rat(1, 7), rat(9, 11), rat(3, 5)]
            .iter()
            .map(|q| Ball::from_rational(q, 64))
            .collect();
        let set = build_pitfall_set(&pts, 4).unwrap();
        let bound: Rational = (1..=4).map(|n| pow2(-(n as i64) - 1)).sum();
        assert!(set.measure() <= bound);
        assert!(set.measure() <= rat(1, 2));
        for pt in &pts {
            assert_eq!(set.contains_ball(pt), Membership::In);
        }
        // Single point at 1/2: measure is the full padding 1/4.
        let single = build_pitfall_set(&pts[..1], 1).unwrap();
        assert_eq!(single.measure(), rat(1, 4));
    }
}
