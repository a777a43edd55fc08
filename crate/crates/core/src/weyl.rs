//! Weyl exponential sums and the empirical equidistribution machinery.
//!
//! `S_N(h x) = (1/N) sum_{j<=N} e(h x_j)` with certified radii, computed over
//! sequence oracles that refine on demand. On top of the sums: the squared
//! subsequence schedule `M_k = k^2`, the gap bound between consecutive
//! schedule points, frequency counting against rational interval sets, star
//! discrepancy of finite point sets, and a seeded Monte Carlo check of the
//! mean-square metric bound with its Chebyshev tail.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::ball::{Ball, ComplexBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::families::FunctionFamily;
use crate::intervals::{Membership, QIntervalSet};
use crate::mc::SampleStream;
use crate::oracle::RealOracle;
use crate::rational::{pow2, rat, rat_int, Rational};
use crate::trig::{ln_bounds, Trig};

/// A sequence of reals revealed through balls at requested precision.
pub trait PointSeq {
    /// Enclosure of `x_n` (1-based) with radius at most `2^-g`.
    fn point(&self, n: u64, g: u32) -> Result<Ball>;

    /// Exact rational value of `x_n`, when the sequence has one.
    fn point_rational(&self, _n: u64) -> Option<Rational> {
        None
    }
}

/// `x_n = u_n(x)` for a function family at a fixed oracle point.
pub struct FamilyAtPoint<'a> {
    pub family: &'a FunctionFamily,
    pub x: &'a RealOracle,
}

impl PointSeq for FamilyAtPoint<'_> {
    fn point(&self, n: u64, g: u32) -> Result<Ball> {
        // The family is Lipschitz with constant sup|u_n'|; refine the oracle
        // until the propagated radius meets the target.
        let lip = self.family.sup_abs_deriv(n)?;
        let extra = bits_above(&lip) + 2;
        let xb = self.x.refine(g + extra)?;
        self.family.eval(n, &xb, g + 2)
    }

    fn point_rational(&self, n: u64) -> Option<Rational> {
        let xq = self.x.as_rational()?;
        self.family.eval_rational(n, &xq).ok()
    }
}

/// An explicit list of exact rational points.
pub struct RationalSeq {
    pub points: Vec<Rational>,
}

impl PointSeq for RationalSeq {
    fn point(&self, n: u64, g: u32) -> Result<Ball> {
        let q = self
            .points
            .get((n - 1) as usize)
            .ok_or(Error::PrecisionUnreachable)?;
        Ok(Ball::from_rational(q, g))
    }

    fn point_rational(&self, n: u64) -> Option<Rational> {
        self.points.get((n - 1) as usize).cloned()
    }
}

/// Bits needed to dominate `q`: the least `b` with `2^b >= max(1, |q|)`.
pub fn bits_above(q: &Rational) -> u32 {
    let a = q.abs();
    let num_bits = a.numer().bits() as i64;
    let den_bits = a.denom().bits() as i64;
    (num_bits - den_bits + 1).max(0) as u32
}

/// `(1/N) sum_{j=1..N} e(h x_j)` with total radius at most `2^-g`.
pub fn weyl_sum(seq: &dyn PointSeq, h: i64, n: u64, g: u32) -> Result<ComplexBall> {
    if h == 0 {
        return Err(Error::InvalidArgument(alloc::format!("h must be nonzero")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(alloc::format!("N must be positive")));
    }
    let series = weyl_series(seq, h, &[n], g)?;
    Ok(series.values.into_iter().next().expect("one schedule entry"))
}

/// Certified partial sums `S_N` for every `N` in an increasing schedule,
/// sharing one pass over the sequence.
pub struct WeylSeries {
    pub h: i64,
    pub schedule: Vec<u64>,
    pub values: Vec<ComplexBall>,
}

pub fn weyl_series(seq: &dyn PointSeq, h: i64, schedule: &[u64], g: u32) -> Result<WeylSeries> {
    weyl_series_with(None, seq, h, schedule, g)
}

/// Like [`weyl_series`], reusing a caller-held evaluator (and its memo table)
/// when its precision suffices. Hot paths evaluating many sums at the same
/// precision share one evaluator this way.
pub fn weyl_series_with(
    shared: Option<&Trig>,
    seq: &dyn PointSeq,
    h: i64,
    schedule: &[u64],
    g: u32,
) -> Result<WeylSeries> {
    if h == 0 {
        return Err(Error::InvalidArgument(alloc::format!("h must be nonzero")));
    }
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "schedule must be strictly increasing and positive"
        )));
    }
    let n_max = *schedule.last().expect("nonempty");
    // Budget: per-term radius 2^-(g + log2 N + 2) keeps the mean within 2^-g
    // after scaling, with room for the scaling round-off.
    let log_n = 64 - n_max.leading_zeros();
    let g_term = g + log_n + 2;
    let own;
    let trig = match shared {
        Some(t) if t.precision() >= g_term + 2 => t,
        _ => {
            own = Trig::new(g_term + 2);
            &own
        }
    };
    let h_dyadic = Dyadic::from_int(h);
    let h_bits = 64 - h.unsigned_abs().leading_zeros();

    let mut acc = ComplexBall::zero();
    let mut values = Vec::with_capacity(schedule.len());
    let mut next = 0usize;
    for j in 1..=n_max {
        let term = match seq.point_rational(j) {
            Some(q) => {
                let arg = crate::rational::frac_exact(&(q * rat_int(h)));
                trig.e(&Ball::from_rational(&arg, g_term + 4))
            }
            None => {
                let x = seq
                    .point(j, g_term + 5 + h_bits)
                    .map_err(map_refine_err)?;
                trig.e(&x.scale_dyadic(&h_dyadic))
            }
        };
        acc = acc.add(&term).compress(g_term + 2 + log_n);
        while next < schedule.len() && schedule[next] == j {
            let scaled = acc.mul_rational(&rat(1, j as i64), g + 3);
            if scaled.radius_sum() > Dyadic::power_of_two(-(g as i64)) {
                return Err(Error::PrecisionUnreachable);
            }
            values.push(scaled);
            next += 1;
        }
    }
    Ok(WeylSeries {
        h,
        schedule: schedule.to_vec(),
        values,
    })
}

fn map_refine_err(e: Error) -> Error {
    match e {
        Error::DigitFileExhausted { .. } | Error::AmbiguousDigit { .. } => {
            Error::PrecisionUnreachable
        }
        other => other,
    }
}

/// The squared schedule `M_k = k^2` for `k = 1..=k_max`.
pub fn subsequence_schedule(k_max: u64) -> Vec<u64> {
    (1..=k_max).map(|k| k * k).collect()
}

#[derive(Clone, Debug)]
pub struct GapCheck {
    pub k: u64,
    /// `2 (M_{k+1} - M_k) / M_{k+1}`.
    pub bound: Rational,
    /// Largest certified `|S_N - S_{M_k}|` upper bound over the block.
    pub max_observed: Rational,
    pub violations: u64,
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub checks: Vec<GapCheck>,
    pub total_violations: u64,
}

/// Verifies `|S_N - S_{M_k}| <= 2 (M_{k+1} - M_k) / M_{k+1}` plus radii for
/// every `N` in `[M_k, M_{k+1})`, over the squared schedule up to `k_max`.
pub fn gap_bound_check(seq: &dyn PointSeq, h: i64, k_max: u64, g: u32) -> Result<GapReport> {
    if k_max < 1 {
        return Err(Error::InvalidArgument(alloc::format!("k_max must be positive")));
    }
    let n_max = (k_max + 1) * (k_max + 1) - 1;
    let full: Vec<u64> = (1..=n_max).collect();
    let series = weyl_series(seq, h, &full, g)?;
    let mut checks = Vec::new();
    let mut total_violations = 0;
    for k in 1..=k_max {
        let mk = k * k;
        let mk1 = (k + 1) * (k + 1);
        let bound = rat(2 * (mk1 - mk) as i64, mk1 as i64);
        let base = &series.values[(mk - 1) as usize];
        let mut max_observed = Rational::zero();
        let mut violations = 0;
        for n in mk..mk1.min(n_max + 1) {
            let diff = series.values[(n - 1) as usize].sub(base);
            let (_, hi) = diff.modulus_bounds(g + 4);
            let hi_q = hi.to_rational();
            if hi_q > max_observed {
                max_observed = hi_q.clone();
            }
            // The certified upper bound already includes both radii, so a
            // violation here is a genuine inequality failure.
            if hi_q > &bound + diff.radius_sum().to_rational() {
                violations += 1;
            }
        }
        total_violations += violations;
        checks.push(GapCheck {
            k,
            bound,
            max_observed,
            violations,
        });
    }
    Ok(GapReport {
        checks,
        total_violations,
    })
}

/// Frequency data for one target set.
#[derive(Clone, Debug)]
pub struct TargetCount {
    pub measure: Rational,
    pub hits_min: u64,
    pub hits_max: u64,
    pub undecided: u64,
}

impl TargetCount {
    pub fn frequency_min(&self, n: u64) -> Rational {
        rat(self.hits_min as i64, n as i64)
    }

    pub fn frequency_max(&self, n: u64) -> Rational {
        rat(self.hits_max as i64, n as i64)
    }

    /// Upper bound on `|frequency - measure|` over the undecided range.
    pub fn deviation_upper(&self, n: u64) -> Rational {
        let lo = (self.frequency_min(n) - &self.measure).abs();
        let hi = (self.frequency_max(n) - &self.measure).abs();
        lo.max(hi)
    }
}

#[derive(Clone, Debug)]
pub struct UDReport {
    pub n: u64,
    pub targets: Vec<TargetCount>,
}

/// Counts fractional parts of the first `N` sequence points in each target.
/// Boundary memberships are refined up to `cap` bits of precision and then
/// surfaced as `[hits_min, hits_max]` uncertainty rather than tie-broken.
pub fn empirical_ud(
    seq: &dyn PointSeq,
    targets: &[QIntervalSet],
    n: u64,
    g: u32,
    cap: u32,
) -> Result<UDReport> {
    if n == 0 {
        return Err(Error::InvalidArgument(alloc::format!("N must be positive")));
    }
    let mut counts: Vec<TargetCount> = targets
        .iter()
        .map(|t| TargetCount {
            measure: t.measure(),
            hits_min: 0,
            hits_max: 0,
            undecided: 0,
        })
        .collect();
    for j in 1..=n {
        if let Some(q) = seq.point_rational(j) {
            let f = crate::rational::frac_exact(&q);
            for (t, c) in targets.iter().zip(counts.iter_mut()) {
                if t.contains_rational(&f) {
                    c.hits_min += 1;
                    c.hits_max += 1;
                }
            }
            continue;
        }
        for (t, c) in targets.iter().zip(counts.iter_mut()) {
            match decide_membership(seq, j, t, g, cap)? {
                Some(true) => {
                    c.hits_min += 1;
                    c.hits_max += 1;
                }
                Some(false) => {}
                None => {
                    c.hits_max += 1;
                    c.undecided += 1;
                }
            }
        }
    }
    Ok(UDReport { n, targets: counts })
}

fn decide_membership(
    seq: &dyn PointSeq,
    j: u64,
    target: &QIntervalSet,
    g: u32,
    cap: u32,
) -> Result<Option<bool>> {
    let mut gg = g;
    loop {
        let b = seq.point(j, gg)?;
        match b.frac() {
            Ok(f) => match target.contains_ball(&f) {
                Membership::In => return Ok(Some(true)),
                Membership::Out => return Ok(Some(false)),
                Membership::Boundary => {}
            },
            Err(Error::StraddlesInteger) => {}
            Err(e) => return Err(e),
        }
        if gg >= cap {
            return Ok(None);
        }
        gg = (gg * 2).min(cap);
    }
}

/// Star discrepancy of a finite point set in `[0, 1)`:
/// `max_i max(i/N - x_(i), x_(i) - (i-1)/N)` over the sorted points.
pub fn star_discrepancy(points: &[Rational]) -> Result<Rational> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(alloc::format!("need at least one point")));
    }
    if points
        .iter()
        .any(|p| p.is_negative() || *p >= rat_int(1))
    {
        return Err(Error::InvalidArgument(alloc::format!(
            "star discrepancy points must lie in [0, 1)"
        )));
    }
    let n = points.len() as i64;
    let mut sorted = points.to_vec();
    sorted.sort();
    let mut best = Rational::zero();
    for (i0, x) in sorted.iter().enumerate() {
        let i = i0 as i64 + 1;
        let up = rat(i, n) - x;
        let down = x - rat(i - 1, n);
        if up > best {
            best = up;
        }
        if down > best {
            best = down;
        }
    }
    Ok(best)
}

/// Monte Carlo estimate of `int_0^1 |S_N(h u(x))|^2 dx` with the paper
/// bounds for comparison.
#[derive(Clone, Debug)]
pub struct MetricBoundReport {
    pub n: u64,
    pub h: i64,
    pub samples: u64,
    /// Sample mean of the certified centers (exact dyadic arithmetic).
    pub estimate: Rational,
    /// Upper bound on the standard error of the mean.
    pub std_error: Rational,
    /// Largest enclosure radius among the sampled values.
    pub max_sample_radius: Rational,
    /// `1/N + (8 / |h| K) ln(3N) / N`, outward-rounded enclosure.
    pub tight_bound: (Rational, Rational),
    /// `(1 + 17 / (|h| K)) ln(N) / N`, outward-rounded enclosure.
    pub relaxed_bound: (Rational, Rational),
    /// Estimate plus three standard errors stays below both bounds.
    pub pass: bool,
}

/// Draws `samples` uniform dyadic points, evaluates `|S_N(h u(x))|^2` with
/// certified enclosures, and compares mean + 3 SE against the mean-square
/// bounds for constant `K`. Sampling is chunked for deterministic merging.
pub fn metric_bound_mc(
    family: &FunctionFamily,
    h: i64,
    k_const: &Rational,
    n: u64,
    samples: u64,
    seed: u64,
    g: u32,
) -> Result<MetricBoundReport> {
    if n < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "the mean-square bound needs N >= 3"
        )));
    }
    if h == 0 || !k_const.is_positive() || samples == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need h != 0, K > 0 and at least one sample"
        )));
    }
    const CHUNK: u64 = 1024;
    const SAMPLE_BITS: u32 = 32;
    let mut sum = Dyadic::zero();
    let mut sum_sq = Dyadic::zero();
    let mut max_radius = Rational::zero();
    let mut drawn = 0u64;
    let mut chunk = 0u64;
    while drawn < samples {
        let mut stream = SampleStream::new(seed, chunk);
        let take = CHUNK.min(samples - drawn);
        for _ in 0..take {
            let x = stream.next_unit_rational(SAMPLE_BITS);
            let sq = sample_modulus_squared(family, h, n, &x, g)?;
            let c = sq.center();
            sum = &sum + c;
            sum_sq = &sum_sq + &(c * c);
            let r = sq.radius_rational();
            if r > max_radius {
                max_radius = r;
            }
        }
        drawn += take;
        chunk += 1;
    }
    let m = rat_int(samples as i64);
    let mean = sum.to_rational() / &m;
    let mean_sq = sum_sq.to_rational() / &m;
    let variance = (&mean_sq - &mean * &mean).max(Rational::zero());
    // SE = sqrt(var / samples), rounded up.
    let se_arg = variance / &m;
    let se = Dyadic::from_rational(&se_arg, 2 * g + 4, crate::dyadic::Round::Up)
        .sqrt_grid(g + 2)
        .1
        .to_rational();

    let tight_bound = tight_metric_bound(h, k_const, n);
    let relaxed_bound = relaxed_metric_bound(h, k_const, n);
    let margin = &mean + rat_int(3) * &se + &max_radius;
    let pass = margin < tight_bound.0 && margin < relaxed_bound.0;
    Ok(MetricBoundReport {
        n,
        h,
        samples,
        estimate: mean,
        std_error: se,
        max_sample_radius: max_radius,
        tight_bound,
        relaxed_bound,
        pass,
    })
}

fn sample_modulus_squared(
    family: &FunctionFamily,
    h: i64,
    n: u64,
    x: &Rational,
    g: u32,
) -> Result<Ball> {
    struct FamAtRational<'a> {
        family: &'a FunctionFamily,
        x: &'a Rational,
    }
    impl PointSeq for FamAtRational<'_> {
        fn point(&self, n: u64, g: u32) -> Result<Ball> {
            self.family.eval(n, &Ball::from_rational(self.x, g + 2), g)
        }
        fn point_rational(&self, n: u64) -> Option<Rational> {
            self.family.eval_rational(n, self.x).ok()
        }
    }
    let seq = FamAtRational { family, x };
    let s = weyl_sum(&seq, h, n, g)?;
    Ok(s.modulus_squared())
}

/// `1/N + (8 / (|h| K)) ln(3N) / N` as an outward-rounded enclosure.
pub fn tight_metric_bound(h: i64, k_const: &Rational, n: u64) -> (Rational, Rational) {
    let (ln_lo, ln_hi) = ln_bounds(&rat_int(3 * n as i64), 40);
    let coeff = rat_int(8) / (rat_int(h.abs()) * k_const);
    let inv_n = rat(1, n as i64);
    (
        &inv_n + &coeff * ln_lo * &inv_n,
        &inv_n + &coeff * ln_hi * &inv_n,
    )
}

/// `(1 + 17 / (|h| K)) ln(N) / N` as an outward-rounded enclosure.
pub fn relaxed_metric_bound(h: i64, k_const: &Rational, n: u64) -> (Rational, Rational) {
    let (ln_lo, ln_hi) = ln_bounds(&rat_int(n as i64), 40);
    let coeff = rat_int(1) + rat_int(17) / (rat_int(h.abs()) * k_const);
    let inv_n = rat(1, n as i64);
    (&coeff * ln_lo * &inv_n, &coeff * ln_hi * &inv_n)
}

/// Chebyshev tail of the mean-square bound: an upper bound on the measure of
/// `{x : |S_N(h u(x))| >= eps}`, namely `(1/eps^2)(1 + 17/(|h| K)) ln(N)/N`
/// with the logarithm rounded up.
pub fn chebyshev_tail(eps: &Rational, h: i64, k_const: &Rational, n: u64) -> Result<Rational> {
    if !eps.is_positive() || h == 0 || !k_const.is_positive() || n < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need eps > 0, h != 0, K > 0, N >= 3"
        )));
    }
    let (_, hi) = relaxed_metric_bound(h, k_const, n);
    Ok(hi / (eps * eps))
}

/// Exact mean-square value for linear families with pairwise distinct
/// integer coefficients: the cross terms integrate to zero over a full
/// period, leaving `1/N`. Serves as the independent orthogonality oracle.
pub fn exact_mean_square_linear(n: u64) -> Rational {
    rat(1, n as i64)
}
