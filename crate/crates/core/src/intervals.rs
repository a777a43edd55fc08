//! Finite unions of half-open rational intervals with exact measure.
//!
//! The canonical representation is a sorted list of pairwise disjoint,
//! non-empty `[lo, hi)` intervals with adjacent intervals merged, so equality
//! of sets is equality of representations and every measure is an exact
//! rational. Endpoint topology is normalized to half-open: single points have
//! measure zero and none of the counting or projection statements depend on
//! them.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::rational::{floor_int, frac_exact, pow2, Rational};

/// Half-open rational interval `[lo, hi)`; empty when `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl QInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(alloc::format!(
                "interval endpoints out of order"
            )));
        }
        Ok(QInterval { lo, hi })
    }

    pub fn measure(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }
}

/// Membership of an enclosed value in an interval set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// The whole ball lies inside one interval.
    In,
    /// The whole ball is disjoint from the set.
    Out,
    /// The ball straddles an endpoint; refine and retry.
    Boundary,
}

/// Canonical finite union of half-open rational intervals.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QIntervalSet {
    intervals: Vec<QInterval>,
}

impl QIntervalSet {
    pub fn empty() -> Self {
        QIntervalSet { intervals: Vec::new() }
    }

    /// The unit interval `[0, 1)`.
    pub fn unit() -> Self {
        QIntervalSet::from_intervals([QInterval {
            lo: Rational::zero(),
            hi: crate::rational::rat_int(1),
        }])
    }

    /// Canonicalizes an arbitrary collection: drops empty intervals, sorts,
    /// merges overlapping and adjacent ones.
    pub fn from_intervals<I: IntoIterator<Item = QInterval>>(intervals: I) -> Self {
        let mut v: Vec<QInterval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut out: Vec<QInterval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        QIntervalSet { intervals: out }
    }

    pub fn single(lo: Rational, hi: Rational) -> Result<Self> {
        Ok(QIntervalSet::from_intervals([QInterval::new(lo, hi)?]))
    }

    pub fn intervals(&self) -> &[QInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> Rational {
        self.intervals
            .iter()
            .fold(Rational::zero(), |acc, iv| acc + iv.measure())
    }

    pub fn union(&self, other: &QIntervalSet) -> QIntervalSet {
        QIntervalSet::from_intervals(
            self.intervals.iter().chain(other.intervals.iter()).cloned(),
        )
    }

    pub fn intersect(&self, other: &QIntervalSet) -> QIntervalSet {
        let mut out = Vec::new();
        let mut i = 0;
        let mut j = 0;
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            let lo = if a.lo >= b.lo { a.lo.clone() } else { b.lo.clone() };
            let hi = if a.hi <= b.hi { a.hi.clone() } else { b.hi.clone() };
            if lo < hi {
                out.push(QInterval { lo, hi });
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        QIntervalSet { intervals: out }
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &QIntervalSet) -> QIntervalSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            let mut lo = a.lo.clone();
            for b in &other.intervals {
                if b.hi <= lo {
                    continue;
                }
                if b.lo >= a.hi {
                    break;
                }
                if b.lo > lo {
                    out.push(QInterval { lo: lo.clone(), hi: b.lo.clone() });
                }
                if b.hi > lo {
                    lo = b.hi.clone();
                }
                if lo >= a.hi {
                    break;
                }
            }
            if lo < a.hi {
                out.push(QInterval { lo, hi: a.hi.clone() });
            }
        }
        QIntervalSet { intervals: out }
    }

    pub fn symmetric_difference(&self, other: &QIntervalSet) -> QIntervalSet {
        self.difference(other).union(&other.difference(self))
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        // Binary search on the sorted interval list.
        let idx = self.intervals.partition_point(|iv| iv.hi <= *x);
        idx < self.intervals.len() && self.intervals[idx].contains(x)
    }

    /// Decides membership of an enclosed value where the enclosure permits.
    pub fn contains_ball(&self, x: &Ball) -> Membership {
        let inf = x.inf().to_rational();
        let sup = x.sup().to_rational();
        for iv in &self.intervals {
            if sup < iv.lo {
                return Membership::Out;
            }
            if inf >= iv.hi {
                continue;
            }
            // The ball meets [lo, hi); fully inside?
            return if inf >= iv.lo && sup < iv.hi {
                Membership::In
            } else {
                Membership::Boundary
            };
        }
        Membership::Out
    }

    /// Image under the fractional-part map, computed casewise per interval.
    ///
    /// For `[A, B)` with `A = n + alpha`, `B = p + beta` (`n <= p` integers,
    /// `alpha, beta` in `[0,1)`):
    /// same block `n = p` gives `[alpha, beta)`; adjacent blocks `p = n + 1`
    /// give `[0, beta) + [alpha, 1)`; two or more blocks cover `[0, 1)`.
    pub fn frac_project(&self) -> QIntervalSet {
        let one = crate::rational::rat_int(1);
        let mut pieces = Vec::new();
        for iv in &self.intervals {
            if iv.is_empty() {
                continue;
            }
            let n = floor_int(&iv.lo);
            let p = floor_int(&iv.hi);
            let alpha = frac_exact(&iv.lo);
            let beta = frac_exact(&iv.hi);
            let span = &p - &n;
            if span.is_zero() {
                pieces.push(QInterval { lo: alpha, hi: beta });
            } else if span == 1u8.into() {
                pieces.push(QInterval { lo: Rational::zero(), hi: beta });
                pieces.push(QInterval { lo: alpha, hi: one.clone() });
            } else {
                pieces.push(QInterval { lo: Rational::zero(), hi: one.clone() });
            }
        }
        QIntervalSet::from_intervals(pieces)
    }
}

/// Sequential disjointification of an enumerated interval list: the k-th
/// output block is `I_k` minus the union of the earlier inputs, split into
/// disjoint pieces, preserving enumeration order.
pub fn disjointify_enumerated(intervals: &[QInterval]) -> Vec<Vec<QInterval>> {
    let mut seen = QIntervalSet::empty();
    let mut out = Vec::with_capacity(intervals.len());
    for iv in intervals {
        let piece = QIntervalSet::from_intervals([iv.clone()]).difference(&seen);
        out.push(piece.intervals().to_vec());
        seen = seen.union(&QIntervalSet::from_intervals([iv.clone()]));
    }
    out
}

/// Tail-measure bound of a prefix-represented effectively open set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailBound {
    /// `tail(p) = coeff * ratio^p`.
    GeometricDecay { coeff: Rational, ratio: Rational },
    /// Explicit per-stage bounds, `table[p - 1]` for stage `p`.
    Table(Vec<Rational>),
}

impl TailBound {
    /// Upper bound on the measure of everything after stage `p` (1-based).
    pub fn at(&self, p: usize) -> Option<Rational> {
        match self {
            TailBound::GeometricDecay { coeff, ratio } => {
                let mut r = Rational::from_integer(1.into());
                for _ in 0..p {
                    r *= ratio;
                }
                Some(coeff * r)
            }
            TailBound::Table(t) => t.get(p - 1).cloned(),
        }
    }
}

/// Finite prefix of an effectively open set: stage `k` is the union of the
/// first `k` enumerated interval blocks; the optional tail bound dominates
/// the measure of everything not yet enumerated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sigma01Prefix {
    stages: Vec<QIntervalSet>,
    tail_bound: Option<TailBound>,
}

impl Sigma01Prefix {
    /// Builds from per-stage increments (each stage unions the next block).
    pub fn from_increments<I: IntoIterator<Item = QIntervalSet>>(
        increments: I,
        tail_bound: Option<TailBound>,
    ) -> Self {
        let mut stages: Vec<QIntervalSet> = Vec::new();
        let mut acc = QIntervalSet::empty();
        for inc in increments {
            acc = acc.union(&inc);
            stages.push(acc.clone());
        }
        Sigma01Prefix { stages, tail_bound }
    }

    /// Builds from already-cumulative stages; verifies monotonicity.
    pub fn from_stages(stages: Vec<QIntervalSet>, tail_bound: Option<TailBound>) -> Result<Self> {
        for w in stages.windows(2) {
            if w[0].difference(&w[1]).is_empty() {
                continue;
            }
            return Err(Error::InvalidArgument(alloc::format!(
                "stages are not nondecreasing under inclusion"
            )));
        }
        Ok(Sigma01Prefix { stages, tail_bound })
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Stage `p` (1-based).
    pub fn stage(&self, p: usize) -> &QIntervalSet {
        &self.stages[p - 1]
    }

    pub fn last_stage(&self) -> Option<&QIntervalSet> {
        self.stages.last()
    }

    pub fn tail_bound(&self) -> Option<&TailBound> {
        self.tail_bound.as_ref()
    }

    pub fn tail_at(&self, p: usize) -> Option<Rational> {
        self.tail_bound.as_ref().and_then(|t| t.at(p))
    }

    /// Fractional-part projection approximated to error `2^-g`: projects the
    /// least stage whose tail bound is below `2^-g` and returns that bound as
    /// the error certificate (projection can only shrink measure, so the
    /// un-enumerated remainder still contributes at most the tail).
    pub fn frac_project_approx(&self, g: u32) -> Result<(QIntervalSet, Rational)> {
        let tail = self.tail_bound.as_ref().ok_or(Error::NoTailBound)?;
        let threshold = pow2(-(g as i64));
        for p in 1..=self.stages.len() {
            if let Some(t) = tail.at(p) {
                if t < threshold {
                    return Ok((self.stage(p).frac_project(), t));
                }
            }
        }
        Err(Error::StagesExhausted {
            available: self.stages.len(),
        })
    }
}
