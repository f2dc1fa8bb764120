//! Finite unions of closed real intervals.
//!
//! Every set value `F(x)` and every preimage `F⁻¹(y)` handled by this crate is
//! an [`IntervalUnion`]: a sorted list of pairwise disjoint closed intervals
//! separated by strict gaps. Unbounded endpoints are stored as `±∞`, so
//! membership and distances are exact for half-lines and the whole line.
//!
//! Open pieces are represented by their closure. Distances to a set and to its
//! closure coincide, which is the only thing the estimators consume.

use std::fmt;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo ≤ hi`; `lo` may be `-∞` and `hi` may
/// be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedInterval {
    lo: f64,
    hi: f64,
}

impl ClosedInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "singleton must be finite, got {x}");
        Self { lo: x, hi: x }
    }

    pub fn whole_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    /// Distance from `p` to the interval.
    pub fn distance(&self, p: f64) -> f64 {
        if p < self.lo {
            self.lo - p
        } else if p > self.hi {
            p - self.hi
        } else {
            0.0
        }
    }

    /// The unique point of the interval closest to `p`.
    pub fn clamp(&self, p: f64) -> f64 {
        p.max(self.lo).min(self.hi)
    }

    /// Midpoint of a bounded interval; `None` if either endpoint is infinite.
    pub fn midpoint(&self) -> Option<f64> {
        self.is_bounded().then_some(self.lo + 0.5 * (self.hi - self.lo))
    }

    pub fn intersect(&self, other: &ClosedInterval) -> Option<ClosedInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(ClosedInterval { lo, hi })
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of closed intervals in canonical form.
///
/// Parts are sorted by lower endpoint and separated by strict gaps; touching
/// or overlapping inputs are merged. The empty list is the empty set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    parts: Vec<ClosedInterval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn singleton(x: f64) -> Self {
        Self {
            parts: vec![ClosedInterval::point(x)],
        }
    }

    pub fn whole_line() -> Self {
        Self {
            parts: vec![ClosedInterval::whole_line()],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self {
            parts: vec![ClosedInterval::new(lo, hi)?],
        })
    }

    /// Canonical sorted, merged, disjoint form of an arbitrary list of
    /// intervals.
    pub fn normalize(mut raw: Vec<ClosedInterval>) -> Self {
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut parts: Vec<ClosedInterval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match parts.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => parts.push(iv),
            }
        }
        Self { parts }
    }

    /// Builds a union from raw `(lo, hi)` pairs, rejecting any pair with
    /// `lo > hi`.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let raw = pairs
            .iter()
            .map(|&(lo, hi)| ClosedInterval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize(raw))
    }

    pub fn parts(&self) -> &[ClosedInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.parts.iter().any(|iv| iv.contains(p))
    }

    /// `d(p; S)`; `+∞` for the empty set.
    pub fn distance(&self, p: f64) -> f64 {
        self.parts
            .iter()
            .map(|iv| iv.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// A point of the set attaining `d(p; S)`, ties broken toward the smaller
    /// value.
    pub fn nearest_point(&self, p: f64) -> Result<f64> {
        let mut best: Option<(f64, f64)> = None;
        for iv in &self.parts {
            let c = iv.clamp(p);
            let d = iv.distance(p);
            match best {
                Some((bd, _)) if d >= bd => {}
                _ => best = Some((d, c)),
            }
        }
        best.map(|(_, c)| c).ok_or(Error::EmptySet)
    }

    /// Minkowski sum with the singleton `{t}`.
    pub fn shift(&self, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        // Shifting a nonempty union by a finite amount keeps gaps and order.
        Self {
            parts: self
                .parts
                .iter()
                .map(|iv| ClosedInterval {
                    lo: iv.lo + t,
                    hi: iv.hi + t,
                })
                .collect(),
        }
    }

    /// Image under `x ↦ -x`.
    pub fn negate(&self) -> Self {
        Self {
            parts: self
                .parts
                .iter()
                .rev()
                .map(|iv| ClosedInterval {
                    lo: -iv.hi,
                    hi: -iv.lo,
                })
                .collect(),
        }
    }

    pub fn union(&self, other: &IntervalUnion) -> Self {
        let mut raw = self.parts.clone();
        raw.extend_from_slice(&other.parts);
        Self::normalize(raw)
    }

    pub fn intersect_interval(&self, window: &ClosedInterval) -> Self {
        Self {
            parts: self
                .parts
                .iter()
                .filter_map(|iv| iv.intersect(window))
                .collect(),
        }
    }

    /// Smallest closed interval containing the set.
    pub fn hull(&self) -> Option<ClosedInterval> {
        Some(ClosedInterval {
            lo: self.parts.first()?.lo,
            hi: self.parts.last()?.hi,
        })
    }

    /// Finite endpoints of every part, in increasing order, without
    /// duplicates.
    pub fn finite_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.parts.len());
        for iv in &self.parts {
            for e in [iv.lo, iv.hi] {
                if e.is_finite() && out.last() != Some(&e) {
                    out.push(e);
                }
            }
        }
        out
    }
}

impl From<ClosedInterval> for IntervalUnion {
    fn from(iv: ClosedInterval) -> Self {
        Self { parts: vec![iv] }
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "[")?;
        for (i, iv) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{iv}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(u: &IntervalUnion) -> Vec<(f64, f64)> {
        u.parts().iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    #[test]
    fn normalize_merges_overlap() {
        let u = IntervalUnion::from_pairs(&[(1.0, 2.0), (1.5, 3.0)]).unwrap();
        assert_eq!(pairs(&u), vec![(1.0, 3.0)]);
    }

    #[test]
    fn normalize_sorts_and_keeps_singleton() {
        let u = IntervalUnion::from_pairs(&[(2.0, 2.0), (0.0, 1.0)]).unwrap();
        assert_eq!(pairs(&u), vec![(0.0, 1.0), (2.0, 2.0)]);
    }

    #[test]
    fn normalize_empty_and_touching() {
        assert!(IntervalUnion::from_pairs(&[]).unwrap().is_empty());
        let u = IntervalUnion::from_pairs(&[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(pairs(&u), vec![(0.0, 2.0)]);
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(matches!(
            IntervalUnion::from_pairs(&[(0.0, 1.0), (3.0, 2.0)]),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(ClosedInterval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let u = IntervalUnion::interval(1.0, 2.0).unwrap();
        assert_eq!(u.distance(1.5), 0.0);
        // dist(1/4; {1/8}) = 1/8
        assert_eq!(IntervalUnion::singleton(0.125).distance(0.25), 0.125);
        assert_eq!(IntervalUnion::empty().distance(0.0), f64::INFINITY);
    }

    #[test]
    fn distance_to_unbounded_parts() {
        let half = IntervalUnion::interval(f64::NEG_INFINITY, -2.0).unwrap();
        assert_eq!(half.distance(0.0), 2.0);
        assert_eq!(half.distance(-1e300), 0.0);
        assert_eq!(IntervalUnion::whole_line().distance(7.0), 0.0);
    }

    #[test]
    fn nearest_point_examples() {
        let u = IntervalUnion::from_pairs(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(u.nearest_point(1.5).unwrap(), 1.0);
        assert_eq!(
            IntervalUnion::interval(0.0, 1.0).unwrap().nearest_point(5.0).unwrap(),
            1.0
        );
        let q_branch = IntervalUnion::interval(-0.5, -0.25).unwrap();
        assert_eq!(q_branch.nearest_point(-0.25).unwrap(), -0.25);
        assert_eq!(IntervalUnion::empty().nearest_point(0.0), Err(Error::EmptySet));
    }

    #[test]
    fn negate_and_shift() {
        let u = IntervalUnion::from_pairs(&[(-3.0, -2.0), (1.0, f64::INFINITY)]).unwrap();
        assert_eq!(
            pairs(&u.negate()),
            vec![(f64::NEG_INFINITY, -1.0), (2.0, 3.0)]
        );
        assert_eq!(pairs(&u.shift(1.0)), vec![(-2.0, -1.0), (2.0, f64::INFINITY)]);
    }

    fn raw_interval() -> impl Strategy<Value = ClosedInterval> {
        (-50.0f64..50.0, 0.0f64..10.0, 0u8..8).prop_map(|(lo, w, kind)| match kind {
            0 => ClosedInterval::new(f64::NEG_INFINITY, lo).unwrap(),
            1 => ClosedInterval::new(lo, f64::INFINITY).unwrap(),
            2 => ClosedInterval::point(lo),
            _ => ClosedInterval::new(lo, lo + w).unwrap(),
        })
    }

    proptest! {
        #[test]
        fn normalized_form_is_canonical(raw in prop::collection::vec(raw_interval(), 0..8)) {
            let u = IntervalUnion::normalize(raw);
            for w in u.parts().windows(2) {
                prop_assert!(w[0].hi() < w[1].lo());
            }
        }

        #[test]
        fn distance_matches_unmerged(raw in prop::collection::vec(raw_interval(), 0..8), p in -80.0f64..80.0) {
            let oracle = raw.iter().map(|iv| iv.distance(p)).fold(f64::INFINITY, f64::min);
            let u = IntervalUnion::normalize(raw);
            prop_assert_eq!(u.distance(p), oracle);
            prop_assert_eq!(u.distance(p) == 0.0, u.contains(p));
        }

        #[test]
        fn distance_is_one_lipschitz(raw in prop::collection::vec(raw_interval(), 1..8), p in -80.0f64..80.0, p2 in -80.0f64..80.0) {
            let u = IntervalUnion::normalize(raw);
            let lhs = (u.distance(p) - u.distance(p2)).abs();
            prop_assert!(lhs <= (p - p2).abs() * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn nearest_point_attains_distance(raw in prop::collection::vec(raw_interval(), 1..8), p in -80.0f64..80.0) {
            let u = IntervalUnion::normalize(raw);
            let c = u.nearest_point(p).unwrap();
            prop_assert!(u.contains(c));
            prop_assert_eq!((c - p).abs(), u.distance(p));
        }
    }
}
