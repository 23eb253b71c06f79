//! One-dimensional set algebra on finite unions of closed intervals.
//!
//! Sets are kept in a canonical form: components sorted, pairwise disjoint
//! with positive gaps, and free of zero-length components. Intervals are
//! closed and boundary overlaps of measure zero are merged, so the canonical
//! form is a choice of representative of the Lebesgue equivalence class.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Closed interval `[lo, hi]` with rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    /// Panics when `lo > hi`; interval endpoints come from trusted
    /// construction sites, not raw input (parsers validate first).
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn center(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    /// Interval of length `len` centered at `c`.
    pub fn centered(c: &Rational, len: &Rational) -> Self {
        let half = len / Rational::from_integer(2.into());
        Interval::new(c - &half, c + &half)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}]",
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

/// Finite union of disjoint closed intervals in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalUnion {
    components: Vec<Interval>,
}

/// Canonicalizes a list of intervals: sorts, merges touching or overlapping
/// components, and drops zero-length (null) components. Measure is preserved
/// under merging interpreted as set union.
pub fn normalize(intervals: Vec<Interval>) -> IntervalUnion {
    let mut items = intervals;
    items.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
    for it in items {
        match merged.last_mut() {
            Some(last) if it.lo <= last.hi => {
                if it.hi > last.hi {
                    last.hi = it.hi;
                }
            }
            _ => merged.push(it),
        }
    }
    merged.retain(|it| it.lo < it.hi);
    IntervalUnion { components: merged }
}

impl IntervalUnion {
    pub fn new(intervals: Vec<Interval>) -> Self {
        normalize(intervals)
    }

    pub fn empty() -> Self {
        IntervalUnion {
            components: Vec::new(),
        }
    }

    /// Single-interval union.
    pub fn of(lo: Rational, hi: Rational) -> Self {
        normalize(vec![Interval::new(lo, hi)])
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Exact Lebesgue measure: the sum of component lengths.
    pub fn measure(&self) -> Rational {
        self.components
            .iter()
            .fold(Rational::zero(), |acc, it| acc + it.length())
    }

    /// `self + s` componentwise; measure is preserved.
    pub fn translate(&self, s: &Rational) -> Self {
        IntervalUnion {
            components: self
                .components
                .iter()
                .map(|it| Interval::new(&it.lo + s, &it.hi + s))
                .collect(),
        }
    }

    /// The centered interval `[-mu/2, mu/2]` of the same measure.
    pub fn symmetrize(&self) -> Result<Self> {
        let mu = self.measure();
        if mu.is_zero() {
            return Err(Error::DegenerateSet);
        }
        let half = mu / Rational::from_integer(2.into());
        Ok(IntervalUnion::of(-half.clone(), half))
    }

    /// Exact intersection by merging the two sorted component lists.
    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.components.len() && j < other.components.len() {
            let a = &self.components[i];
            let b = &other.components[j];
            let lo = if a.lo >= b.lo {
                a.lo.clone()
            } else {
                b.lo.clone()
            };
            let hi = if a.hi <= b.hi {
                a.hi.clone()
            } else {
                b.hi.clone()
            };
            if lo < hi {
                out.push(Interval::new(lo, hi));
            }
            match a.hi.cmp(&b.hi) {
                Ordering::Less | Ordering::Equal => i += 1,
                Ordering::Greater => j += 1,
            }
        }
        IntervalUnion { components: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.components.clone();
        all.extend(other.components.iter().cloned());
        normalize(all)
    }

    /// `|A Δ B| = |A| + |B| - 2|A ∩ B|`, exactly.
    pub fn symmetric_difference_measure(&self, other: &Self) -> Rational {
        let two = Rational::from_integer(2.into());
        self.measure() + other.measure() - two * self.intersect(other).measure()
    }

    /// Set inclusion up to null sets.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intersect(other).measure() == self.measure()
    }

    /// All component endpoints, in order.
    pub fn endpoints(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(2 * self.components.len());
        for it in &self.components {
            out.push(it.lo.clone());
            out.push(it.hi.clone());
        }
        out
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, it) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{it}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn iu(parts: &[(i64, i64)]) -> IntervalUnion {
        IntervalUnion::new(
            parts
                .iter()
                .map(|&(a, b)| Interval::new(rat(a), rat(b)))
                .collect(),
        )
    }

    #[test]
    fn touching_intervals_merge() {
        assert_eq!(iu(&[(0, 1), (1, 2)]), iu(&[(0, 2)]));
    }

    #[test]
    fn overlap_union() {
        let got = IntervalUnion::new(vec![
            Interval::new(rat(0), rat(1)),
            Interval::new(rat(3), rat(4)),
            Interval::new(ratio(1, 2), rat(2)),
        ]);
        assert_eq!(got, iu(&[(0, 2), (3, 4)]));
    }

    #[test]
    fn normalize_identity_and_idempotence() {
        let u = iu(&[(2, 3)]);
        assert_eq!(u.components().len(), 1);
        let again = IntervalUnion::new(u.components().to_vec());
        assert_eq!(again, u);
    }

    #[test]
    fn null_components_drop() {
        let u = IntervalUnion::new(vec![Interval::new(rat(1), rat(1))]);
        assert!(u.is_empty());
    }

    #[test]
    fn measures() {
        assert_eq!(iu(&[(-1, 1)]).measure(), rat(2));
        let split = IntervalUnion::new(vec![
            Interval::new(ratio(-3, 2), ratio(-1, 2)),
            Interval::new(ratio(1, 2), ratio(3, 2)),
        ]);
        assert_eq!(split.measure(), rat(2));
        assert_eq!(IntervalUnion::empty().measure(), rat(0));
    }

    #[test]
    fn symmetric_difference_examples() {
        let a = iu(&[(-1, 1)]);
        assert_eq!(a.symmetric_difference_measure(&a), rat(0));

        let b = IntervalUnion::of(ratio(-1, 2), ratio(3, 2));
        assert_eq!(a.symmetric_difference_measure(&b), rat(1));

        let split = IntervalUnion::new(vec![
            Interval::new(ratio(-3, 2), ratio(-1, 2)),
            Interval::new(ratio(1, 2), ratio(3, 2)),
        ]);
        assert_eq!(split.symmetric_difference_measure(&a), rat(2));
    }

    #[test]
    fn symmetrize_examples() {
        let split = IntervalUnion::new(vec![
            Interval::new(ratio(-3, 2), ratio(-1, 2)),
            Interval::new(ratio(1, 2), ratio(3, 2)),
        ]);
        assert_eq!(split.symmetrize().unwrap(), iu(&[(-1, 1)]));
        assert_eq!(iu(&[(0, 4)]).symmetrize().unwrap(), iu(&[(-2, 2)]));
        let three = iu(&[(1, 2), (5, 6), (10, 11)]);
        assert_eq!(
            three.symmetrize().unwrap(),
            IntervalUnion::of(ratio(-3, 2), ratio(3, 2))
        );
        assert!(IntervalUnion::empty().symmetrize().is_err());
    }

    #[test]
    fn symmetrize_idempotent() {
        let u = iu(&[(1, 2), (5, 6)]);
        let s = u.symmetrize().unwrap();
        assert_eq!(s.symmetrize().unwrap(), s);
    }

    #[test]
    fn translate_examples() {
        assert_eq!(iu(&[(-1, 1)]).translate(&rat(3)), iu(&[(2, 4)]));
        assert_eq!(
            iu(&[(0, 1), (2, 3)]).translate(&rat(-1)),
            iu(&[(-1, 0), (1, 2)])
        );
        let u = iu(&[(0, 1), (5, 9)]);
        assert_eq!(u.translate(&rat(0)), u);
    }

    #[test]
    fn inclusion_exclusion() {
        let a = iu(&[(0, 3), (5, 7)]);
        let b = iu(&[(2, 6)]);
        let lhs = a.measure() + b.measure();
        let rhs = a.union(&b).measure() + a.intersect(&b).measure();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn subset_checks() {
        let a = iu(&[(0, 1)]);
        let b = iu(&[(-1, 2)]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }
}
