//! Subintervals of `[0,1]` with explicit open/closed endpoint flags.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Interval {
    /// Validating constructor: `0 <= lo <= hi <= 1`.
    pub fn try_new(lo: Rational, hi: Rational, closed_lo: bool, closed_hi: bool) -> Result<Self> {
        if lo.is_negative() || hi > Rational::one() || lo > hi {
            return Err(LabError::Domain(format!(
                "interval endpoints {lo}, {hi} not ordered inside [0,1]"
            )));
        }
        Ok(Interval { lo, hi, closed_lo, closed_hi })
    }

    /// `[lo, hi]`. Panics when the endpoints are not ordered inside `[0,1]`.
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::try_new(lo, hi, true, true).expect("invalid closed interval")
    }

    /// `(lo, hi)`. Panics when the endpoints are not ordered inside `[0,1]`.
    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::try_new(lo, hi, false, false).expect("invalid open interval")
    }

    pub fn point(x: Rational) -> Self {
        Self::closed(x.clone(), x)
    }

    pub fn unit() -> Self {
        Self::closed(Rational::zero(), Rational::one())
    }

    /// Open interval `(c - r, c + r)` clipped to `[0,1]`; a clipped side is
    /// closed at the boundary so the result stays relatively open.
    pub fn ball(c: &Rational, r: &Rational) -> Self {
        let lo = c - r;
        let hi = c + r;
        let (lo, closed_lo) = if lo.is_negative() { (Rational::zero(), true) } else { (lo, false) };
        let (hi, closed_hi) = if hi > Rational::one() { (Rational::one(), true) } else { (hi, false) };
        Interval { lo, hi, closed_lo, closed_hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.closed_lo && self.closed_hi))
    }

    pub fn length(&self) -> Rational {
        if self.is_empty() {
            Rational::zero()
        } else {
            &self.hi - &self.lo
        }
    }

    pub fn midpoint(&self) -> Rational {
        Rational::midpoint(&self.lo, &self.hi)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.closed_lo { *x >= self.lo } else { *x > self.lo };
        let below = if self.closed_hi { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn closure(&self) -> Interval {
        Interval { closed_lo: true, closed_hi: true, ..self.clone() }
    }

    pub fn interior(&self) -> Interval {
        Interval { closed_lo: false, closed_hi: false, ..self.clone() }
    }

    /// Open in the relative topology of `[0,1]`.
    pub fn is_relatively_open(&self) -> bool {
        (!self.closed_lo || self.lo.is_zero()) && (!self.closed_hi || self.hi == Rational::one())
    }

    /// `self ⊆ other`, exact and flag-aware.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        let lo_ok = other.lo < self.lo || (other.lo == self.lo && (other.closed_lo || !self.closed_lo));
        let hi_ok = self.hi < other.hi || (other.hi == self.hi && (other.closed_hi || !self.closed_hi));
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, closed_lo) = if self.lo > other.lo {
            (self.lo.clone(), self.closed_lo)
        } else if other.lo > self.lo {
            (other.lo.clone(), other.closed_lo)
        } else {
            (self.lo.clone(), self.closed_lo && other.closed_lo)
        };
        let (hi, closed_hi) = if self.hi < other.hi {
            (self.hi.clone(), self.closed_hi)
        } else if other.hi < self.hi {
            (other.hi.clone(), other.closed_hi)
        } else {
            (self.hi.clone(), self.closed_hi && other.closed_hi)
        };
        Interval { lo, hi, closed_lo, closed_hi }
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &Interval) -> bool {
        !self.intersects(other)
    }

    /// Distance between the closures (zero when they touch or overlap).
    pub fn gap_to(&self, other: &Interval) -> Rational {
        if self.hi < other.lo {
            &other.lo - &self.hi
        } else if other.hi < self.lo {
            &self.lo - &other.hi
        } else {
            Rational::zero()
        }
    }

    /// Symmetric enlargement by `eta`, clipped to `[0,1]`, keeping flags.
    pub fn enlarged(&self, eta: &Rational) -> Interval {
        let lo = Rational::max_of(&(&self.lo - eta), &Rational::zero());
        let hi = Rational::min_of(&(&self.hi + eta), &Rational::one());
        Interval { lo, hi, closed_lo: self.closed_lo, closed_hi: self.closed_hi }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.closed_lo { '[' } else { '(' };
        let r = if self.closed_hi { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Does the union of `cover` contain every point of `target`?
///
/// Exact: walks the covering intervals left to right and tracks the
/// supremum of what has been covered, including whether that supremum is
/// itself covered.
pub fn union_covers(cover: &[Interval], target: &Interval) -> bool {
    if target.is_empty() {
        return true;
    }
    let mut parts: Vec<&Interval> = cover.iter().filter(|c| c.intersects(target)).collect();
    parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.closed_lo.cmp(&a.closed_lo)));
    // `reach` is the covered frontier; `reach_closed` says whether the
    // frontier point itself is covered.
    let mut reach = target.lo.clone();
    let mut reach_closed = !target.closed_lo;
    let mut started = false;
    for c in parts {
        let starts_in_time = if !started {
            c.lo < target.lo || (c.lo == target.lo && (c.closed_lo || !target.closed_lo))
        } else {
            c.lo < reach || (c.lo == reach && (c.closed_lo || reach_closed))
        };
        if !starts_in_time {
            break;
        }
        started = true;
        if c.hi > reach || (c.hi == reach && c.closed_hi && !reach_closed) {
            reach = c.hi.clone();
            reach_closed = c.closed_hi;
        }
        if reach > target.hi || (reach == target.hi && (reach_closed || !target.closed_hi)) {
            return true;
        }
    }
    started && (reach > target.hi || (reach == target.hi && (reach_closed || !target.closed_hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn subset_respects_flags() {
        let closed = Interval::closed(q(1, 4), q(1, 2));
        let open = Interval::open(q(1, 4), q(1, 2));
        assert!(open.is_subset_of(&closed));
        assert!(!closed.is_subset_of(&open));
        assert!(Interval::point(q(1, 3)).is_subset_of(&open));
    }

    #[test]
    fn empty_iff_degenerate_not_both_closed() {
        assert!(Interval::open(q(1, 2), q(1, 2)).is_empty());
        assert!(!Interval::point(q(1, 2)).is_empty());
        assert!(Interval::try_new(q(1, 2), q(1, 2), true, false).unwrap().is_empty());
    }

    #[test]
    fn try_new_rejects_out_of_range() {
        assert!(Interval::try_new(q(-1, 2), q(1, 2), true, true).is_err());
        assert!(Interval::try_new(q(3, 4), q(1, 2), true, true).is_err());
        assert!(Interval::try_new(q(0, 1), q(3, 2), true, true).is_err());
    }

    #[test]
    fn cover_detection() {
        let cover = vec![Interval::open(q(0, 1), q(1, 2)), Interval::open(q(1, 3), q(1, 1))];
        assert!(union_covers(&cover, &Interval::closed(q(1, 8), q(7, 8))));
        assert!(!union_covers(&cover, &Interval::closed(q(0, 1), q(1, 2))));
        let gap = vec![Interval::open(q(0, 1), q(1, 2)), Interval::open(q(1, 2), q(1, 1))];
        assert!(!union_covers(&gap, &Interval::point(q(1, 2))));
        assert!(union_covers(&gap, &Interval::point(q(1, 4))));
        let touching = vec![Interval::try_new(q(0, 1), q(1, 2), false, true).unwrap(), Interval::open(q(1, 2), q(1, 1))];
        assert!(union_covers(&touching, &Interval::closed(q(1, 4), q(3, 4))));
    }

    #[test]
    fn ball_clips_to_unit() {
        let b = Interval::ball(&q(1, 10), &q(1, 5));
        assert_eq!(b.lo, Rational::zero());
        assert!(b.closed_lo && !b.closed_hi);
        assert!(b.is_relatively_open());
    }
}
