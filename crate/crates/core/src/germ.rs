//! One-sided germs and intervals of germs.
//!
//! A germ `(x, +)` stands for "`x` approached from the right", `(x, -)` for
//! "`x` approached from the left".  Iterating a piecewise map on germs is
//! total even at cut points: each cut has a well-defined left and right
//! branch, so the orbit of a germ never dies the way the orbit of the cut
//! point itself does.
//!
//! Germs and ordinary points interleave in a common order
//! `x⁻ < x < x⁺ < y⁻ < y < y⁺` for `x < y`; a germ never equals a point.
//! That order is what makes endpoint bookkeeping unambiguous: an interval of
//! germs knows exactly which boundary points it contains.

use std::cmp::Ordering;
use std::fmt;

use crate::scalar::Scalar;

/// Side from which a germ approaches its base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Minus,
    Plus,
}

impl Dir {
    pub fn sign(self) -> i64 {
        match self {
            Dir::Minus => -1,
            Dir::Plus => 1,
        }
    }

    /// Composition with a monotone map of sign `s`: an increasing branch
    /// preserves the side, a decreasing branch flips it.
    pub fn times_sign(self, s: i64) -> Dir {
        debug_assert!(s == 1 || s == -1);
        if s == 1 {
            self
        } else {
            match self {
                Dir::Minus => Dir::Plus,
                Dir::Plus => Dir::Minus,
            }
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dir::Minus => write!(f, "-"),
            Dir::Plus => write!(f, "+"),
        }
    }
}

/// A one-sided germ `(base, dir)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Germ<K> {
    pub base: K,
    pub dir: Dir,
}

impl<K: Scalar> Germ<K> {
    pub fn plus(base: K) -> Self {
        Germ { base, dir: Dir::Plus }
    }

    pub fn minus(base: K) -> Self {
        Germ { base, dir: Dir::Minus }
    }

    /// `+1` for a right germ, `-1` for a left germ.
    pub fn epsilon(&self) -> i64 {
        self.dir.sign()
    }

    /// Total order on germs: compare bases, break ties by side.
    pub fn cmp_germ(&self, other: &Self) -> Ordering {
        match self.base.partial_cmp(&other.base) {
            Some(Ordering::Equal) => self.dir.sign().cmp(&other.dir.sign()),
            Some(ord) => ord,
            None => panic!("incomparable germ bases"),
        }
    }

    /// Order between a germ and a plain point; never `Equal`.
    pub fn cmp_point(&self, point: &K) -> Ordering {
        match self.base.partial_cmp(point) {
            Some(Ordering::Equal) => match self.dir {
                Dir::Minus => Ordering::Less,
                Dir::Plus => Ordering::Greater,
            },
            Some(ord) => ord,
            None => panic!("incomparable germ base and point"),
        }
    }

    /// `+1` if the germ lies right of the point, `-1` if left.  The
    /// half-point comparison weight `σ(x̂, c) = ±1/2` is this sign times
    /// one half; carrying the sign alone keeps integer arithmetic available.
    pub fn side_of(&self, point: &K) -> i64 {
        match self.cmp_point(point) {
            Ordering::Less => -1,
            Ordering::Greater => 1,
            Ordering::Equal => unreachable!(),
        }
    }
}

impl<K: Scalar> fmt::Display for Germ<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.dir)
    }
}

/// An interval of germs `⟨lo, hi⟩`.  Open, closed, half-open, and one-point
/// intervals of real numbers all arise by choosing the sides of the endpoint
/// germs; e.g. `]u,v[ = ⟨u⁺, v⁻⟩` and `[u,v] = ⟨u⁻, v⁺⟩`.
#[derive(Debug, Clone, PartialEq)]
pub enum GermInterval<K> {
    Empty,
    Span { lo: Germ<K>, hi: Germ<K> },
}

impl<K: Scalar> GermInterval<K> {
    /// Interval between two germs; empty when they are out of order.
    pub fn span(lo: Germ<K>, hi: Germ<K>) -> Self {
        if lo.cmp_germ(&hi) == Ordering::Greater {
            GermInterval::Empty
        } else {
            GermInterval::Span { lo, hi }
        }
    }

    pub fn open(u: K, v: K) -> Self {
        if u < v {
            GermInterval::Span { lo: Germ::plus(u), hi: Germ::minus(v) }
        } else {
            GermInterval::Empty
        }
    }

    pub fn closed(u: K, v: K) -> Self {
        if u <= v {
            GermInterval::Span { lo: Germ::minus(u), hi: Germ::plus(v) }
        } else {
            GermInterval::Empty
        }
    }

    /// `[u, v[`
    pub fn half_open_right(u: K, v: K) -> Self {
        if u < v {
            GermInterval::Span { lo: Germ::minus(u), hi: Germ::minus(v) }
        } else {
            GermInterval::Empty
        }
    }

    /// `]u, v]`
    pub fn half_open_left(u: K, v: K) -> Self {
        if u < v {
            GermInterval::Span { lo: Germ::plus(u), hi: Germ::plus(v) }
        } else {
            GermInterval::Empty
        }
    }

    pub fn point(x: K) -> Self {
        GermInterval::Span { lo: Germ::minus(x.clone()), hi: Germ::plus(x) }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, GermInterval::Empty)
    }

    pub fn contains_point(&self, x: &K) -> bool {
        match self {
            GermInterval::Empty => false,
            GermInterval::Span { lo, hi } => {
                lo.cmp_point(x) == Ordering::Less && hi.cmp_point(x) == Ordering::Greater
            }
        }
    }

    pub fn contains_germ(&self, g: &Germ<K>) -> bool {
        match self {
            GermInterval::Empty => false,
            GermInterval::Span { lo, hi } => {
                lo.cmp_germ(g) != Ordering::Greater && g.cmp_germ(hi) != Ordering::Greater
            }
        }
    }

    pub fn endpoints(&self) -> Option<(&Germ<K>, &Germ<K>)> {
        match self {
            GermInterval::Empty => None,
            GermInterval::Span { lo, hi } => Some((lo, hi)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(base: f64, dir: Dir) -> Germ<f64> {
        Germ { base, dir }
    }

    #[test]
    fn germ_order_interleaves_with_points() {
        let xm = g(1.0, Dir::Minus);
        let xp = g(1.0, Dir::Plus);
        assert_eq!(xm.cmp_germ(&xp), Ordering::Less);
        assert_eq!(xm.cmp_point(&1.0), Ordering::Less);
        assert_eq!(xp.cmp_point(&1.0), Ordering::Greater);
        assert_eq!(xp.cmp_point(&2.0), Ordering::Less);
        assert_eq!(g(2.0, Dir::Minus).cmp_germ(&xp), Ordering::Greater);
    }

    #[test]
    fn side_of_is_plus_minus_one() {
        assert_eq!(g(0.5, Dir::Plus).side_of(&0.5), 1);
        assert_eq!(g(0.5, Dir::Minus).side_of(&0.5), -1);
        assert_eq!(g(0.25, Dir::Plus).side_of(&0.5), -1);
        assert_eq!(g(0.75, Dir::Minus).side_of(&0.5), 1);
    }

    #[test]
    fn decreasing_branch_flips_side() {
        assert_eq!(Dir::Plus.times_sign(-1), Dir::Minus);
        assert_eq!(Dir::Minus.times_sign(-1), Dir::Plus);
        assert_eq!(Dir::Plus.times_sign(1), Dir::Plus);
    }

    #[test]
    fn interval_membership_honors_endpoint_sides() {
        let open = GermInterval::open(0.0, 1.0);
        assert!(open.contains_point(&0.5));
        assert!(!open.contains_point(&0.0));
        assert!(!open.contains_point(&1.0));

        let closed = GermInterval::closed(0.0, 1.0);
        assert!(closed.contains_point(&0.0));
        assert!(closed.contains_point(&1.0));

        let half = GermInterval::half_open_right(0.0, 1.0);
        assert!(half.contains_point(&0.0));
        assert!(!half.contains_point(&1.0));

        let pt = GermInterval::point(0.5);
        assert!(pt.contains_point(&0.5));
        assert!(!pt.contains_point(&(0.5 + 1e-9)));
    }

    #[test]
    fn point_interval_contains_only_its_two_germs() {
        let pt = GermInterval::point(0.5);
        assert!(pt.contains_germ(&g(0.5, Dir::Minus)));
        assert!(pt.contains_germ(&g(0.5, Dir::Plus)));
        assert!(!pt.contains_germ(&g(0.25, Dir::Plus)));
    }

    #[test]
    fn out_of_order_span_is_empty() {
        let lo = g(0.75, Dir::Plus);
        let hi = g(0.25, Dir::Minus);
        assert!(GermInterval::span(lo, hi).is_empty());
        assert!(GermInterval::open(1.0, 1.0).is_empty());
        assert!(!GermInterval::closed(1.0, 1.0).is_empty());
    }

    #[test]
    fn degenerate_span_holds_one_germ_and_no_points() {
        let u = g(0.5, Dir::Plus);
        let j = GermInterval::span(u.clone(), u.clone());
        assert!(j.contains_germ(&u));
        assert!(!j.contains_point(&0.5));
    }
}
