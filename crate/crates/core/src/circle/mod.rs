//! Points, arcs and cyclic order on 𝕊¹ = ℝ/ℤ, plus the lift calculus built on them.
//!
//! Angles live in `[0, 1)`. Everything that compares points does so through the
//! strict cyclic order, so an arc `]a, b[` never contains its endpoints.

mod lift;
mod rotation;

pub use lift::{LiftFn, MonotoneLift, PiecewiseLinear, Sign, Strictness};
pub use rotation::{
    equal_rotation_point, periodic_points, periodic_points_on, rotation_enclosure, rotation_number,
    rotation_number_with, semi_conjugacy_defect, Rational, RationalSearch, RotationNumber,
};

use serde::{Deserialize, Serialize};

pub const DEFAULT_GRID: usize = 4096;

/// Reduce to `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Forward distance from `a` to `x`, in `[0, 1)`.
pub fn offset(a: f64, x: f64) -> f64 {
    wrap(x - a)
}

pub fn cyclic_dist(x: f64, y: f64) -> f64 {
    let d = wrap(x - y);
    d.min(1.0 - d)
}

/// `x ∈ ]a, b[`; for `a == b` the arc is the circle minus `a`.
pub fn cyclic_less(a: f64, x: f64, b: f64) -> bool {
    let (a, x, b) = (wrap(a), wrap(x), wrap(b));
    if a == b {
        return x != a;
    }
    let dx = offset(a, x);
    dx > 0.0 && dx < offset(a, b)
}

/// Uniform grid `i / n`, `i < n`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| i as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(theta: f64) -> Self {
        CirclePoint(wrap(theta))
    }

    pub fn theta(self) -> f64 {
        self.0
    }
}

impl From<f64> for CirclePoint {
    fn from(x: f64) -> Self {
        CirclePoint::new(x)
    }
}

/// The open arc `]a, b[` traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicInterval {
    pub a: f64,
    pub b: f64,
}

impl CyclicInterval {
    pub fn new(a: f64, b: f64) -> Self {
        CyclicInterval { a: wrap(a), b: wrap(b) }
    }

    pub fn contains(&self, x: f64) -> bool {
        cyclic_less(self.a, x, self.b)
    }

    pub fn length(&self) -> f64 {
        if self.a == self.b {
            1.0
        } else {
            offset(self.a, self.b)
        }
    }

    pub fn midpoint(&self) -> f64 {
        wrap(self.a + 0.5 * self.length())
    }

    /// Point at fraction `t` of the way from `a` to `b`.
    pub fn at(&self, t: f64) -> f64 {
        wrap(self.a + t * self.length())
    }

    /// Fraction of the way from `a` to `x`; meaningful for `x` in the closure.
    pub fn fraction(&self, x: f64) -> f64 {
        offset(self.a, x) / self.length()
    }

    /// Closed-arc membership with an absolute slack at both ends.
    pub fn contains_closed(&self, x: f64, slack: f64) -> bool {
        self.contains(x) || cyclic_dist(x, self.a) <= slack || cyclic_dist(x, self.b) <= slack
    }

    /// `other ⊂ self` with `slack` allowed at the ends.
    pub fn contains_interval(&self, other: &CyclicInterval, slack: f64) -> bool {
        let len = self.length();
        let s = offset(self.a, other.a);
        let s = if s > len + slack && 1.0 - s <= slack {
            s - 1.0
        } else {
            s
        };
        s >= -slack && s + other.length() <= len + slack
    }

    /// Endpoint distance to another arc.
    pub fn endpoint_gap(&self, other: &CyclicInterval) -> f64 {
        cyclic_dist(self.a, other.a).max(cyclic_dist(self.b, other.b))
    }

    pub fn disjoint(&self, other: &CyclicInterval) -> bool {
        !self.contains(other.a) && !other.contains(self.a) && !(self.a == other.a) && !self.contains(other.midpoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_order_examples() {
        assert!(cyclic_less(0.1, 0.2, 0.3));
        assert!(cyclic_less(0.9, 0.05, 0.2));
        assert!(!cyclic_less(0.3, 0.2, 0.1));
        assert!(cyclic_less(0.4, 0.1, 0.4));
        assert!(!cyclic_less(0.4, 0.4, 0.4));
    }

    #[test]
    fn arc_endpoints_excluded() {
        let arc = CyclicInterval::new(0.8, 0.1);
        assert!(!arc.contains(0.8));
        assert!(!arc.contains(0.1));
        assert!(arc.contains(0.95));
        assert!((arc.length() - 0.3).abs() < 1e-15);
        assert!((arc.midpoint() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn wrap_stays_in_range() {
        assert_eq!(wrap(-1e-20), 0.0);
        assert_eq!(wrap(1.0), 0.0);
        assert!((wrap(-0.25) - 0.75).abs() < 1e-15);
        assert_eq!(CirclePoint::new(2.5).theta(), 0.5);
    }

    #[test]
    fn interval_containment() {
        let big = CyclicInterval::new(0.9, 0.3);
        assert!(big.contains_interval(&CyclicInterval::new(0.95, 0.1), 0.0));
        assert!(!big.contains_interval(&CyclicInterval::new(0.2, 0.4), 0.0));
        assert!(big.disjoint(&CyclicInterval::new(0.4, 0.5)));
        assert!(!big.disjoint(&CyclicInterval::new(0.25, 0.5)));
    }
}
