use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::moebius::MoebiusK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Strictness {
    Homeomorphism,
    DegreeOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

/// A lift given by code. `value` is only ever called on `[0, 1)`; the enum
/// extends it with `F(x + n) = F(x) + n`.
pub trait LiftFn: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn strictness(&self) -> Strictness {
        Strictness::Homeomorphism
    }
    fn name(&self) -> &str;
}

struct FnLift<F> {
    f: F,
    name: String,
    strictness: Strictness,
}

impl<F: Fn(f64) -> f64 + Send + Sync> LiftFn for FnLift<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn strictness(&self) -> Strictness {
        self.strictness
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Piecewise-linear lift through knots over one period; the knot `(x₀+1, y₀+1)`
/// closes the period.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    /// Knots may be given on any period; each is shifted by `floor(x)` first.
    pub fn new(breaks: &[(f64, f64)]) -> Result<Self> {
        if breaks.is_empty() {
            return Err(Error::InvalidBreakpoints("no breakpoints".into()));
        }
        let mut knots: Vec<(f64, f64)> = breaks
            .iter()
            .map(|&(x, y)| {
                let n = x.floor();
                (x - n, y - n)
            })
            .collect();
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidBreakpoints("non-finite knot".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidBreakpoints(format!("repeated abscissa {}", w[0].0)));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidBreakpoints(format!("decreasing at x = {}", w[1].0)));
            }
        }
        let (x0, y0) = knots[0];
        let (xl, yl) = knots[knots.len() - 1];
        if yl > y0 + 1.0 || xl >= x0 + 1.0 {
            return Err(Error::InvalidBreakpoints("knots exceed one period".into()));
        }
        Ok(PiecewiseLinear {
            xs: knots.iter().map(|k| k.0).collect(),
            ys: knots.iter().map(|k| k.1).collect(),
        })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, i: usize) -> (f64, f64, f64, f64) {
        let n = self.xs.len();
        if i + 1 < n {
            (self.xs[i], self.ys[i], self.xs[i + 1], self.ys[i + 1])
        } else {
            (self.xs[i], self.ys[i], self.xs[0] + 1.0, self.ys[0] + 1.0)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x0 = self.xs[0];
        let n = (x - x0).floor();
        let u = x - n;
        let i = self.xs.partition_point(|&k| k <= u).saturating_sub(1);
        let (xa, ya, xb, yb) = self.segment(i);
        let y = if u == xa {
            ya
        } else {
            ya + (u - xa) * (yb - ya) / (xb - xa)
        };
        y + n
    }

    pub fn is_strict(&self) -> bool {
        (0..self.xs.len()).all(|i| {
            let (_, ya, _, yb) = self.segment(i);
            yb > ya
        })
    }

    /// Maximal constant pieces as `(x_start, x_end, value)` on the base period.
    pub fn flats(&self) -> Vec<(f64, f64, f64)> {
        (0..self.xs.len())
            .filter_map(|i| {
                let (xa, ya, xb, yb) = self.segment(i);
                (yb == ya).then_some((xa, xb, ya))
            })
            .collect()
    }

    /// Inverse of a strictly increasing map, again piecewise linear.
    pub fn swapped(&self) -> Result<Self> {
        let knots: Vec<(f64, f64)> = self.knots().map(|(x, y)| (y, x)).collect();
        PiecewiseLinear::new(&knots)
    }
}

/// Real-line lift `F` of a circle map with `F(x + 1) = F(x) + 1`.
///
/// `Composition(v)` applies the last entry first, so `[f, g]` is `f ∘ g`.
#[derive(Clone)]
pub enum MonotoneLift {
    Rotation(f64),
    Moebius(MoebiusK),
    PiecewiseLinear(Arc<PiecewiseLinear>),
    Composition(Arc<[MonotoneLift]>),
    Inverse(Arc<MonotoneLift>),
    CollapseStaircase(Arc<PiecewiseLinear>),
    Min(Arc<[MonotoneLift; 2]>),
    Constructed(Arc<dyn LiftFn>),
    Infinite(Sign),
}

impl fmt::Debug for MonotoneLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotoneLift::Rotation(a) => write!(f, "Rotation({a})"),
            MonotoneLift::Moebius(m) => write!(f, "Moebius({m:?})"),
            MonotoneLift::PiecewiseLinear(p) => write!(f, "PiecewiseLinear({} knots)", p.xs.len()),
            MonotoneLift::Composition(v) => f.debug_list().entries(v.iter()).finish(),
            MonotoneLift::Inverse(g) => write!(f, "Inverse({g:?})"),
            MonotoneLift::CollapseStaircase(p) => write!(f, "CollapseStaircase({} knots)", p.xs.len()),
            MonotoneLift::Min(p) => write!(f, "Min({:?}, {:?})", p[0], p[1]),
            MonotoneLift::Constructed(c) => write!(f, "Constructed({})", c.name()),
            MonotoneLift::Infinite(s) => write!(f, "Infinite({s:?})"),
        }
    }
}

impl MonotoneLift {
    pub fn identity() -> Self {
        MonotoneLift::Rotation(0.0)
    }

    pub fn rotation(alpha: f64) -> Self {
        MonotoneLift::Rotation(alpha)
    }

    pub fn piecewise_linear(breaks: &[(f64, f64)]) -> Result<Self> {
        Ok(MonotoneLift::PiecewiseLinear(Arc::new(PiecewiseLinear::new(breaks)?)))
    }

    /// Wrap a closure defined on `[0, 1)`.
    pub fn from_fn<F>(name: impl Into<String>, strictness: Strictness, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MonotoneLift::Constructed(Arc::new(FnLift {
            f,
            name: name.into(),
            strictness,
        }))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, MonotoneLift::Infinite(_))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.is_infinite() {
            return Err(Error::EvalOnInfinite);
        }
        Ok(self.apply(x))
    }

    /// Unchecked evaluation; an infinite flag yields `±∞`.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            MonotoneLift::Rotation(a) => x + a,
            MonotoneLift::Moebius(m) => m.lift_value(x),
            MonotoneLift::PiecewiseLinear(p) | MonotoneLift::CollapseStaircase(p) => p.eval(x),
            MonotoneLift::Composition(v) => v.iter().rev().fold(x, |acc, f| f.apply(acc)),
            MonotoneLift::Inverse(g) => invert_value(g, x),
            MonotoneLift::Min(p) => p[0].apply(x).min(p[1].apply(x)),
            MonotoneLift::Constructed(c) => {
                let n = x.floor();
                n + c.value(x - n)
            }
            MonotoneLift::Infinite(Sign::Minus) => f64::NEG_INFINITY,
            MonotoneLift::Infinite(Sign::Plus) => f64::INFINITY,
        }
    }

    /// Circle value in `[0, 1)`.
    pub fn act(&self, x: f64) -> f64 {
        super::wrap(self.apply(x))
    }

    pub fn strictness(&self) -> Strictness {
        use Strictness::*;
        let both = |a: Strictness, b: Strictness| {
            if a == Homeomorphism && b == Homeomorphism {
                Homeomorphism
            } else {
                DegreeOne
            }
        };
        match self {
            MonotoneLift::Rotation(_) | MonotoneLift::Moebius(_) => Homeomorphism,
            MonotoneLift::PiecewiseLinear(p) => {
                if p.is_strict() {
                    Homeomorphism
                } else {
                    DegreeOne
                }
            }
            MonotoneLift::Composition(v) => v.iter().map(|f| f.strictness()).fold(Homeomorphism, both),
            MonotoneLift::Inverse(g) => g.strictness(),
            MonotoneLift::CollapseStaircase(_) => DegreeOne,
            MonotoneLift::Min(p) => both(p[0].strictness(), p[1].strictness()),
            MonotoneLift::Constructed(c) => c.strictness(),
            MonotoneLift::Infinite(_) => DegreeOne,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MonotoneLift) -> Result<MonotoneLift> {
        if self.is_infinite() || inner.is_infinite() {
            return Err(Error::EvalOnInfinite);
        }
        Ok(match (self, inner) {
            (MonotoneLift::Rotation(a), MonotoneLift::Rotation(b)) => MonotoneLift::Rotation(a + b),
            (MonotoneLift::Moebius(f), MonotoneLift::Moebius(g)) if f.k() == g.k() => {
                let (p, shift) = f.compose_lift(g);
                with_shift(MonotoneLift::Moebius(p), shift)
            }
            (MonotoneLift::Rotation(a), _) if *a == 0.0 => inner.clone(),
            (_, MonotoneLift::Rotation(b)) if *b == 0.0 => self.clone(),
            _ => {
                let mut parts: Vec<MonotoneLift> = Vec::new();
                for f in [self, inner] {
                    match f {
                        MonotoneLift::Composition(v) => parts.extend(v.iter().cloned()),
                        other => parts.push(other.clone()),
                    }
                }
                MonotoneLift::Composition(parts.into())
            }
        })
    }

    /// Compose a list left to right: `chain([f, g, h]) = f ∘ g ∘ h`.
    pub fn chain(maps: &[MonotoneLift]) -> Result<MonotoneLift> {
        let mut acc = MonotoneLift::identity();
        for f in maps {
            acc = acc.compose(f)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<MonotoneLift> {
        Ok(match self {
            MonotoneLift::Infinite(_) => return Err(Error::EvalOnInfinite),
            MonotoneLift::Rotation(a) => MonotoneLift::Rotation(-a),
            MonotoneLift::Moebius(m) => {
                let (inv, shift) = m.inverse_lift();
                with_shift(MonotoneLift::Moebius(inv), shift)
            }
            MonotoneLift::Inverse(g) => (**g).clone(),
            MonotoneLift::PiecewiseLinear(p) if p.is_strict() => MonotoneLift::PiecewiseLinear(Arc::new(p.swapped()?)),
            MonotoneLift::Composition(v) => {
                let inv: Result<Vec<_>> = v.iter().rev().map(|f| f.inverse()).collect();
                MonotoneLift::chain(&inv?)?
            }
            other => MonotoneLift::Inverse(Arc::new(other.clone())),
        })
    }

    /// `Fⁿ`, negative powers through the inverse.
    pub fn power(&self, n: i64) -> Result<MonotoneLift> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let n = n.unsigned_abs();
        Ok(match &base {
            MonotoneLift::Rotation(a) => MonotoneLift::Rotation(a * n as f64),
            MonotoneLift::Moebius(m) => {
                let (p, shift) = m.power_lift(n);
                with_shift(MonotoneLift::Moebius(p), shift)
            }
            _ => {
                let mut acc = MonotoneLift::identity();
                for _ in 0..n {
                    acc = acc.compose(&base)?;
                }
                acc
            }
        })
    }

    /// Iterate the lift `n` times from `x`.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |acc, _| self.apply(acc))
    }

    pub fn min(a: &MonotoneLift, b: &MonotoneLift) -> Result<MonotoneLift> {
        if a.is_infinite() || b.is_infinite() {
            return Err(Error::EvalOnInfinite);
        }
        Ok(MonotoneLift::Min(Arc::new([a.clone(), b.clone()])))
    }

    /// Central difference with step `h`.
    pub fn derivative(&self, x: f64, h: f64) -> f64 {
        (self.apply(x + h) - self.apply(x - h)) / (2.0 * h)
    }

    /// Largest `|F(x+1) − F(x) − 1|` over the sample.
    pub fn equivariance_defect(&self, xs: impl IntoIterator<Item = f64>) -> f64 {
        xs.into_iter()
            .map(|x| (self.apply(x + 1.0) - self.apply(x) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks monotonicity on a grid over one period (strict when claimed).
    pub fn check_monotone(&self, n: usize) -> Result<()> {
        let strict = self.strictness() == Strictness::Homeomorphism;
        let mut prev = self.apply(0.0);
        for i in 1..=n {
            let x = i as f64 / n as f64;
            let y = self.apply(x);
            if y < prev || (strict && y == prev) {
                return Err(Error::InvariantViolation(format!("monotonicity fails near x = {x}")));
            }
            prev = y;
        }
        Ok(())
    }

    /// Sup of `|self − other|` over the lift values on an `n`-point grid.
    pub fn sup_distance(&self, other: &MonotoneLift, n: usize) -> f64 {
        super::grid(n)
            .map(|x| (self.apply(x) - other.apply(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Sup of the cyclic distance between the two circle maps.
    pub fn circle_distance(&self, other: &MonotoneLift, n: usize) -> f64 {
        super::grid(n)
            .map(|x| super::cyclic_dist(self.apply(x), other.apply(x)))
            .fold(0.0, f64::max)
    }
}

fn with_shift(f: MonotoneLift, shift: f64) -> MonotoneLift {
    if shift == 0.0 {
        f
    } else {
        MonotoneLift::Composition(vec![MonotoneLift::Rotation(shift), f].into())
    }
}

/// `inf { x : F(x) ≥ y }` by bisection; on a flat this is its left endpoint.
fn invert_value(f: &MonotoneLift, y: f64) -> f64 {
    let n = y.floor();
    n + invert_reduced(f, y - n)
}

fn invert_reduced(f: &MonotoneLift, y: f64) -> f64 {
    let c = f.apply(0.0);
    let mut lo = y - c - 1.0;
    let mut hi = y - c + 1.0;
    while f.apply(lo) >= y {
        lo -= 1.0;
    }
    while f.apply(hi) < y {
        hi += 1.0;
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.apply(mid) >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::grid;
    use proptest::prelude::*;

    fn wobble() -> MonotoneLift {
        MonotoneLift::piecewise_linear(&[(0.0, 0.05), (0.3, 0.2), (0.6, 0.7), (0.9, 0.95)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((MonotoneLift::rotation(0.25).eval(0.9).unwrap() - 1.15).abs() < 1e-15);
        let inv = MonotoneLift::Inverse(Arc::new(MonotoneLift::rotation(0.25)));
        assert!(inv.eval(0.25).unwrap().abs() < 1e-12);
        let pl = MonotoneLift::piecewise_linear(&[(0.0, 0.0), (0.5, 0.75)]).unwrap();
        // linear interpolation on the segment (0,0)-(0.5,0.75)
        let oracle = 0.0 + (0.25 - 0.0) * (0.75 - 0.0) / (0.5 - 0.0);
        assert_eq!(pl.eval(0.25).unwrap(), oracle);
        assert_eq!(pl.eval(0.5).unwrap(), 0.75);
        assert_eq!(pl.eval(1.5).unwrap(), 1.75);
    }

    #[test]
    fn infinite_is_not_evaluable() {
        let inf = MonotoneLift::Infinite(Sign::Plus);
        assert_eq!(inf.eval(0.0), Err(Error::EvalOnInfinite));
        assert!(inf.compose(&MonotoneLift::identity()).is_err());
    }

    #[test]
    fn rotations_compose_exactly() {
        match MonotoneLift::rotation(0.2)
            .compose(&MonotoneLift::rotation(0.3))
            .unwrap()
        {
            MonotoneLift::Rotation(a) => assert_eq!(a, 0.2 + 0.3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverse_law_on_grid() {
        for f in [wobble(), MonotoneLift::rotation(0.37)] {
            let id = f.compose(&f.inverse().unwrap()).unwrap();
            let generic = f.compose(&MonotoneLift::Inverse(Arc::new(f.clone()))).unwrap();
            for x in grid(1000) {
                assert!((id.apply(x) - x).abs() < 1e-10);
                assert!((generic.apply(x) - x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn flat_inverse_takes_left_endpoint() {
        let stair = MonotoneLift::piecewise_linear(&[(0.0, 0.0), (0.2, 0.4), (0.5, 0.4)]).unwrap();
        assert_eq!(stair.strictness(), Strictness::DegreeOne);
        let inv = stair.inverse().unwrap();
        assert!((inv.apply(0.4) - 0.2).abs() < 1e-12);
        assert_eq!(stair.compose(&stair).unwrap().strictness(), Strictness::DegreeOne);
    }

    #[test]
    fn rejects_bad_breaks() {
        assert!(PiecewiseLinear::new(&[]).is_err());
        assert!(PiecewiseLinear::new(&[(0.0, 0.5), (0.5, 0.2)]).is_err());
        assert!(PiecewiseLinear::new(&[(0.0, 0.0), (0.5, 1.5)]).is_err());
    }

    #[test]
    fn flats_found() {
        let p = PiecewiseLinear::new(&[(0.0, 0.0), (0.2, 0.4), (0.5, 0.4)]).unwrap();
        assert_eq!(p.flats(), vec![(0.2, 0.5, 0.4)]);
    }

    #[test]
    fn constructed_extends_periodically() {
        let f = MonotoneLift::from_fn("sq", Strictness::Homeomorphism, |x| x * x);
        assert_eq!(f.apply(2.5), 2.25);
        assert!(f.equivariance_defect(grid(100)) < 1e-12);
    }

    #[test]
    fn power_matches_iteration() {
        let f = wobble().compose(&MonotoneLift::rotation(0.1)).unwrap();
        let f5 = f.power(5).unwrap();
        let fm2 = f.power(-2).unwrap();
        for x in grid(50) {
            assert!((f5.apply(x) - f.iterate(x, 5)).abs() < 1e-12);
            assert!((f.iterate(fm2.apply(x), 2) - x).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn translation_equivariance(x in -50.0f64..50.0, a in -2.0f64..2.0) {
            let maps = [
                MonotoneLift::rotation(a),
                wobble(),
                wobble().inverse().unwrap(),
                MonotoneLift::Inverse(Arc::new(wobble())),
                MonotoneLift::min(&wobble(), &MonotoneLift::rotation(0.02)).unwrap(),
            ];
            for f in &maps {
                prop_assert!((f.apply(x + 1.0) - f.apply(x) - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn compose_associative(x in 0.0f64..1.0, a in -1.0f64..1.0) {
            let f = wobble();
            let g = MonotoneLift::rotation(a);
            let h = wobble().inverse().unwrap();
            let left = f.compose(&g).unwrap().compose(&h).unwrap();
            let right = f.compose(&g.compose(&h).unwrap()).unwrap();
            prop_assert!((left.apply(x) - right.apply(x)).abs() <= 1e-12);
        }

        #[test]
        fn monotone_on_samples(x in 0.0f64..1.0, dx in 0.0f64..1.0) {
            let f = wobble();
            prop_assert!(f.apply(x) <= f.apply(x + dx));
        }
    }
}
