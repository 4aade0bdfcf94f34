use serde::Serialize;

use super::{grid, wrap, MonotoneLift, DEFAULT_GRID};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rational {
    pub p: u64,
    pub q: u64,
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Enclosure of ρ(F) on the circle plus the lift-consistent estimate `Fⁿ(0)/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationNumber {
    pub lo: f64,
    pub hi: f64,
    pub lift_mean: f64,
    pub n_iter: usize,
    pub rational: Option<Rational>,
    pub has_fixed_point: bool,
}

impl RotationNumber {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Whether `value` mod 1 lies in the enclosure.
    pub fn contains(&self, value: f64) -> bool {
        let v = self.lo + wrap(value - self.lo);
        v <= self.hi
    }

    /// `k` when the detected rational is `1/k`, with `k = 1` for a fixed point.
    pub fn reciprocal(&self) -> Option<u32> {
        match self.rational {
            Some(Rational { p: 0, q: 1 }) => Some(1),
            Some(Rational { p: 1, q }) => Some(q as u32),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RationalSearch {
    pub q_max: u64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for RationalSearch {
    fn default() -> Self {
        RationalSearch {
            q_max: 64,
            grid: DEFAULT_GRID,
            tol: 1e-9,
        }
    }
}

/// Poincaré enclosure `[(Fⁿ(0) − 1)/n, (Fⁿ(0) + 1)/n]`, shifted so the midpoint is in `[0, 1)`.
pub fn rotation_enclosure(f: &MonotoneLift, n_iter: usize) -> Result<RotationNumber> {
    if f.is_infinite() {
        return Err(Error::EvalOnInfinite);
    }
    let n = n_iter.max(1);
    let y = f.iterate(0.0, n);
    let mean = y / n as f64;
    let shift = mean.floor();
    Ok(RotationNumber {
        lo: (y - 1.0) / n as f64 - shift,
        hi: (y + 1.0) / n as f64 - shift,
        lift_mean: mean,
        n_iter: n,
        rational: None,
        has_fixed_point: false,
    })
}

pub fn rotation_number(f: &MonotoneLift, n_iter: usize) -> Result<RotationNumber> {
    rotation_number_with(f, n_iter, RationalSearch::default())
}

/// Enclosure plus rational detection: the smallest `q ≤ q_max` for which
/// `F^q − id` reaches an integer on the grid (within `tol`).
pub fn rotation_number_with(f: &MonotoneLift, n_iter: usize, search: RationalSearch) -> Result<RotationNumber> {
    let mut rn = rotation_enclosure(f, n_iter)?;
    let xs: Vec<f64> = grid(search.grid).collect();
    let mut ys = xs.clone();
    for q in 1..=search.q_max {
        for y in ys.iter_mut() {
            *y = f.apply(*y);
        }
        let g = |x: f64| f.iterate(x, q as usize) - x;
        let vals: Vec<f64> = ys.iter().zip(&xs).map(|(y, x)| y - x).collect();
        if let Some(p) = integer_reached(&g, &xs, &vals, search.tol) {
            let p = p as i64;
            let q_i = q as i64;
            rn.rational = Some(Rational {
                p: p.rem_euclid(q_i) as u64,
                q,
            });
            rn.has_fixed_point = q == 1;
            break;
        }
    }
    Ok(rn)
}

/// Points with `|F^q(x) − x − p| ≤ tol` for the integer `p` that `F^q − id` reaches.
pub fn periodic_points(f: &MonotoneLift, q: u64, tol: f64) -> Result<Vec<f64>> {
    periodic_points_on(f, q, tol, DEFAULT_GRID)
}

pub fn periodic_points_on(f: &MonotoneLift, q: u64, tol: f64, n: usize) -> Result<Vec<f64>> {
    if f.is_infinite() {
        return Err(Error::EvalOnInfinite);
    }
    let q_us = q.max(1) as usize;
    let xs: Vec<f64> = grid(n).collect();
    let raw: Vec<f64> = xs.iter().map(|&x| f.iterate(x, q_us) - x).collect();
    let g_raw = |x: f64| f.iterate(x, q_us) - x;
    let p = integer_reached(&g_raw, &xs, &raw, tol).ok_or(Error::NoPeriodicPoints { q })?;
    let g = |x: f64| f.iterate(x, q_us) - x - p;
    let vals: Vec<f64> = raw.iter().map(|v| v - p).collect();

    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let (x0, g0) = (xs[i], vals[i]);
        let (x1, g1) = if i + 1 < n {
            (xs[i + 1], vals[i + 1])
        } else {
            (1.0, vals[0])
        };
        if g0.abs() <= tol {
            found.push((x0, g0.abs()));
        }
        if g0 * g1 < 0.0 {
            let r = bisect_root(&g, x0, x1, g0);
            found.push((wrap(r), g(r).abs()));
        }
        // one-sided contact, as at a parabolic fixed point
        let gp = if i == 0 { vals[n - 1] } else { vals[i - 1] };
        if g0.abs() < gp.abs() && g0.abs() < g1.abs() && g0.abs() > tol && gp * g0 > 0.0 && g0 * g1 > 0.0 {
            let xl = x0 - 1.0 / n as f64;
            let (xm, gm) = golden_min(|x| g(x).abs(), xl, x1);
            if gm <= tol {
                found.push((wrap(xm), gm));
            }
        }
    }
    Ok(merge_clusters(found, 10.0 * tol))
}

/// An integer hit by `g` within `tol`, refining the grid extrema when the
/// graph only touches an integer between samples.
fn integer_reached(g: &impl Fn(f64) -> f64, xs: &[f64], vals: &[f64], tol: f64) -> Option<f64> {
    let (mut i_lo, mut i_hi) = (0, 0);
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[i_lo] {
            i_lo = i;
        }
        if *v > vals[i_hi] {
            i_hi = i;
        }
    }
    let (lo, hi) = (vals[i_lo], vals[i_hi]);
    let p = (lo - tol).ceil();
    if p <= hi + tol {
        return Some(p);
    }
    let h = 1.0 / xs.len() as f64;
    let (_, m) = golden_min(g, xs[i_lo] - h, xs[i_lo] + h);
    if m <= p - 1.0 + tol {
        return Some(p - 1.0);
    }
    let (_, neg_max) = golden_min(|x| -g(x), xs[i_hi] - h, xs[i_hi] + h);
    if -neg_max >= p - tol {
        return Some(p);
    }
    None
}

fn bisect_root(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let sa = ga.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Merges cyclically adjacent candidates closer than `radius`, keeping the best residual.
fn merge_clusters(mut pts: Vec<(f64, f64)>, radius: f64) -> Vec<f64> {
    if pts.is_empty() {
        return Vec::new();
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<Vec<(f64, f64)>> = vec![vec![pts[0]]];
    for &p in &pts[1..] {
        let last = clusters.last_mut().unwrap();
        if p.0 - last.last().unwrap().0 <= radius {
            last.push(p);
        } else {
            clusters.push(vec![p]);
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0].0;
        let last = clusters.last().unwrap().last().unwrap().0;
        if first + 1.0 - last <= radius {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    let mut out: Vec<f64> = clusters
        .into_iter()
        .map(|c| c.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// A point with `F(x) = x + α̃` where `α̃ = F^n(0)/n`, `n = 10⁵`. Returns the point and its defect.
pub fn equal_rotation_point(f: &MonotoneLift) -> Result<(f64, f64)> {
    let alpha = rotation_enclosure(f, 100_000)?.lift_mean;
    let g = |x: f64| f.apply(x) - x - alpha;
    let n = DEFAULT_GRID;
    let xs: Vec<f64> = grid(n).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut best = (xs[0], vals[0].abs());
    for i in 0..n {
        if vals[i].abs() < best.1 {
            best = (xs[i], vals[i].abs());
        }
        let (x1, g1) = if i + 1 < n {
            (xs[i + 1], vals[i + 1])
        } else {
            (1.0, vals[0])
        };
        if vals[i] * g1 < 0.0 {
            let r = bisect_root(&g, xs[i], x1, vals[i]);
            let d = g(r).abs();
            if d < best.1 {
                best = (wrap(r), d);
            }
        }
    }
    if best.1 > 1e-6 {
        return Err(Error::WitnessNotFound { defect: best.1 });
    }
    Ok(best)
}

/// `max_{x, i} d(h(σᵢ(x)), τᵢ(h(x)))` over an `n`-point grid.
pub fn semi_conjugacy_defect(h: &MonotoneLift, sigma: &[MonotoneLift], tau: &[MonotoneLift], n: usize) -> Result<f64> {
    if sigma.len() != tau.len() {
        return Err(Error::LengthMismatch {
            left: sigma.len(),
            right: tau.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for x in grid(n) {
        let hx = h.apply(x);
        for (s, t) in sigma.iter().zip(tau) {
            worst = worst.max(super::cyclic_dist(h.apply(s.apply(x)), t.apply(hx)));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{cyclic_dist, Strictness};
    use proptest::prelude::*;

    fn wobble() -> MonotoneLift {
        MonotoneLift::piecewise_linear(&[(0.0, 0.0), (0.25, 0.3), (0.5, 0.45), (0.75, 0.8)]).unwrap()
    }

    #[test]
    fn rotation_rational_detected() {
        let r = rotation_number(&MonotoneLift::rotation(0.375), 10_000).unwrap();
        assert!(r.contains(0.375));
        assert!(r.width() <= 2e-4 + 1e-15);
        assert_eq!(r.rational, Some(Rational { p: 3, q: 8 }));
        assert!(!r.has_fixed_point);
    }

    #[test]
    fn golden_rotation_is_irrational_so_far() {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let r = rotation_number(&MonotoneLift::rotation(g), 10_000).unwrap();
        assert!(r.rational.is_none());
        assert!(r.contains(g));
    }

    #[test]
    fn periodic_points_of_third_rotation_cover_grid() {
        let pts = periodic_points(&MonotoneLift::rotation(1.0 / 3.0), 3, 1e-9).unwrap();
        assert_eq!(pts.len(), DEFAULT_GRID);
    }

    #[test]
    fn golden_rotation_has_no_periodic_points() {
        let g = MonotoneLift::rotation(0.5 * (5f64.sqrt() - 1.0));
        for q in [1, 5, 13, 64] {
            assert_eq!(periodic_points(&g, q, 1e-9), Err(Error::NoPeriodicPoints { q }));
        }
    }

    #[test]
    fn equal_rotation_point_for_rotation() {
        let (_, d) = equal_rotation_point(&MonotoneLift::rotation(0.3)).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn equal_rotation_point_for_wobbled_rotation() {
        let f = MonotoneLift::rotation(0.2).compose(&wobble()).unwrap();
        let (x, d) = equal_rotation_point(&f).unwrap();
        assert!(d <= 1e-8);
        // dense scan oracle: the displacement F(x) − x takes the value α̃ somewhere
        let alpha = rotation_enclosure(&f, 100_000).unwrap().lift_mean;
        let disp: Vec<f64> = grid(100_000).map(|y| f.apply(y) - y).collect();
        let lo = disp.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = disp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= alpha && alpha <= hi);
        assert!((f.apply(x) - x - alpha).abs() <= 1e-8);
    }

    #[test]
    fn semi_conjugacy_trivial_cases() {
        let a = [MonotoneLift::rotation(0.3), wobble()];
        let d = semi_conjugacy_defect(&MonotoneLift::identity(), &a, &a, 512).unwrap();
        assert_eq!(d, 0.0);
        let r = [MonotoneLift::rotation(0.3)];
        let d = semi_conjugacy_defect(&MonotoneLift::rotation(0.17), &r, &r, 512).unwrap();
        assert!(d < 1e-15);
        assert!(semi_conjugacy_defect(&MonotoneLift::identity(), &a, &r, 8).is_err());
    }

    #[test]
    fn merge_wraps_around_zero() {
        let pts = merge_clusters(vec![(0.0, 1e-12), (1.0 - 1e-10, 1e-11), (0.5, 0.0)], 1e-8);
        assert_eq!(pts, vec![0.0, 0.5]);
    }

    #[test]
    fn wobble_is_homeomorphism() {
        assert_eq!(wobble().strictness(), Strictness::Homeomorphism);
        assert!(cyclic_dist(wobble().apply(0.25), 0.3) < 1e-15);
    }

    proptest! {
        #[test]
        fn enclosure_contains_rotation(alpha in -3.0f64..3.0) {
            let r = rotation_enclosure(&MonotoneLift::rotation(alpha), 1000).unwrap();
            prop_assert!(r.contains(alpha));
            prop_assert!(r.width() <= 2e-3 + 1e-12);
        }

        #[test]
        fn rotation_number_conjugacy_invariant(a in 0.0f64..1.0) {
            let f = wobble();
            let g = MonotoneLift::rotation(a);
            let fg = rotation_enclosure(&f.compose(&g).unwrap(), 2000).unwrap();
            let gf = rotation_enclosure(&g.compose(&f).unwrap(), 2000).unwrap();
            let slack = fg.width() + gf.width();
            prop_assert!(cyclic_dist(fg.mid(), gf.mid()) <= slack);
        }
    }
}
