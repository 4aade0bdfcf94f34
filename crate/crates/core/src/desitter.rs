//! The de Sitter strip: conformal factor, cross-ratio volumes, the
//! four-rectangle invariant function and the Ω_h family of models.
//!
//! Chart: `x = cot(πθ)` takes `4 dx dy / (x − y)²` to `4π² / sin²(π(θ − φ)) dθ dφ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::circle::{cyclic_dist, grid, CyclicInterval, MonotoneLift, Strictness, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::moebius::MoebiusK;
use crate::schottky::GapSystem;
use crate::surface::SurfaceModel;

/// A point of ℝ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ext {
    Finite(f64),
    Infinity,
}

impl Ext {
    fn homogeneous(self) -> (f64, f64) {
        match self {
            Ext::Finite(x) if x.is_finite() => (x, 1.0),
            _ => (1.0, 0.0),
        }
    }

    /// Point of ℝ ∪ {∞} over the circle angle `θ`.
    pub fn from_theta(theta: f64) -> Self {
        let s = (PI * theta).sin();
        if s.abs() < 1e-300 {
            Ext::Infinity
        } else {
            Ext::Finite((PI * theta).cos() / s)
        }
    }
}

impl From<f64> for Ext {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            Ext::Finite(x)
        } else {
            Ext::Infinity
        }
    }
}

fn wedge(p: (f64, f64), q: (f64, f64)) -> f64 {
    p.0 * q.1 - p.1 * q.0
}

/// `[a, b, c, d] = (a − c)/(a − d) · (b − d)/(b − c)` in homogeneous coordinates.
pub fn cross_ratio(a: Ext, b: Ext, c: Ext, d: Ext) -> Result<f64> {
    if a == d || b == c {
        return Err(Error::DegenerateQuadruple);
    }
    let (a, b, c, d) = (a.homogeneous(), b.homogeneous(), c.homogeneous(), d.homogeneous());
    let den = wedge(a, d) * wedge(b, c);
    if den == 0.0 {
        return Err(Error::DegenerateQuadruple);
    }
    Ok(wedge(a, c) * wedge(b, d) / den)
}

/// Cross-ratio of four circle angles; equal to `cross_ratio` of their cot-chart images.
pub fn cross_ratio_theta(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let s = |u: f64, v: f64| (PI * (v - u)).sin();
    let den = s(a, d) * s(b, c);
    if cyclic_dist(a, d) == 0.0 || cyclic_dist(b, c) == 0.0 || den == 0.0 {
        return Err(Error::DegenerateQuadruple);
    }
    Ok(s(a, c) * s(b, d) / den)
}

/// Volume `4 log [a, b, c, d]` of the rectangle `[a, b] × [c, d]`.
pub fn rect_volume(a: Ext, b: Ext, c: Ext, d: Ext) -> Result<f64> {
    log_volume(cross_ratio(a, b, c, d)?)
}

pub fn rect_volume_theta(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    log_volume(cross_ratio_theta(a, b, c, d)?)
}

fn log_volume(cr: f64) -> Result<f64> {
    if cr > 0.0 {
        Ok(4.0 * cr.ln())
    } else {
        Err(Error::NonPositiveCrossRatio(cr))
    }
}

/// Conformal factor `Ω` of a metric `Ω dθ dφ`.
#[derive(Clone)]
pub struct ConformalFactor {
    name: String,
    omega: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalFactor").field("name", &self.name).finish()
    }
}

impl ConformalFactor {
    pub fn new(name: impl Into<String>, omega: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ConformalFactor {
            name: name.into(),
            omega: Arc::new(omega),
        }
    }

    pub fn de_sitter() -> Self {
        ConformalFactor::new("dS2", |t, p| {
            let s = (PI * (t - p)).sin();
            4.0 * PI * PI / (s * s)
        })
    }

    /// `k² Ω(kθ, kφ)`, the factor invariant under level-`k` lifts.
    pub fn de_sitter_cover(k: u32) -> Self {
        let kf = k.max(1) as f64;
        ConformalFactor::new(format!("dS2 cover {k}"), move |t, p| {
            let s = (PI * kf * (t - p)).sin();
            4.0 * PI * PI * kf * kf / (s * s)
        })
    }

    pub fn eval(&self, theta: f64, phi: f64) -> Result<f64> {
        if cyclic_dist(theta, phi) < 1e-14 {
            return Err(Error::OnDiagonal);
        }
        Ok((self.omega)(theta, phi))
    }
}

/// `(x, y) ↦ (f1(x), f2(y))` on the torus model.
#[derive(Clone, Debug)]
pub struct IsometryPair {
    pub f1: MonotoneLift,
    pub f2: MonotoneLift,
}

impl IsometryPair {
    pub fn new(f1: MonotoneLift, f2: MonotoneLift) -> Result<Self> {
        for f in [&f1, &f2] {
            if f.strictness() != Strictness::Homeomorphism {
                return Err(Error::InvariantViolation(
                    "isometry pair needs homeomorphism lifts".into(),
                ));
            }
        }
        Ok(IsometryPair { f1, f2 })
    }

    pub fn diagonal(m: &MoebiusK) -> Self {
        IsometryPair {
            f1: m.lift(),
            f2: m.lift(),
        }
    }

    pub fn same(f: MonotoneLift) -> Result<Self> {
        IsometryPair::new(f.clone(), f)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(IsometryPair {
            f1: self.f1.inverse()?,
            f2: self.f2.inverse()?,
        })
    }
}

pub const JACOBIAN_STEP: f64 = 1e-5;

/// Relative failure of `Ω(f1 θ, f2 φ) f1'(θ) f2'(φ) = Ω(θ, φ)`.
pub fn jacobian_defect(pair: &IsometryPair, omega: &ConformalFactor, p: (f64, f64)) -> Result<f64> {
    let (theta, phi) = p;
    let base = omega.eval(theta, phi)?;
    let image = omega.eval(pair.f1.apply(theta), pair.f2.apply(phi))?;
    let jac = pair.f1.derivative(theta, JACOBIAN_STEP) * pair.f2.derivative(phi, JACOBIAN_STEP);
    Ok((image * jac - base).abs() / base)
}

/// Open gap of the limit set holding `x`, with an identity tag for "same gap" checks.
fn gap_containing(sys: &GapSystem, x: f64) -> Option<(CyclicInterval, (usize, Vec<u16>))> {
    match sys.data() {
        Some(data) => {
            let (j, w) = sys.locate(x)?;
            let base = sys.base_gaps[j].interval;
            let iv = CyclicInterval::new(data.apply_word(&w, base.a), data.apply_word(&w, base.b));
            Some((iv, (j, w.iter().map(|l| l.0).collect())))
        }
        None => {
            let i = sys.listed_gap(x)?;
            Some((sys.gaps[i].interval, (i, Vec::new())))
        }
    }
}

fn hard_clip(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        0.0
    } else {
        t
    }
}

/// `σ(p) = ω(R₁) ω(R₂) ω(R₃) ω(R₄)` over the corner rectangles of the gap box
/// holding `p`, and zero on the closed set and on diagonal gap boxes.
pub fn invariant_function(sys: &GapSystem, cutoff: Option<&dyn Fn(f64) -> f64>, p: (f64, f64)) -> Result<f64> {
    let (theta, phi) = p;
    if cyclic_dist(theta, phi) < 1e-14 {
        return Err(Error::OutsideDomain);
    }
    let cut = |t: f64| cutoff.map_or_else(|| hard_clip(t), |f| f(t));
    let near_closed = |x: f64| sys.closed_set_sample.iter().any(|&c| cyclic_dist(c, x) < 1e-14);
    if near_closed(theta) || near_closed(phi) {
        return Ok(cut(0.0));
    }
    let (Some((gi, ti)), Some((gj, tj))) = (gap_containing(sys, theta), gap_containing(sys, phi)) else {
        return Ok(cut(0.0));
    };
    if ti == tj {
        return Ok(cut(0.0));
    }
    let mut sigma = 1.0;
    for (x0, x1) in [(gi.a, theta), (theta, gi.b)] {
        for (y0, y1) in [(gj.a, phi), (phi, gj.b)] {
            sigma *= match rect_volume_theta(x0, x1, y0, y1) {
                Ok(v) => v,
                Err(Error::DegenerateQuadruple) => 0.0,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(cut(sigma))
}

/// Ω_h at level `k`: past boundary `H`, future boundary `x ↦ x + 1/k`.
pub fn omega_h_model(h: &MonotoneLift, k: u32) -> Result<SurfaceModel> {
    let k = k.max(1);
    let step = 1.0 / k as f64;
    for x in grid(DEFAULT_GRID) {
        let v = h.eval(x)?;
        if v < x - 1e-12 || v >= x + step {
            return Err(Error::NormalizationViolation { x, value: v });
        }
    }
    SurfaceModel::new(h.clone(), MonotoneLift::rotation(step), k)
}

/// The `k`-fold cover of dS₂.
pub fn de_sitter(k: u32) -> SurfaceModel {
    omega_h_model(&MonotoneLift::identity(), k).expect("identity is normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::rotation_number;
    use crate::{fixtures, schottky};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_moebius(rng: &mut ChaCha8Rng) -> MoebiusK {
        loop {
            let m: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            if m[0] * m[3] - m[1] * m[2] > 0.2 {
                return MoebiusK::new(m, 1, 0).unwrap();
            }
        }
    }

    #[test]
    fn cross_ratio_examples() {
        let f = |x: f64| Ext::Finite(x);
        assert_eq!(cross_ratio(f(0.3), f(-1.2), f(2.0), f(2.0)).unwrap(), 1.0);
        assert_relative_eq!(
            cross_ratio(f(0.0), f(1.0), f(2.0), f(3.0)).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(
            cross_ratio(f(1.0), f(2.0), f(2.0), f(5.0)),
            Err(Error::DegenerateQuadruple)
        );
        // ∞ as first point: limit of (a − c)/(a − d) is 1
        let v = cross_ratio(Ext::Infinity, f(1.0), f(2.0), f(3.0)).unwrap();
        assert_relative_eq!(v, (1.0 - 3.0) / (1.0 - 2.0), epsilon = 1e-15);
    }

    #[test]
    fn rect_volume_examples() {
        let f = |x: f64| Ext::Finite(x);
        assert_eq!(rect_volume(f(0.1), f(0.7), f(3.0), f(3.0)).unwrap(), 0.0);
        assert_relative_eq!(
            rect_volume(f(0.0), f(1.0), f(2.0), f(3.0)).unwrap(),
            4.0 * (4.0f64 / 3.0).ln(),
            epsilon = 1e-14
        );
        assert!(matches!(
            rect_volume(f(0.0), f(2.0), f(1.0), f(3.0)),
            Err(Error::NonPositiveCrossRatio(_))
        ));
    }

    #[test]
    fn theta_cross_ratio_matches_chart() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
            let chart = cross_ratio(
                Ext::from_theta(t[0]),
                Ext::from_theta(t[1]),
                Ext::from_theta(t[2]),
                Ext::from_theta(t[3]),
            );
            let circ = cross_ratio_theta(t[0], t[1], t[2], t[3]);
            if let (Ok(a), Ok(b)) = (chart, circ) {
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn conformal_factor_is_pullback() {
        // pull back 4 dx dy / (x − y)² through x = −cot(πθ) by numeric differentiation
        let chart = |t: f64| -1.0 / (PI * t).tan();
        let dchart = |t: f64| (chart(t + 1e-6) - chart(t - 1e-6)) / 2e-6;
        let omega = ConformalFactor::de_sitter();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (t, p): (f64, f64) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
            if cyclic_dist(t, p) < 0.02 {
                continue;
            }
            let (x, y) = (chart(t), chart(p));
            let pulled = 4.0 * dchart(t) * dchart(p) / ((x - y) * (x - y));
            let w = omega.eval(t, p).unwrap();
            assert!((pulled - w).abs() <= 1e-6 * w, "{t} {p}: {pulled} vs {w}");
            assert_relative_eq!(w, omega.eval(p, t).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn jacobian_examples() {
        let omega = ConformalFactor::de_sitter();
        let id = IsometryPair::same(MonotoneLift::identity()).unwrap();
        assert!(jacobian_defect(&id, &omega, (0.2, 0.6)).unwrap() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let pair = IsometryPair::diagonal(&random_moebius(&mut rng));
            for _ in 0..50 {
                let p = (rng.gen::<f64>(), rng.gen::<f64>());
                if cyclic_dist(p.0, p.1) < 0.05 {
                    continue;
                }
                assert!(jacobian_defect(&pair, &omega, p).unwrap() <= 1e-6);
            }
        }
        let bad = IsometryPair::new(MonotoneLift::rotation(0.1), MonotoneLift::identity()).unwrap();
        assert!(jacobian_defect(&bad, &omega, (0.2, 0.55)).unwrap() > 1e-2);
        assert_eq!(jacobian_defect(&id, &omega, (0.3, 1.3)), Err(Error::OnDiagonal));
    }

    proptest! {
        #[test]
        fn cross_ratio_invariant(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_moebius(&mut rng);
            let t: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
            let before = cross_ratio_theta(t[0], t[1], t[2], t[3]);
            let after = cross_ratio_theta(g.act(t[0]), g.act(t[1]), g.act(t[2]), g.act(t[3]));
            if let (Ok(a), Ok(b)) = (before, after) {
                prop_assume!(a.abs() < 1e4);
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn rect_volume_additive(a in 0.0f64..0.2, m in 0.25f64..0.3, b in 0.35f64..0.45, c in 0.5f64..0.7, d in 0.75f64..0.95) {
            let whole = rect_volume_theta(a, b, c, d).unwrap();
            let split = rect_volume_theta(a, m, c, d).unwrap() + rect_volume_theta(m, b, c, d).unwrap();
            prop_assert!((whole - split).abs() <= 1e-9);
        }
    }

    #[test]
    fn sigma_examples() {
        let sys = schottky::limit_set(&fixtures::schottky_pair(1), 6).unwrap();
        let data = sys.data().unwrap().clone();
        for &c in sys.closed_set_sample.iter().step_by(7) {
            assert_eq!(invariant_function(&sys, None, (c, 0.37)).unwrap(), 0.0);
        }
        let g = &sys.base_gaps[0].interval;
        assert_eq!(invariant_function(&sys, None, (g.at(0.3), g.at(0.6))).unwrap(), 0.0);
        let h = &sys.base_gaps[1].interval;
        assert!(invariant_function(&sys, None, (g.at(0.4), h.at(0.5))).unwrap() != 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut nonzero = 0;
        for _ in 0..1000 {
            let p = (rng.gen::<f64>(), rng.gen::<f64>());
            let s = invariant_function(&sys, None, p).unwrap();
            nonzero += (s != 0.0) as usize;
            for gen in &data.generators {
                let q = (gen.act(p.0), gen.act(p.1));
                let t = invariant_function(&sys, None, q).unwrap();
                assert!((s - t).abs() <= 1e-6, "{p:?}: {s} vs {t}");
            }
        }
        assert!(nonzero > 100);
    }

    #[test]
    fn omega_h_examples() {
        for k in 1..=4 {
            let m = de_sitter(k);
            let b = m.boundary_maps().unwrap();
            assert!(b.h_right.circle_distance(&MonotoneLift::identity(), 4096) <= 1e-10);
            let rho = rotation_number(&b.h_ra, 20_000).unwrap();
            assert!(rho.contains(1.0 / k as f64) && rho.width() <= 2e-4);
        }
        let shove = MonotoneLift::rotation(0.6);
        assert!(matches!(
            omega_h_model(&shove, 2),
            Err(Error::NormalizationViolation { .. })
        ));
        assert!(omega_h_model(&shove, 1).is_ok());
        assert!(matches!(
            omega_h_model(&MonotoneLift::rotation(-0.1), 1),
            Err(Error::NormalizationViolation { .. })
        ));
    }

    #[test]
    fn omega_h_commuting_homeo_intertwines() {
        let data = fixtures::cyclic_hyperbolic(1);
        let sys = schottky::limit_set(&data, 2).unwrap();
        let seeds: Vec<_> = (0..sys.fundamental.len())
            .map(|i| Some(schottky::default_seed(&sys, i).unwrap()))
            .collect();
        let h = schottky::commuting_homeo(&sys, &seeds).unwrap();
        let m = omega_h_model(&h, 1).unwrap();
        let pair = IsometryPair::diagonal(&data.generators[0]);
        assert!(m.intertwining_defect(&pair).unwrap() <= 1e-6);
    }

    #[test]
    fn cover_factor_is_invariant_at_level_two() {
        let omega = ConformalFactor::de_sitter_cover(2);
        let data = fixtures::schottky_pair(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in &data.generators {
            let pair = IsometryPair::diagonal(g);
            for _ in 0..50 {
                let t = rng.gen::<f64>();
                let p = (t, t + rng.gen_range(0.05..0.45));
                assert!(jacobian_defect(&pair, &omega, p).unwrap() <= 1e-6, "{p:?}");
            }
        }
    }
}
