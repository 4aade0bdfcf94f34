//! PSL(2,ℝ) and its finite covers PSL_k(2,ℝ) acting on the circle.
//!
//! The chart sends θ to the direction `[cos πθ : sin πθ]`, so the affine
//! coordinate is `x = cot πθ`: θ = 0 is `x = ∞` and θ = 1/2 is `x = 0`.
//! The base lift is evaluated through an Iwasawa split `M = Q(t)·R` with `R`
//! upper triangular: `R` preserves the upper half-plane of directions, which
//! gives a continuous lift without branch bookkeeping, and `Q(t)` is the exact
//! rotation `θ ↦ θ + t/π`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::circle::{wrap, MonotoneLift};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedKind {
    Attracting,
    Repelling,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub theta: f64,
    pub kind: FixedKind,
    pub derivative: f64,
}

/// Element of PSL_k(2,ℝ): a unit-determinant matrix and a sheet in `0..k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusK {
    m: [f64; 4],
    k: u32,
    sheet: u32,
    tau: f64,
    ra: f64,
    rb: f64,
    rd: f64,
}

fn mat_mul(x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

impl MoebiusK {
    /// Matrix `[a, b, c, d]` (row major), scaled to determinant one.
    pub fn new(matrix: [f64; 4], k: u32, sheet: u32) -> Result<Self> {
        let [a, b, c, d] = matrix;
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 || k == 0 {
            return Err(Error::DegenerateMatrix { det });
        }
        let s = det.sqrt();
        Ok(MoebiusK::unimodular([a / s, b / s, c / s, d / s], k, sheet))
    }

    /// Trusts `m` to have determinant one, as products of unimodular matrices do;
    /// recomputing `ad − bc` cancels catastrophically for large entries.
    fn unimodular(m: [f64; 4], k: u32, sheet: u32) -> Self {
        let r11 = m[0].hypot(m[2]);
        let (cs, sn) = (m[0] / r11, m[2] / r11);
        let t = m[2].atan2(m[0]);
        MoebiusK {
            m,
            k,
            sheet: sheet % k,
            tau: wrap(t / PI),
            ra: r11,
            rb: cs * m[1] + sn * m[3],
            rd: 1.0 / r11,
        }
    }

    pub fn identity(k: u32) -> Self {
        MoebiusK::new([1.0, 0.0, 0.0, 1.0], k, 0).expect("identity is invertible")
    }

    /// The deck rotation of order `k`.
    pub fn center(k: u32) -> Self {
        MoebiusK::new([1.0, 0.0, 0.0, 1.0], k, 1).expect("identity is invertible")
    }

    pub fn rotation_matrix(t: f64, k: u32, sheet: u32) -> Self {
        MoebiusK::new([t.cos(), -t.sin(), t.sin(), t.cos()], k, sheet).expect("rotation is invertible")
    }

    /// The level-`k` lift of `matrix` whose circle map has fixed points, if any.
    pub fn fixing_lift(matrix: [f64; 4], k: u32) -> Result<Self> {
        let base = MoebiusK::new(matrix, k, 0)?;
        let pts = base.base_fixed_directions().ok_or(Error::NotHyperbolicOrParabolic)?;
        let u0 = pts[0];
        let m = (base.base_lift(u0) - u0).round() as i64;
        MoebiusK::new(matrix, k, (-m).rem_euclid(k as i64) as u32)
    }

    pub fn matrix(&self) -> [f64; 4] {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sheet(&self) -> u32 {
        self.sheet
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    /// Projective base lift with `F₀(0) ∈ [0, 1)`.
    pub fn base_lift(&self, u: f64) -> f64 {
        let n = u.floor();
        let r = u - n;
        let (s, c) = (PI * r).sin_cos();
        let ang = (self.rd * s).atan2(self.ra * c + self.rb * s) / PI;
        n + ang + self.tau
    }

    /// `F(θ) = (F₀(kθ) + sheet) / k`.
    pub fn lift_value(&self, theta: f64) -> f64 {
        let k = self.k as f64;
        (self.base_lift(k * theta) + self.sheet as f64) / k
    }

    pub fn act(&self, theta: f64) -> f64 {
        wrap(self.lift_value(theta))
    }

    pub fn lift(&self) -> MonotoneLift {
        MonotoneLift::Moebius(*self)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let h = 1e-6;
        (self.lift_value(theta + h) - self.lift_value(theta - h)) / (2.0 * h)
    }

    /// Group product `self · other` and the integer by which the exact
    /// composition of lifts exceeds the normalized lift of the product.
    pub fn compose_lift(&self, other: &MoebiusK) -> (MoebiusK, f64) {
        assert_eq!(self.k, other.k, "cover levels must agree");
        let p = MoebiusK::unimodular(mat_mul(&self.m, &other.m), self.k, 0);
        let m0 = (self.base_lift(other.base_lift(0.0)) - p.base_lift(0.0)).round() as i64;
        let total = m0 + self.sheet as i64 + other.sheet as i64;
        let k = self.k as i64;
        let out = MoebiusK {
            sheet: total.rem_euclid(k) as u32,
            ..p
        };
        (out, total.div_euclid(k) as f64)
    }

    pub fn compose(&self, other: &MoebiusK) -> Result<MoebiusK> {
        if self.k != other.k {
            return Err(Error::LevelMismatch(self.k, other.k));
        }
        Ok(self.compose_lift(other).0)
    }

    pub fn inverse_lift(&self) -> (MoebiusK, f64) {
        let [a, b, c, d] = self.m;
        let g = MoebiusK::unimodular([d, -b, -c, a], self.k, 0);
        let m0 = (self.base_lift(g.base_lift(0.0))).round() as i64;
        let total = -(m0 + self.sheet as i64);
        let k = self.k as i64;
        (
            MoebiusK {
                sheet: total.rem_euclid(k) as u32,
                ..g
            },
            total.div_euclid(k) as f64,
        )
    }

    pub fn inverse(&self) -> MoebiusK {
        self.inverse_lift().0
    }

    pub fn power_lift(&self, n: u64) -> (MoebiusK, f64) {
        let mut acc = (MoebiusK::identity(self.k), 0.0);
        let mut base = (*self, 0.0);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                let (p, s) = acc.0.compose_lift(&base.0);
                acc = (p, acc.1 + base.1 + s);
            }
            let (sq, s) = base.0.compose_lift(&base.0);
            base = (sq, 2.0 * base.1 + s);
            e >>= 1;
        }
        acc
    }

    pub fn power(&self, n: i64) -> MoebiusK {
        let base = if n < 0 { self.inverse() } else { *self };
        base.power_lift(n.unsigned_abs()).0
    }

    fn is_plus_minus_identity(&self, tol: f64) -> bool {
        let [a, b, c, d] = self.m;
        let s = if a >= 0.0 { 1.0 } else { -1.0 };
        (a - s).abs() <= tol && (d - s).abs() <= tol && b.abs() <= tol && c.abs() <= tol
    }

    pub fn classify(&self) -> ElementClass {
        let tr = self.trace().abs();
        if tr > 2.0 + 1e-10 {
            ElementClass::Hyperbolic
        } else if (tr - 2.0).abs() <= 1e-10 {
            if self.is_plus_minus_identity(1e-10) {
                if self.sheet == 0 {
                    ElementClass::Identity
                } else {
                    ElementClass::Elliptic
                }
            } else {
                ElementClass::Parabolic
            }
        } else {
            ElementClass::Elliptic
        }
    }

    /// Fixed directions of the base action (one for parabolic, two for
    /// hyperbolic), as base angles in `[0, 1)`.
    fn base_fixed_directions(&self) -> Option<Vec<f64>> {
        let sign = if self.trace() >= 0.0 { 1.0 } else { -1.0 };
        let [a, b, c, d] = self.m.map(|v| v * sign);
        let tr = a + d;
        let eig = |lam: f64| {
            let v1 = (b, lam - a);
            let v2 = (lam - d, c);
            let v = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
            wrap(v.1.atan2(v.0) / PI)
        };
        match self.classify() {
            ElementClass::Hyperbolic => {
                let disc = (tr * tr - 4.0).sqrt();
                Some(vec![eig(0.5 * (tr + disc)), eig(0.5 * (tr - disc))])
            }
            ElementClass::Parabolic => Some(vec![eig(1.0)]),
            _ => None,
        }
    }

    /// The `k·(2 or 1)` points over the base fixed directions, sorted, labelled by the lift's derivative.
    pub fn fixed_points(&self) -> Result<Vec<FixedPoint>> {
        let base = self.base_fixed_directions().ok_or(Error::NotHyperbolicOrParabolic)?;
        let k = self.k as f64;
        let mut out: Vec<FixedPoint> = base
            .iter()
            .flat_map(|&u| (0..self.k).map(move |j| (u + j as f64) / k))
            .map(|theta| {
                let derivative = self.derivative(theta);
                let kind = if (derivative - 1.0).abs() <= 1e-7 {
                    FixedKind::Neutral
                } else if derivative < 1.0 {
                    FixedKind::Attracting
                } else {
                    FixedKind::Repelling
                };
                FixedPoint {
                    theta,
                    kind,
                    derivative,
                }
            })
            .collect();
        out.sort_by(|p, q| p.theta.total_cmp(&q.theta));
        Ok(out)
    }

    /// Same element of PSL_k within `tol`: matrix up to sign, and the same
    /// circle map, since a rounded `τ` can move the sheet label.
    pub fn approx_eq(&self, other: &MoebiusK, tol: f64) -> bool {
        if self.k != other.k {
            return false;
        }
        let d = |s: f64| {
            self.m
                .iter()
                .zip(&other.m)
                .map(|(x, y)| (x - s * y).abs())
                .fold(0.0, f64::max)
        };
        let same_sheet = [0.0, 0.3, 0.7]
            .iter()
            .all(|&t| crate::circle::cyclic_dist(self.act(t), other.act(t)) <= 0.25 / self.k as f64);
        same_sheet && d(1.0).min(d(-1.0)) <= tol
    }

    /// The square root at the same level whose square is `self`, when one exists.
    pub fn sqrt(&self) -> Option<MoebiusK> {
        let sign = if self.trace() >= 0.0 { 1.0 } else { -1.0 };
        let [a, b, c, d] = self.m.map(|v| v * sign);
        let s = (a + d + 2.0).sqrt();
        let root = [(a + 1.0) / s, b / s, c / s, (d + 1.0) / s];
        (0..self.k)
            .filter_map(|sheet| MoebiusK::new(root, self.k, sheet).ok())
            .find(|r| r.compose_lift(r).0.approx_eq(self, 1e-10))
    }
}

/// One-parameter hyperbolic subgroup `t ↦ γ_t` fixing two level-`k` points.
#[derive(Clone, Copy, Debug)]
pub struct OneParam {
    c: [f64; 4],
    c_inv: [f64; 4],
    s: f64,
    k: u32,
    x0: f64,
}

impl OneParam {
    pub fn at(&self, t: f64) -> MoebiusK {
        let e = (0.5 * t * self.s).exp();
        let diag = [e, 0.0, 0.0, 1.0 / e];
        let m = mat_mul(&mat_mul(&self.c, &diag), &self.c_inv);
        let base = MoebiusK::new(m, self.k, 0).expect("conjugate of diagonal");
        let u0 = wrap(self.k as f64 * self.x0);
        let shift = (base.base_lift(u0) - u0).round() as i64;
        MoebiusK {
            sheet: (-shift).rem_euclid(self.k as i64) as u32,
            ..base
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// `γ_t` with fixed points over `x0`, `y0` and `γ₁'(x0) = lambda`.
pub fn one_param(x0: f64, y0: f64, lambda: f64, k: u32) -> Result<OneParam> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda == 1.0 {
        return Err(Error::InvalidMultiplier(lambda));
    }
    let kf = k.max(1) as f64;
    let (u0, v0) = (wrap(kf * x0), wrap(kf * y0));
    if crate::circle::cyclic_dist(u0, v0) < 1e-12 {
        return Err(Error::DegenerateAxis);
    }
    let (su, cu) = (PI * u0).sin_cos();
    let (sv, cv) = (PI * v0).sin_cos();
    let c = [cu, cv, su, sv];
    let det = cu * sv - cv * su;
    if det.abs() < 1e-14 {
        return Err(Error::DegenerateAxis);
    }
    let c_inv = [sv / det, -cv / det, -su / det, cu / det];
    Ok(OneParam {
        c,
        c_inv,
        s: -lambda.ln(),
        k: k.max(1),
        x0,
    })
}

/// Parabolic element at level `k` fixing the points over `x0`, moving other
/// points forward when `forward` is set.
pub fn parabolic_at(x0: f64, strength: f64, forward: bool, k: u32) -> MoebiusK {
    let u0 = wrap(k as f64 * x0);
    // [[1, s], [0, 1]] fixes θ = 0 and moves θ backward for s > 0.
    let s = if forward { -strength.abs() } else { strength.abs() };
    let r = MoebiusK::rotation_matrix(PI * u0, 1, 0).matrix();
    let ri = MoebiusK::rotation_matrix(-PI * u0, 1, 0).matrix();
    let m = mat_mul(&mat_mul(&r, &[1.0, s, 0.0, 1.0]), &ri);
    MoebiusK::fixing_lift(m, k).expect("parabolic has a fixed direction")
}
