//! Affine parameter along the null line `{y = y₀}`.
//!
//! For the metric `Ω dx dy` the geodesic equation on `{y = y₀}` reduces to
//! `ẋ · Ω(x, y₀) = const`, so `s(x) = ∫ Ω(u, y₀) du` is an affine parameter and
//! the stabilizer of `y₀` acts on it by affine maps.

use serde::Serialize;

use crate::circle::{offset, CyclicInterval, MonotoneLift};
use crate::desitter::ConformalFactor;
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-10;
const KNOTS: usize = 256;
const MAX_DEPTH: u32 = 48;

/// `s(x) = ∫_a^x Ω(u, y₀) du` on `x ∈ [a, a + len]`, `a` the start of the range.
#[derive(Clone, Debug)]
pub struct AffineChart {
    omega: ConformalFactor,
    y0: f64,
    range: CyclicInterval,
    start: f64,
    len: f64,
    cumulative: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineFit {
    pub a: f64,
    pub b: f64,
    pub defect: f64,
    pub samples: usize,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::NonIntegrable);
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NonIntegrable);
    }
    Ok(adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(Error::NonIntegrable);
    }
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

impl AffineChart {
    fn integrand(&self, u: f64) -> f64 {
        self.omega.eval(u, self.y0).unwrap_or(f64::INFINITY)
    }

    pub fn range(&self) -> CyclicInterval {
        self.range
    }

    /// Offset of `x` from the start of the range, when `x` lies on the line.
    fn position(&self, x: f64) -> Result<f64> {
        let t = offset(self.start, x);
        let pole = offset(self.start, self.y0);
        if t == pole {
            return Err(Error::OnDiagonal);
        }
        Ok(t)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = self.position(x)?;
        let f = |u: f64| self.integrand(u);
        if t <= self.len {
            let h = self.len / KNOTS as f64;
            let j = ((t / h).floor() as usize).min(KNOTS - 1);
            let a = self.start + j as f64 * h;
            return Ok(self.cumulative[j] + integrate(&f, a, self.start + t, QUAD_TOL / KNOTS as f64)?);
        }
        let pole = offset(self.start, self.y0);
        if pole < t {
            return Err(Error::OutsideDomain);
        }
        Ok(self.cumulative[KNOTS] + integrate(&f, self.start + self.len, self.start + t, QUAD_TOL)?)
    }

    /// Fits `s ∘ f₁ = A·s + B` from two points and measures the residual.
    pub fn affine_fit(&self, f1: &MonotoneLift, samples: usize) -> Result<AffineFit> {
        let inside = |x: f64| {
            let t = offset(self.start, x);
            t > 0.0 && t < self.len
        };
        let xs: Vec<f64> = (1..=samples.max(2))
            .map(|i| self.start + self.len * i as f64 / (samples.max(2) + 1) as f64)
            .filter(|&x| inside(f1.act(x)))
            .collect();
        if xs.len() < 2 {
            return Err(Error::OutsideDomain);
        }
        let (p, q) = (xs[0], xs[xs.len() - 1]);
        let (sp, sq) = (self.eval(p)?, self.eval(q)?);
        let (fp, fq) = (self.eval(f1.act(p))?, self.eval(f1.act(q))?);
        let a = (fq - fp) / (sq - sp);
        let b = fp - a * sp;
        let mut defect: f64 = 0.0;
        for &x in &xs {
            defect = defect.max((self.eval(f1.act(x))? - (a * self.eval(x)? + b)).abs());
        }
        Ok(AffineFit {
            a,
            b,
            defect,
            samples: xs.len(),
        })
    }
}

/// Tabulates `s(x) = ∫ Ω(u, y₀) du` over `x_range`, which must avoid `y₀`.
pub fn null_affine_chart(omega: &ConformalFactor, y0: f64, x_range: CyclicInterval) -> Result<AffineChart> {
    let start = x_range.a;
    let len = x_range.length();
    let pole = offset(start, y0);
    if pole <= len || pole == 0.0 {
        return Err(Error::NonIntegrable);
    }
    let mut chart = AffineChart {
        omega: omega.clone(),
        y0,
        range: x_range,
        start,
        len,
        cumulative: vec![0.0],
    };
    let h = len / KNOTS as f64;
    let f = |u: f64| chart.integrand(u);
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(KNOTS + 1);
    cumulative.push(0.0);
    for j in 0..KNOTS {
        let a = start + j as f64 * h;
        acc += integrate(&f, a, a + h, QUAD_TOL / KNOTS as f64)?;
        cumulative.push(acc);
    }
    chart.cumulative = cumulative;
    Ok(chart)
}
