//! Explicit conjugacies when `L_G` has `2k` or `k` points.
//!
//! `L_G` cuts the circle into arcs `J_j`, each preserved by the stabilizer `H`
//! of `x₀`. On one arc per orbit of the extra generator `f`, φ is built from a
//! fundamental domain of `H` (or from the flow time when `H ≅ ℝ`) and carried
//! to the other arcs by `φ = γ^m ∘ φ ∘ f^{−m}`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    arc_direction, CaseTag, CertificateKind, ConjugacyReport, ElementaryCase, Flow, GeneratorDefect, GroupSpec,
    TargetElement, CONJUGACY_TOL, POINT_TOL,
};
use crate::circle::{cyclic_dist, offset, wrap, MonotoneLift, Strictness};
use crate::error::{Error, Result};
use crate::moebius::{one_param, parabolic_at, MoebiusK, OneParam};

/// Orbit search bound `|n_x|`.
pub const ORBIT_BOUND: u32 = 1000;

#[derive(Clone, Copy)]
enum Family {
    Hyperbolic(OneParam),
    Parabolic { x0: f64, forward: bool, k: u32 },
}

impl Family {
    fn at(&self, t: f64) -> MoebiusK {
        match *self {
            Family::Hyperbolic(p) => p.at(t),
            Family::Parabolic { k, .. } if t == 0.0 => MoebiusK::identity(k),
            Family::Parabolic { x0, forward, k } => parabolic_at(x0, t.abs(), forward == (t > 0.0), k),
        }
    }
}

enum Stab {
    Trivial,
    Power { f1: MonotoneLift, f1_inv: MonotoneLift },
    Flow(Flow),
}

struct Engine {
    src: Vec<f64>,
    dst: Vec<f64>,
    family: Family,
    stab: Stab,
    /// `(representative arc, m)` with `J_j = f^m(J_rep)`.
    rep_of: Vec<(usize, usize)>,
    f_inv_pows: Vec<MonotoneLift>,
    gamma_pows: Vec<MoebiusK>,
}

fn arc_len(pts: &[f64], j: usize) -> f64 {
    if pts.len() == 1 {
        1.0
    } else {
        offset(pts[j], pts[(j + 1) % pts.len()])
    }
}

impl Engine {
    fn n(&self) -> usize {
        self.src.len()
    }

    fn locate(&self, x: f64) -> usize {
        let t = offset(self.src[0], x);
        let mut j = 0;
        while j + 1 < self.n() && offset(self.src[0], self.src[j + 1]) <= t {
            j += 1;
        }
        j
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let x = wrap(x);
        let j = self.locate(x);
        if cyclic_dist(x, self.src[j]) == 0.0 {
            return Ok(wrap(self.dst[j]));
        }
        let (r, m) = self.rep_of[j];
        let y = self.f_inv_pows[m].act(x);
        let v = self.eval_rep(r, y)?;
        Ok(self.gamma_pows[m].act(v))
    }

    /// Lift normalized so `φ(src₀) = dst₀`; escapes fall back to the bounded search.
    fn lift_value(&self, x: f64) -> f64 {
        let v = self.eval(x).unwrap_or_else(|_| self.eval_clamped(x));
        let base = self.dst[0] + offset(self.dst[0], v);
        if x < self.src[0] {
            base - 1.0
        } else {
            base
        }
    }

    fn eval_clamped(&self, x: f64) -> f64 {
        let j = self.locate(wrap(x));
        wrap(self.dst[j])
    }

    fn eval_rep(&self, r: usize, y: f64) -> Result<f64> {
        let (a, len) = (self.src[r], arc_len(&self.src, r));
        let (ta, tlen) = (self.dst[r], arc_len(&self.dst, r));
        let tz = 0.5 * len;
        let z = a + tz;
        let z_t = ta + 0.5 * tlen;
        let mut t = offset(a, y);
        match &self.stab {
            Stab::Trivial => Ok(wrap(ta + tlen * t / len)),
            Stab::Power { f1, f1_inv } => {
                let tfz = offset(a, f1.act(z));
                let forward = tfz > tz;
                let mut y = y;
                let mut n: i64 = 0;
                let mut step = |g: &MonotoneLift, y: &mut f64, t: &mut f64, dn: i64| -> Result<()> {
                    *y = g.act(*y);
                    *t = offset(a, *y);
                    n += dn;
                    if n.unsigned_abs() > ORBIT_BOUND as u64 {
                        return Err(Error::OrbitEscape {
                            x: *y,
                            bound: ORBIT_BOUND,
                        });
                    }
                    Ok(())
                };
                if forward {
                    while t < tz {
                        step(f1, &mut y, &mut t, 1)?;
                    }
                    while t >= tfz {
                        step(f1_inv, &mut y, &mut t, -1)?;
                    }
                } else {
                    while t > tz {
                        step(f1, &mut y, &mut t, 1)?;
                    }
                    while t <= tfz {
                        step(f1_inv, &mut y, &mut t, -1)?;
                    }
                }
                let u = (t - tz) / (tfz - tz);
                let g1 = self.family.at(1.0);
                let tgz = offset(ta, g1.act(z_t));
                let v = ta + 0.5 * tlen + u * (tgz - 0.5 * tlen);
                Ok(self.family.at(-(n as f64)).act(v))
            }
            Stab::Flow(flow) => {
                let pos = |s: f64| offset(a, wrap(flow.apply(s, z)));
                let sign = if pos(1.0) > tz { 1.0 } else { -1.0 };
                let g = |s: f64| sign * (pos(s) - t);
                let mut hi = 1.0;
                while g(hi) < 0.0 || g(-hi) > 0.0 {
                    hi *= 2.0;
                    if hi > ORBIT_BOUND as f64 {
                        return Err(Error::OrbitEscape {
                            x: y,
                            bound: ORBIT_BOUND,
                        });
                    }
                }
                let (mut lo, mut up) = (-hi, hi);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + up);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        up = mid;
                    }
                }
                t = 0.5 * (lo + up);
                Ok(self.family.at(t).act(z_t))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Hyperbolic,
    Parabolic,
}

/// Shift `s` with `g(p_j) = p_{j+s}` for all `j`.
fn shift_of(g: &MonotoneLift, pts: &[f64], name: &str) -> Result<usize> {
    let n = pts.len();
    let q = g.act(pts[0]);
    let s = (0..n)
        .find(|&j| cyclic_dist(pts[j], q) <= POINT_TOL)
        .ok_or_else(|| Error::InvariantViolation(format!("{name} does not preserve the invariant set")))?;
    for (i, &p) in pts.iter().enumerate() {
        if cyclic_dist(g.act(p), pts[(i + s) % n]) > POINT_TOL {
            return Err(Error::InvariantViolation(format!(
                "{name} does not permute the invariant set cyclically"
            )));
        }
    }
    Ok(s)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sup_dist(f: &MonotoneLift, g: &MonotoneLift) -> f64 {
    (0..257)
        .map(|i| i as f64 / 257.0)
        .map(|x| cyclic_dist(f.apply(x), g.apply(x)))
        .fold(0.0, f64::max)
}

/// Signed displacement of `g` at the midpoint of `J_0`.
fn displacement(g: &MonotoneLift, pts: &[f64]) -> f64 {
    let tz = 0.5 * arc_len(pts, 0);
    offset(pts[0], g.act(pts[0] + tz)) - tz
}

/// Exponent `e` with `g = f₁^e` (or `f_e` for a flow).
fn exponent(stab: &Stab, g: &MonotoneLift, pts: &[f64], name: &str) -> Result<f64> {
    let not_in = || Error::StabilizerNotCyclicOrFlow(format!("{name} is not in the stabilizer group"));
    let a = pts[0];
    let z = a + 0.5 * arc_len(pts, 0);
    let target = offset(a, g.act(z));
    match stab {
        Stab::Trivial => {
            if sup_dist(g, &MonotoneLift::identity()) > POINT_TOL {
                return Err(not_in());
            }
            Ok(0.0)
        }
        Stab::Power { f1, f1_inv } => {
            let mut best = (0i64, (offset(a, z) - target).abs());
            for (dir, map) in [(1i64, f1), (-1, f1_inv)] {
                let mut y = z;
                for n in 1..=ORBIT_BOUND as i64 {
                    y = map.act(y);
                    let d = (offset(a, y) - target).abs();
                    if d < best.1 {
                        best = (dir * n, d);
                    } else if d > best.1 + 0.5 {
                        break;
                    }
                }
            }
            if sup_dist(g, &f1.power(best.0)?) > POINT_TOL {
                return Err(not_in());
            }
            Ok(best.0 as f64)
        }
        Stab::Flow(flow) => {
            let pos = |s: f64| offset(a, wrap(flow.apply(s, z)));
            let sign = if pos(1.0) > offset(a, z) { 1.0 } else { -1.0 };
            let h = |s: f64| sign * (pos(s) - target);
            let mut hi = 1.0;
            while h(hi) < 0.0 || h(-hi) > 0.0 {
                hi *= 2.0;
                if hi > ORBIT_BOUND as f64 {
                    return Err(not_in());
                }
            }
            let (mut lo, mut up) = (-hi, hi);
            for _ in 0..100 {
                let mid = 0.5 * (lo + up);
                if h(mid) < 0.0 {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            let t = 0.5 * (lo + up);
            if sup_dist(g, &flow.at(t)) > POINT_TOL {
                return Err(not_in());
            }
            Ok(t)
        }
    }
}

/// Level-`k` lift of `m` sending `x` closest to `target`.
fn lift_towards(m: [f64; 4], k: u32, x: f64, target: f64) -> Result<MoebiusK> {
    let mut best: Option<(f64, MoebiusK)> = None;
    for sheet in 0..k {
        let g = MoebiusK::new(m, k, sheet)?;
        let d = cyclic_dist(g.act(x), target);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, g));
        }
    }
    Ok(best.expect("k >= 1").1)
}

/// Involution of PSL(2,ℝ) exchanging the base directions over `x̃₀` and `ỹ₀`.
fn axis_swap(x0: f64, y0: f64, k: u32) -> [f64; 4] {
    let kf = k as f64;
    let (su, cu) = (PI * kf * x0).sin_cos();
    let (sv, cv) = (PI * kf * y0).sin_cos();
    let det = cu * sv - cv * su;
    // C J C⁻¹ with C = [u | v] and J the quarter turn.
    let c = [cu, cv, su, sv];
    let ci = [sv / det, -cv / det, -su / det, cu / det];
    let cj = [c[1], -c[0], c[3], -c[2]];
    [
        cj[0] * ci[0] + cj[1] * ci[2],
        cj[0] * ci[1] + cj[1] * ci[3],
        cj[2] * ci[0] + cj[3] * ci[2],
        cj[2] * ci[1] + cj[3] * ci[3],
    ]
}

struct Built {
    engine: Arc<Engine>,
    targets: Vec<(String, MoebiusK)>,
    notes: Vec<String>,
}

fn build(g: &GroupSpec, case: &ElementaryCase, kind: Kind, x_t: f64, y_t: f64) -> Result<Built> {
    let k = case.k;
    let kf = k as f64;
    let pts = case.points.clone();
    let n = pts.len();
    let dst: Vec<f64> = match kind {
        Kind::Hyperbolic => (0..n)
            .map(|j| if j % 2 == 0 { x_t } else { y_t } + (j / 2) as f64 / kf)
            .collect(),
        Kind::Parabolic => (0..n).map(|j| x_t + j as f64 / kf).collect(),
    };
    let mut notes = Vec::new();

    let gens: Vec<(String, MonotoneLift)> = g.generators.iter().map(|x| (x.name.clone(), x.rho1.clone())).collect();
    let mut shifts = Vec::with_capacity(gens.len());
    for (name, f) in &gens {
        shifts.push(shift_of(f, &pts, name)?);
    }

    // The extra generator: the one whose shift generates all the others.
    let total = shifts.iter().fold(n, |acc, &s| gcd(acc, s));
    let extra = if total == n {
        None
    } else {
        let i = (0..gens.len())
            .find(|&i| gcd(shifts[i], n) == total)
            .ok_or_else(|| Error::StabilizerNotCyclicOrFlow("arc shifts are not generated by one generator".into()))?;
        Some(i)
    };
    let (s, c) = match extra {
        Some(i) => (shifts[i], n / gcd(shifts[i], n)),
        None => (0, 1),
    };

    // Stabilizer candidates: generators fixing x₀, plus f^c.
    let mut h_cands: Vec<(String, MonotoneLift)> = gens
        .iter()
        .zip(&shifts)
        .filter(|(_, s)| **s == 0)
        .map(|(g, _)| g.clone())
        .collect();
    let f_pow_c = match extra {
        Some(i) => Some(gens[i].1.power(c as i64)?),
        None => None,
    };
    if let Some(fc) = &f_pow_c {
        h_cands.push((format!("{}^{c}", gens[extra.unwrap()].0), fc.clone()));
    }
    for (name, h) in &h_cands {
        if sup_dist(h, &MonotoneLift::identity()) <= POINT_TOL {
            continue;
        }
        if (0..n).any(|j| arc_direction(h, pts[j], arc_len(&pts, j)).is_none()) {
            return Err(match kind {
                Kind::Parabolic => Error::MixedStabilizer,
                Kind::Hyperbolic => {
                    Error::StabilizerNotCyclicOrFlow(format!("{name} has fixed points inside an arc of L_G"))
                }
            });
        }
    }

    let stab = if let Some(flow) = &g.flow {
        Stab::Flow(flow.clone())
    } else {
        let f1 = h_cands
            .iter()
            .map(|(_, h)| h)
            .filter(|h| sup_dist(h, &MonotoneLift::identity()) > POINT_TOL)
            .min_by(|a, b| displacement(a, &pts).abs().total_cmp(&displacement(b, &pts).abs()));
        match f1 {
            Some(f1) => Stab::Power {
                f1: f1.clone(),
                f1_inv: f1.inverse()?,
            },
            None => Stab::Trivial,
        }
    };
    let generator_of_h = match &stab {
        Stab::Trivial => None,
        Stab::Power { f1, .. } => Some(f1.clone()),
        Stab::Flow(flow) => Some(flow.at(1.0)),
    };

    let family = match kind {
        Kind::Hyperbolic => {
            let lambda = match &generator_of_h {
                Some(f1) => f1.derivative(pts[0], 1e-6),
                None => 2.0,
            };
            Family::Hyperbolic(one_param(x_t, y_t, lambda, k)?)
        }
        Kind::Parabolic => {
            let forward = generator_of_h.as_ref().is_none_or(|f1| displacement(f1, &pts) > 0.0);
            Family::Parabolic { x0: x_t, forward, k }
        }
    };

    // γ for the extra generator, with γ^c matching f^c.
    let gamma = match extra {
        None => MoebiusK::identity(k),
        Some(i) => {
            let e_c = exponent(&stab, f_pow_c.as_ref().unwrap(), &pts, &gens[i].0)?;
            match kind {
                Kind::Hyperbolic if s % 2 == 1 => {
                    if e_c.abs() > 1e-9 {
                        return Err(Error::StabilizerNotCyclicOrFlow(
                            "an axis swap must have finite order modulo the deck group".into(),
                        ));
                    }
                    notes.push(format!("{} exchanges the two points of each fiber", gens[i].0));
                    lift_towards(axis_swap(x_t, y_t, k), k, x_t, wrap(dst[s]))?
                }
                Kind::Hyperbolic => {
                    MoebiusK::new([1.0, 0.0, 0.0, 1.0], k, (s / 2) as u32)?.compose(&family.at(e_c / c as f64))?
                }
                Kind::Parabolic => {
                    MoebiusK::new([1.0, 0.0, 0.0, 1.0], k, s as u32)?.compose(&family.at(e_c / c as f64))?
                }
            }
        }
    };

    let d = gcd(s, n);
    let mut rep_of = vec![(0, 0); n];
    for r in 0..d {
        let mut j = r;
        for m in 0..c {
            rep_of[j] = (r, m);
            j = (j + s) % n;
        }
    }
    let (f_inv_pows, gamma_pows) = match extra {
        Some(i) => {
            let f_inv = gens[i].1.inverse()?;
            let mut fp = vec![MonotoneLift::identity()];
            let mut gp = vec![MoebiusK::identity(k)];
            for m in 1..c {
                fp.push(f_inv.compose(&fp[m - 1])?);
                gp.push(gamma.compose(&gp[m - 1])?);
            }
            (fp, gp)
        }
        None => (vec![MonotoneLift::identity()], vec![MoebiusK::identity(k)]),
    };

    // Every stabilizer arc must move in the direction of the target family.
    if let Some(f1) = &generator_of_h {
        let g1 = family.at(1.0).lift();
        for r in 0..d {
            let src_dir = arc_direction(f1, pts[r], arc_len(&pts, r));
            let dst_dir = arc_direction(&g1, dst[r], arc_len(&dst, r));
            if src_dir != dst_dir {
                return Err(Error::StabilizerNotCyclicOrFlow(format!(
                    "stabilizer and target disagree on arc {r}"
                )));
            }
        }
    }

    let mut targets = Vec::with_capacity(gens.len());
    for ((name, f), &sg) in gens.iter().zip(&shifts) {
        let m = (0..c)
            .find(|&m| (m * s) % n == sg)
            .ok_or_else(|| Error::StabilizerNotCyclicOrFlow(format!("{name} shifts the arcs outside ⟨f⟩")))?;
        let u = f_inv_pows[m].compose(f)?;
        let e = exponent(&stab, &u, &pts, name)?;
        targets.push((name.clone(), gamma_pows[m].compose(&family.at(e))?));
    }

    let engine = Engine {
        src: pts,
        dst,
        family,
        stab,
        rep_of,
        f_inv_pows,
        gamma_pows,
    };
    Ok(Built {
        engine: Arc::new(engine),
        targets,
        notes,
    })
}

fn report(g: &GroupSpec, case: &ElementaryCase, built: Built, grid: usize) -> ConjugacyReport {
    let Built { engine, targets, notes } = built;
    let mut rep = ConjugacyReport::new(case.k, CertificateKind::Conjugacy, grid);
    let n = grid.max(1);
    let mut skipped = 0;
    let mut worst = vec![0.0f64; targets.len()];
    for i in 0..n {
        let x = i as f64 / n as f64;
        let Ok(px) = engine.eval(x) else {
            skipped += 1;
            continue;
        };
        for (j, (gen, (_, gam))) in g.generators.iter().zip(&targets).enumerate() {
            match engine.eval(gen.rho1.act(x)) {
                Ok(pgx) => worst[j] = worst[j].max(cyclic_dist(pgx, gam.act(px))),
                Err(_) => skipped += 1,
            }
        }
    }
    rep.defects = targets
        .iter()
        .zip(worst)
        .map(|((name, _), defect)| GeneratorDefect {
            name: name.clone(),
            defect,
            tolerance: CONJUGACY_TOL,
        })
        .collect();
    rep.targets = targets
        .iter()
        .map(|(name, m)| TargetElement::new(name.clone(), m))
        .collect();
    rep.skipped_points = skipped;
    rep.notes = notes;
    if !rep.within_tolerance() {
        rep.certificate_kind = CertificateKind::SemiConjugacy;
        rep.notes.push("defects exceed the conjugacy tolerance".into());
    }
    let e = engine.clone();
    rep.phi = Some(MonotoneLift::from_fn(
        "elementary conjugacy",
        Strictness::Homeomorphism,
        move |x| e.lift_value(x),
    ));
    rep.case = Some(case.clone());
    rep
}

/// `L_G = {x₀, y₀, h(x₀), h(y₀), …}` sent to `{x̃₀ + i/k, ỹ₀ + i/k}`.
pub fn hyperbolic_case_conjugacy(
    g: &GroupSpec,
    case: &ElementaryCase,
    targets: (f64, f64),
    grid: usize,
) -> Result<ConjugacyReport> {
    if case.tag != CaseTag::TwoPerFiber {
        return Err(Error::InvariantViolation(
            "hyperbolic case needs exactly 2k invariant points".into(),
        ));
    }
    let (x_t, y_t) = targets;
    if cyclic_dist(x_t, y_t) < 1e-12 {
        return Err(Error::DegenerateAxis);
    }
    if offset(x_t, y_t) >= 1.0 / case.k as f64 {
        return Err(Error::InvariantViolation(
            "targets must satisfy x̃₀ < ỹ₀ < x̃₀ + 1/k".into(),
        ));
    }
    let built = build(g, case, Kind::Hyperbolic, x_t, y_t)?;
    Ok(report(g, case, built, grid))
}

/// `L_G = {x₀, h(x₀), …}` sent to `{x₀ + i/k}`.
pub fn parabolic_case_conjugacy(g: &GroupSpec, case: &ElementaryCase, grid: usize) -> Result<ConjugacyReport> {
    if case.tag != CaseTag::OnePerFiber {
        return Err(Error::InvariantViolation(
            "parabolic case needs exactly k invariant points".into(),
        ));
    }
    if g.generators.is_empty() && g.flow.is_none() {
        let mut rep = ConjugacyReport::new(case.k, CertificateKind::Conjugacy, grid);
        rep.phi = Some(MonotoneLift::identity());
        rep.case = Some(case.clone());
        return Ok(rep);
    }
    let x_t = case.points[0];
    let built = build(g, case, Kind::Parabolic, x_t, x_t)?;
    Ok(report(g, case, built, grid))
}
