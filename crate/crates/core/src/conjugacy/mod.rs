//! Elementary-case classification, the explicit conjugacies of the hyperbolic
//! and parabolic cases, the stabilizer affine chart and the full pipeline.

mod chart;
mod explicit;
mod pipeline;

pub use chart::{null_affine_chart, AffineChart, AffineFit};
pub use explicit::{hyperbolic_case_conjugacy, parabolic_case_conjugacy};
pub use pipeline::classify_pipeline;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::circle::{cyclic_dist, grid, offset, periodic_points, rotation_number, MonotoneLift, Strictness};
use crate::convergence::ConvergenceVerdict;
use crate::error::{Error, Result};
use crate::moebius::{parabolic_at, MoebiusK, OneParam};
use crate::schottky::PingPongData;
use crate::surface::NonproperReport;

/// Points closer than this are treated as one point of `L_G`.
pub const POINT_TOL: f64 = 1e-6;
/// Defect under which a constructed φ is reported as a conjugacy.
pub const CONJUGACY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub rho1: MonotoneLift,
    pub rho2: MonotoneLift,
}

impl Generator {
    pub fn diagonal(name: impl Into<String>, f: MonotoneLift) -> Self {
        Generator {
            name: name.into(),
            rho1: f.clone(),
            rho2: f,
        }
    }
}

/// A one-parameter group `t ↦ f_t` given by its lift values `(t, x) ↦ f_t(x)`.
#[derive(Clone)]
pub struct Flow {
    name: String,
    map: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flow({})", self.name)
    }
}

impl Flow {
    pub fn new(name: impl Into<String>, map: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Flow {
            name: name.into(),
            map: Arc::new(map),
        }
    }

    pub fn hyperbolic(family: OneParam) -> Self {
        Flow::new("one-parameter hyperbolic", move |t, x| family.at(t).lift_value(x))
    }

    pub fn parabolic(x0: f64, forward: bool, k: u32) -> Self {
        Flow::new("one-parameter parabolic", move |t, x| {
            if t == 0.0 {
                x
            } else {
                parabolic_at(x0, t.abs(), forward == (t > 0.0), k).lift_value(x)
            }
        })
    }

    pub fn apply(&self, t: f64, x: f64) -> f64 {
        (self.map)(t, x)
    }

    pub fn at(&self, t: f64) -> MonotoneLift {
        let map = self.map.clone();
        MonotoneLift::from_fn(format!("{}@{t}", self.name), Strictness::Homeomorphism, move |x| {
            map(t, x)
        })
    }
}

/// A group acting on the torus model by pairs `(ρ₁(g), ρ₂(g))`.
#[derive(Clone, Debug, Default)]
pub struct GroupSpec {
    pub level_k: u32,
    pub generators: Vec<Generator>,
    pub pingpong: Option<PingPongData>,
    /// Continuous stabilizer, when the stabilizer of the invariant points is a flow.
    pub flow: Option<Flow>,
    /// Finite invariant set to start the saturation from.
    pub candidates: Option<Vec<f64>>,
}

impl GroupSpec {
    pub fn diagonal(level_k: u32, gens: impl IntoIterator<Item = (String, MonotoneLift)>) -> Self {
        GroupSpec {
            level_k,
            generators: gens.into_iter().map(|(n, f)| Generator::diagonal(n, f)).collect(),
            ..GroupSpec::default()
        }
    }

    pub fn from_moebius(level_k: u32, gens: &[MoebiusK]) -> Self {
        GroupSpec::diagonal(
            level_k,
            gens.iter().enumerate().map(|(i, m)| (format!("g{i}"), m.lift())),
        )
    }

    /// The circle action `ρ₁`.
    pub fn circle_maps(&self) -> Vec<MonotoneLift> {
        self.generators.iter().map(|g| g.rho1.clone()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementKind {
    Hyperbolic,
    Parabolic,
    Elliptic,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    ManyPoints,
    TwoPerFiber,
    OnePerFiber,
}

/// A finite invariant set `L_G`, sorted in `[0, 1)`, cyclically permuted by `h→↑`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementaryCase {
    pub tag: CaseTag,
    pub points: Vec<f64>,
    pub k: u32,
}

impl ElementaryCase {
    pub fn new(tag: CaseTag, mut points: Vec<f64>, k: u32) -> Self {
        points.sort_by(f64::total_cmp);
        ElementaryCase {
            tag,
            points,
            k: k.max(1),
        }
    }

    pub fn per_fiber(&self) -> usize {
        self.points.len() / self.k as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    Conjugacy,
    SemiConjugacy,
    ConvergenceCertificate,
    CompactGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorDefect {
    pub name: String,
    pub defect: f64,
    pub tolerance: f64,
}

/// A level-`k` Möbius element in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetElement {
    pub name: String,
    pub matrix: [f64; 4],
    pub k: u32,
    pub sheet: u32,
}

impl TargetElement {
    pub fn new(name: impl Into<String>, m: &MoebiusK) -> Self {
        TargetElement {
            name: name.into(),
            matrix: m.matrix(),
            k: m.k(),
            sheet: m.sheet(),
        }
    }

    pub fn moebius(&self) -> Result<MoebiusK> {
        MoebiusK::new(self.matrix, self.k, self.sheet)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactCertificate {
    pub modulus: f64,
    pub bound: f64,
    pub words: usize,
    pub grid: usize,
    /// `x₁ < x₂ < x₃ < h(x₁)` taken from `L_G`.
    pub pinned: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyReport {
    pub target_k: u32,
    #[serde(skip)]
    pub phi: Option<MonotoneLift>,
    pub defects: Vec<GeneratorDefect>,
    pub certificate_kind: CertificateKind,
    pub targets: Vec<TargetElement>,
    pub grid: usize,
    /// Grid points dropped because the orbit search left its bound.
    pub skipped_points: usize,
    pub stages: Vec<String>,
    pub notes: Vec<String>,
    pub case: Option<ElementaryCase>,
    pub compact: Option<CompactCertificate>,
    pub convergence: Option<ConvergenceVerdict>,
    pub commuter_order_defect: Option<f64>,
    pub averaging_defect: Option<f64>,
    pub properness: Option<NonproperReport>,
}

impl ConjugacyReport {
    pub fn new(target_k: u32, certificate_kind: CertificateKind, grid: usize) -> Self {
        ConjugacyReport {
            target_k,
            phi: None,
            defects: Vec::new(),
            certificate_kind,
            targets: Vec::new(),
            grid,
            skipped_points: 0,
            stages: Vec::new(),
            notes: Vec::new(),
            case: None,
            compact: None,
            convergence: None,
            commuter_order_defect: None,
            averaging_defect: None,
            properness: None,
        }
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|d| d.defect).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.defects.iter().all(|d| d.defect <= d.tolerance)
    }
}

fn commutation_defect(f: &MonotoneLift, h: &MonotoneLift, n: usize) -> f64 {
    grid(n)
        .map(|x| cyclic_dist(f.apply(h.apply(x)), h.apply(f.apply(x))))
        .fold(0.0, f64::max)
}

/// Hyperbolic with `2k` periodic points, parabolic with `k`, otherwise elliptic.
pub fn classify_element(f: &MonotoneLift, h_ra: &MonotoneLift, k: u32) -> Result<ElementKind> {
    let defect = commutation_defect(f, h_ra, 1024);
    if defect > 1e-6 {
        return Err(Error::CommutationViolation { defect });
    }
    if f.circle_distance(&MonotoneLift::identity(), 1024) <= 1e-9 {
        return Ok(ElementKind::Identity);
    }
    let Some(q) = rotation_number(f, 10_000)?.rational.map(|r| r.q) else {
        return Ok(ElementKind::Elliptic);
    };
    let count = match periodic_points(f, q, 1e-9) {
        Ok(p) => p.len(),
        Err(Error::NoPeriodicPoints { .. }) => 0,
        Err(e) => return Err(e),
    };
    let k = k.max(1) as usize;
    Ok(if count == 2 * k {
        ElementKind::Hyperbolic
    } else if count == k {
        ElementKind::Parabolic
    } else {
        ElementKind::Elliptic
    })
}

fn insert_point(pts: &mut Vec<f64>, x: f64) -> bool {
    if pts.iter().any(|&p| cyclic_dist(p, x) <= POINT_TOL) {
        return false;
    }
    pts.push(x);
    true
}

/// Saturates a finite candidate set under the generators, their inverses and
/// `h→↑`, and sorts the result into the trichotomy `> 2k`, `2k`, `k`.
pub fn detect_elementary_case(g: &GroupSpec, h_ra: &MonotoneLift, k: u32) -> Result<ElementaryCase> {
    let k = k.max(1);
    let cap = 3 * k as usize * 8;
    let maps = g.circle_maps();
    let mut moves = Vec::with_capacity(2 * maps.len() + 2);
    for f in maps.iter().chain(std::iter::once(h_ra)) {
        moves.push(f.clone());
        moves.push(f.inverse()?);
    }

    let mut seeds = Vec::new();
    if let Some(c) = &g.candidates {
        seeds.extend(c.iter().copied());
    } else {
        for f in &maps {
            let Some(r) = rotation_number(f, 10_000)?.rational else {
                continue;
            };
            match periodic_points(f, r.q, 1e-9) {
                Ok(p) if p.len() <= cap => seeds.extend(p),
                Ok(_) | Err(Error::NoPeriodicPoints { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if seeds.is_empty() {
        seeds.push(0.0);
    }

    let mut pts: Vec<f64> = Vec::new();
    let mut queue: Vec<f64> = Vec::new();
    for s in seeds {
        let s = crate::circle::wrap(s);
        if insert_point(&mut pts, s) {
            queue.push(s);
        }
    }
    while let Some(x) = queue.pop() {
        for f in &moves {
            let y = f.act(x);
            if insert_point(&mut pts, y) {
                if pts.len() > cap {
                    return Err(Error::NotElementary { cap });
                }
                queue.push(y);
            }
        }
    }

    let n = pts.len();
    let ku = k as usize;
    let tag = if n > 2 * ku {
        CaseTag::ManyPoints
    } else if n == 2 * ku {
        CaseTag::TwoPerFiber
    } else if n == ku {
        CaseTag::OnePerFiber
    } else {
        return Err(Error::InvariantViolation(format!(
            "invariant set of {n} points is not a union of h-orbits"
        )));
    };
    if tag != CaseTag::ManyPoints {
        let hk = h_ra.power(k as i64)?;
        let defect = pts.iter().map(|&p| cyclic_dist(hk.apply(p), p)).fold(0.0, f64::max);
        if defect > POINT_TOL {
            return Err(Error::NotPeriodicOnLimitSet { k, defect });
        }
    }
    Ok(ElementaryCase::new(tag, pts, k))
}

const ELLIPTIC_GRID: usize = 1024;
const MAX_WORDS: usize = 4096;

/// Samples reduced words up to length `sample_words` and certifies that the
/// equicontinuity modulus stays under `4/grid`.
pub fn elliptic_verdict(g: &GroupSpec, case: &ElementaryCase, sample_words: usize) -> Result<CompactCertificate> {
    if case.tag != CaseTag::ManyPoints {
        return Err(Error::InvariantViolation(
            "elliptic verdict needs more than 2k invariant points".into(),
        ));
    }
    let mut letters = Vec::new();
    for f in g.circle_maps() {
        letters.push(f.inverse()?);
        letters.push(f);
    }
    let n = ELLIPTIC_GRID;
    let bound = 4.0 / n as f64;
    let modulus_of = |v: &[f64]| v.windows(2).map(|w| cyclic_dist(w[0], w[1])).fold(0.0, f64::max);
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut modulus = modulus_of(&xs);
    let mut frontier: Vec<(Option<usize>, Vec<f64>)> = vec![(None, xs)];
    let mut words = 0;
    'outer: for _ in 0..sample_words {
        let mut next = Vec::new();
        for (last, vals) in &frontier {
            for (l, f) in letters.iter().enumerate() {
                if *last == Some(l ^ 1) {
                    continue;
                }
                let v: Vec<f64> = vals.iter().map(|&y| f.apply(y)).collect();
                modulus = modulus.max(modulus_of(&v));
                words += 1;
                next.push((Some(l), v));
                if words >= MAX_WORDS {
                    break 'outer;
                }
            }
        }
        frontier = next;
    }
    if modulus > bound {
        return Err(Error::ModulusBlewUp { modulus, bound });
    }
    let p = &case.points;
    Ok(CompactCertificate {
        modulus,
        bound,
        words,
        grid: n,
        pinned: [p[0], p[1], p[2]],
    })
}

/// Sign of the displacement of `f` on the interior of the arc `[a, a + len]`,
/// or `None` when it changes sign there.
fn arc_direction(f: &MonotoneLift, a: f64, len: f64) -> Option<f64> {
    let mut sign = 0.0;
    for i in 1..64 {
        let t = len * i as f64 / 64.0;
        let mut u = offset(a, f.act(a + t));
        // an image just behind `a` is rounding, not a trip around the circle
        if u > len + 0.5 * (1.0 - len) {
            u -= 1.0;
        }
        let d = u - t;
        if d.abs() <= 1e-12 {
            continue;
        }
        let s = d.signum();
        if sign != 0.0 && s != sign {
            return None;
        }
        sign = s;
    }
    Some(sign)
}
