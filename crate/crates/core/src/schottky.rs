//! Ping-pong groups, their limit-set gaps, and equivariant extension of gap maps.
//!
//! Gap endpoints are not approximated by nested intervals: the extreme limit
//! points of each ping-pong arc are fixed points of explicit words, found by
//! following "last arc inside the preimage component" transitions to a cycle.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::circle::{cyclic_dist, offset, wrap, CyclicInterval, MonotoneLift, Strictness};
use crate::error::{Error, Result};
use crate::moebius::MoebiusK;

/// Generator `i` is letter `2i`, its inverse `2i + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter(pub u16);

impl Letter {
    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }
    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }
    pub fn inv(self) -> Letter {
        Letter(self.0 ^ 1)
    }
}

pub type Word = Vec<Letter>;

/// Generators at a common level with their attracting and repelling arcs.
#[derive(Clone, Debug)]
pub struct PingPongData {
    pub generators: Vec<MoebiusK>,
    pub attracting: Vec<Vec<CyclicInterval>>,
    pub repelling: Vec<Vec<CyclicInterval>>,
    inverses: Vec<MoebiusK>,
}

#[derive(Clone, Copy, Debug)]
struct Arc_ {
    interval: CyclicInterval,
    letter: Letter,
}

impl PingPongData {
    pub fn new(
        generators: Vec<MoebiusK>,
        attracting: Vec<Vec<CyclicInterval>>,
        repelling: Vec<Vec<CyclicInterval>>,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::PingPongViolation("empty generator list".into()));
        }
        if attracting.len() != generators.len() || repelling.len() != generators.len() {
            return Err(Error::PingPongViolation("one arc list per generator required".into()));
        }
        let k = generators[0].k();
        if generators.iter().any(|g| g.k() != k) {
            return Err(Error::PingPongViolation("generators at different levels".into()));
        }
        let inverses = generators.iter().map(|g| g.inverse()).collect();
        let data = PingPongData {
            generators,
            attracting,
            repelling,
            inverses,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn k(&self) -> u32 {
        self.generators[0].k()
    }

    pub fn letter_count(&self) -> usize {
        2 * self.generators.len()
    }

    pub fn element(&self, l: Letter) -> &MoebiusK {
        if l.is_inverse() {
            &self.inverses[l.generator()]
        } else {
            &self.generators[l.generator()]
        }
    }

    /// Image arcs of a letter: attracting arcs for `g`, repelling arcs for `g⁻¹`.
    pub fn arcs_of(&self, l: Letter) -> &[CyclicInterval] {
        if l.is_inverse() {
            &self.repelling[l.generator()]
        } else {
            &self.attracting[l.generator()]
        }
    }

    /// `w(x)` for `w = [s₁, …, sₙ]` meaning `s₁ ∘ … ∘ sₙ`.
    pub fn apply_word(&self, word: &[Letter], x: f64) -> f64 {
        word.iter().rev().fold(x, |acc, &l| self.element(l).act(acc))
    }

    pub fn word_element(&self, word: &[Letter]) -> MoebiusK {
        word.iter().fold(MoebiusK::identity(self.k()), |acc, &l| {
            acc.compose_lift(self.element(l)).0
        })
    }

    fn sorted_arcs(&self) -> Vec<Arc_> {
        let mut arcs: Vec<Arc_> = (0..self.letter_count() as u16)
            .flat_map(|l| {
                let letter = Letter(l);
                self.arcs_of(letter)
                    .iter()
                    .map(move |&interval| Arc_ { interval, letter })
            })
            .collect();
        arcs.sort_by(|p, q| p.interval.a.total_cmp(&q.interval.a));
        arcs
    }

    fn validate(&self) -> Result<()> {
        let arcs = self.sorted_arcs();
        for (i, p) in arcs.iter().enumerate() {
            for q in &arcs[i + 1..] {
                if !p.interval.disjoint(&q.interval) {
                    return Err(Error::PingPongViolation(format!(
                        "arcs {:?} and {:?} overlap",
                        p.interval, q.interval
                    )));
                }
            }
        }
        for l in (0..self.letter_count() as u16).map(Letter) {
            let g = self.element(l);
            for comp in complement_components(self.arcs_of(l.inv())) {
                let ends = [g.act(comp.a), g.act(comp.midpoint()), g.act(comp.b)];
                let ok = self
                    .arcs_of(l)
                    .iter()
                    .any(|t| ends.iter().all(|&y| t.contains_closed(y, 1e-12)));
                if !ok {
                    return Err(Error::PingPongViolation(format!(
                        "letter {} does not map {:?} into its image arcs",
                        l.0, comp
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Open components of the circle minus a union of disjoint arcs.
fn complement_components(arcs: &[CyclicInterval]) -> Vec<CyclicInterval> {
    let mut v: Vec<CyclicInterval> = arcs.to_vec();
    v.sort_by(|p, q| p.a.total_cmp(&q.a));
    (0..v.len())
        .map(|i| CyclicInterval::new(v[i].b, v[(i + 1) % v.len()].a))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Gap {
    pub interval: CyclicInterval,
    /// Word carrying the fundamental representative onto this gap.
    pub word: Word,
    /// Index into `GapSystem::fundamental`.
    pub rep: usize,
    pub fundamental: bool,
    /// Number of letters applied to the level-zero gaps to reach this one.
    pub level: usize,
}

/// Gap of the limit set that meets the complement of all ping-pong arcs.
#[derive(Clone, Debug, Serialize)]
pub struct BaseGap {
    pub interval: CyclicInterval,
    pub rep: usize,
    pub word: Word,
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalGap {
    pub interval: CyclicInterval,
    /// Shortest word of length ≤ 8 fixing the gap, if one exists.
    pub stabilizer: Option<Word>,
}

#[derive(Clone, Debug)]
pub struct GapSystem {
    pub gaps: Vec<Gap>,
    pub depth: usize,
    pub closed_set_sample: Vec<f64>,
    /// Closed-set sample size after each depth `1..=depth`.
    pub sample_counts: Vec<usize>,
    pub base_gaps: Vec<BaseGap>,
    pub fundamental: Vec<FundamentalGap>,
    pub level_k: u32,
    data: Option<Arc<PingPongData>>,
    arcs: Vec<(CyclicInterval, Letter)>,
    transitions: Vec<(CyclicInterval, Vec<usize>)>,
}

fn dedup_cyclic(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|p, q| cyclic_dist(*p, *q) < 1e-12);
    while pts.len() > 1 && cyclic_dist(pts[0], *pts.last().unwrap()) < 1e-12 {
        pts.pop();
    }
    pts
}

fn quantize(x: f64) -> i64 {
    ((wrap(x) * 1e9).round() as i64).rem_euclid(1_000_000_000)
}

impl GapSystem {
    /// A gap list without group data, as used for synthetic collapses.
    pub fn from_gaps(mut intervals: Vec<(CyclicInterval, usize)>, level_k: u32) -> Self {
        intervals.sort_by(|p, q| p.0.a.total_cmp(&q.0.a));
        let gaps: Vec<Gap> = intervals
            .iter()
            .map(|&(interval, level)| Gap {
                interval,
                word: Vec::new(),
                rep: 0,
                fundamental: level == 0,
                level,
            })
            .collect();
        let depth = gaps.iter().map(|g| g.level).max().unwrap_or(0) + 1;
        let sample = dedup_cyclic(gaps.iter().flat_map(|g| [g.interval.a, g.interval.b]).collect());
        GapSystem {
            fundamental: gaps
                .iter()
                .filter(|g| g.fundamental)
                .map(|g| FundamentalGap {
                    interval: g.interval,
                    stabilizer: None,
                })
                .collect(),
            sample_counts: vec![sample.len()],
            closed_set_sample: sample,
            base_gaps: Vec::new(),
            gaps,
            depth,
            level_k,
            data: None,
            arcs: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn data(&self) -> Option<&PingPongData> {
        self.data.as_deref()
    }

    /// Index of the listed gap containing `x`.
    pub fn listed_gap(&self, x: f64) -> Option<usize> {
        let x = wrap(x);
        let i = self.gaps.partition_point(|g| g.interval.a <= x);
        let cands = [
            i.checked_sub(1).unwrap_or(self.gaps.len().saturating_sub(1)),
            self.gaps.len().saturating_sub(1),
        ];
        cands
            .into_iter()
            .find(|&j| j < self.gaps.len() && self.gaps[j].interval.contains(x))
    }

    /// Exact gap of the limit set containing `x`: `(base gap, w)` with `x ∈ w(base gap)`.
    /// `None` means `x` is within numerical reach of the limit set.
    pub fn locate(&self, x: f64) -> Option<(usize, Word)> {
        let data = self.data.as_ref()?;
        let mut y = wrap(x);
        let mut word = Vec::new();
        for _ in 0..64 {
            if let Some(j) = self.base_gaps.iter().position(|g| g.interval.contains(y)) {
                return Some((j, word));
            }
            let (_, l) = *self.arcs.iter().find(|(arc, _)| arc.contains_closed(y, 0.0))?;
            word.push(l);
            y = data.element(l.inv()).act(y);
        }
        None
    }

    /// Position of `x ∉ Λ` for the measure giving every ping-pong arc equal mass
    /// and splitting an arc's mass equally among the arcs of its preimage component.
    /// Zero at the start of the first arc.
    pub fn arc_measure_position(&self, x: f64) -> Option<f64> {
        let data = self.data.as_ref()?;
        let m = self.arcs.len();
        let top: Vec<usize> = (0..m).collect();
        let mut frame_start = self.arcs[0].0.a;
        let mut list: &[usize] = &top;
        let mut weight = 1.0 / m as f64;
        let mut pos = 0.0;
        let mut y = wrap(x);
        for _ in 0..64 {
            let t = offset(frame_start, y);
            let mut inside = None;
            let mut before = 0usize;
            for &e in list {
                let arc = self.arcs[e].0;
                if arc.contains(y) {
                    inside = Some(e);
                    break;
                }
                if offset(frame_start, arc.a) < t {
                    before += 1;
                }
            }
            pos += before as f64 * weight;
            let Some(e) = inside else { return Some(pos) };
            let (comp, sub) = &self.transitions[e];
            let (arc, l) = self.arcs[e];
            let y_next = data.element(l.inv()).act(y);
            if !comp.contains(y_next) {
                // y lies in a gap at one end of the arc, outside the image of the component
                let left = offset(arc.a, y) < offset(arc.a, data.element(l).act(comp.midpoint()));
                return Some(if left { pos } else { pos + weight });
            }
            y = y_next;
            frame_start = comp.a;
            list = sub;
            weight /= sub.len() as f64;
        }
        Some(pos)
    }

    /// Endpoints of the listed gaps in cyclic order.
    pub fn endpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gaps.iter().map(|g| (g.interval.a, g.interval.b))
    }
}

/// For each arc, the preimage component mapped into it and the arcs inside that component.
fn transitions(data: &PingPongData, arcs: &[Arc_]) -> Result<Vec<(CyclicInterval, Vec<usize>)>> {
    let m = arcs.len();
    let mut out = Vec::with_capacity(m);
    for arc in arcs {
        let l = arc.letter;
        let g = data.element(l);
        let inv_positions: Vec<usize> = (0..m).filter(|&i| arcs[i].letter == l.inv()).collect();
        let mut found = None;
        for (idx, &start) in inv_positions.iter().enumerate() {
            let end = inv_positions[(idx + 1) % inv_positions.len()];
            let comp = CyclicInterval::new(arcs[start].interval.b, arcs[end].interval.a);
            if !arc.interval.contains_closed(g.act(comp.midpoint()), 1e-12) {
                continue;
            }
            let inside: Vec<usize> = (1..m).map(|d| (start + d) % m).take_while(|&i| i != end).collect();
            if inside.is_empty() {
                return Err(Error::PingPongViolation("component without ping-pong arcs".into()));
            }
            found = Some((comp, inside));
            break;
        }
        out.push(found.ok_or_else(|| Error::PingPongViolation("no component maps into an arc".into()))?);
    }
    Ok(out)
}

fn extreme_points(
    data: &PingPongData,
    arcs: &[Arc_],
    trans: &[(CyclicInterval, Vec<usize>)],
    rightmost: bool,
) -> Result<Vec<f64>> {
    let m = arcs.len();
    let next: Vec<usize> = trans
        .iter()
        .map(|(_, inside)| if rightmost { *inside.last().unwrap() } else { inside[0] })
        .collect();
    let mut out = vec![f64::NAN; m];
    for e in 0..m {
        let mut path = vec![e];
        let mut cur = next[e];
        while !path.contains(&cur) {
            path.push(cur);
            cur = next[cur];
        }
        let start = path.iter().position(|&p| p == cur).unwrap();
        let cycle: Word = path[start..].iter().map(|&i| arcs[i].letter).collect();
        let mut p = word_fixed_point(data, &cycle, &arcs[cur].interval);
        for &i in path[..start].iter().rev() {
            p = data.element(arcs[i].letter).act(p);
        }
        out[e] = p;
    }
    Ok(out)
}

/// Fixed point of `w` on the closed arc it maps into itself.
fn word_fixed_point(data: &PingPongData, word: &[Letter], arc: &CyclicInterval) -> f64 {
    let phi = |t: f64| arc.fraction(data.apply_word(word, arc.at(t))) - t;
    // parabolic words fix an arc endpoint with a double root that bisection resolves poorly
    for end in [arc.a, arc.b] {
        if cyclic_dist(data.apply_word(word, end), end) < 1e-15 {
            return end;
        }
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = phi(mid);
        if v > 0.0 && v < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    arc.at(0.5 * (lo + hi))
}

fn same_interval(p: &CyclicInterval, q: &CyclicInterval, tol: f64) -> bool {
    cyclic_dist(p.a, q.a) <= tol && cyclic_dist(p.b, q.b) <= tol
}

fn map_interval(g: &MoebiusK, iv: &CyclicInterval) -> CyclicInterval {
    CyclicInterval::new(g.act(iv.a), g.act(iv.b))
}

/// Gaps of the limit set reached by words of length `< depth` from the base gaps.
pub fn limit_set(data: &PingPongData, depth: usize) -> Result<GapSystem> {
    let depth = depth.max(1);
    let arcs = data.sorted_arcs();
    let trans = transitions(data, &arcs)?;
    let right = extreme_points(data, &arcs, &trans, true)?;
    let left = extreme_points(data, &arcs, &trans, false)?;
    let m = arcs.len();

    let mut base: Vec<CyclicInterval> = Vec::new();
    for j in 0..m {
        let nj = (j + 1) % m;
        let j_len = offset(arcs[j].interval.b, arcs[nj].interval.a);
        let touching = !(1e-14..=1.0 - 1e-14).contains(&j_len);
        let (r, l) = (right[j], left[nj]);
        if touching && cyclic_dist(r, arcs[j].interval.b) < 1e-10 && cyclic_dist(l, arcs[nj].interval.a) < 1e-10 {
            continue;
        }
        base.push(CyclicInterval::new(r, l));
    }
    if base.is_empty() {
        return Err(Error::PingPongViolation("no gaps found".into()));
    }

    // orbit classes of base gaps under single letters
    let nb = base.len();
    let mut edges: Vec<Vec<(usize, Letter)>> = vec![Vec::new(); nb];
    for (i, g) in base.iter().enumerate() {
        for l in (0..data.letter_count() as u16).map(Letter) {
            let img = map_interval(data.element(l), g);
            if let Some(j) = base.iter().position(|h| same_interval(h, &img, 1e-9)) {
                edges[i].push((j, l));
            }
        }
    }
    let mut rep_of: Vec<Option<(usize, Word)>> = vec![None; nb];
    let mut fundamental: Vec<FundamentalGap> = Vec::new();
    for start in 0..nb {
        if rep_of[start].is_some() {
            continue;
        }
        let rep = fundamental.len();
        fundamental.push(FundamentalGap {
            interval: base[start],
            stabilizer: None,
        });
        rep_of[start] = Some((rep, Vec::new()));
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let w = rep_of[i].as_ref().unwrap().1.clone();
            for &(j, l) in &edges[i] {
                if rep_of[j].is_none() {
                    let mut wj = vec![l];
                    wj.extend(&w);
                    rep_of[j] = Some((rep, wj));
                    queue.push_back(j);
                }
            }
        }
    }
    for f in fundamental.iter_mut() {
        f.stabilizer = find_stabilizer(data, &f.interval, 8);
    }
    let base_gaps: Vec<BaseGap> = base
        .iter()
        .zip(&rep_of)
        .map(|(iv, r)| {
            let (rep, word) = r.clone().unwrap();
            BaseGap {
                interval: *iv,
                rep,
                word,
            }
        })
        .collect();

    let mut seen: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut gaps: Vec<Gap> = Vec::new();
    for (i, bg) in base_gaps.iter().enumerate() {
        seen.insert((quantize(bg.interval.a), quantize(bg.interval.b)), i);
        gaps.push(Gap {
            interval: bg.interval,
            word: bg.word.clone(),
            rep: bg.rep,
            fundamental: bg.word.is_empty(),
            level: 0,
        });
    }
    let mut sample_counts = Vec::new();
    let count_endpoints = |gaps: &[Gap]| {
        let mut pts: Vec<i64> = gaps
            .iter()
            .flat_map(|g| [quantize(g.interval.a), quantize(g.interval.b)])
            .collect();
        pts.sort_unstable();
        pts.dedup();
        pts.len()
    };
    sample_counts.push(count_endpoints(&gaps));
    let mut frontier: Vec<usize> = (0..gaps.len()).collect();
    for level in 1..depth {
        let mut next_frontier = Vec::new();
        for &gi in &frontier {
            let parent = gaps[gi].clone();
            for l in (0..data.letter_count() as u16).map(Letter) {
                let img = map_interval(data.element(l), &parent.interval);
                let key = (quantize(img.a), quantize(img.b));
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, gaps.len());
                let mut word = vec![l];
                word.extend(&parent.word);
                next_frontier.push(gaps.len());
                gaps.push(Gap {
                    interval: img,
                    word,
                    rep: parent.rep,
                    fundamental: false,
                    level,
                });
            }
        }
        frontier = next_frontier;
        sample_counts.push(count_endpoints(&gaps));
    }
    gaps.sort_by(|p, q| p.interval.a.total_cmp(&q.interval.a));
    let sample: Vec<f64> = gaps.iter().flat_map(|g| [g.interval.a, g.interval.b]).collect();
    let sample = dedup_cyclic(sample);

    Ok(GapSystem {
        gaps,
        depth,
        closed_set_sample: sample,
        sample_counts,
        base_gaps,
        fundamental,
        level_k: data.k(),
        data: Some(Arc::new(data.clone())),
        arcs: arcs.iter().map(|a| (a.interval, a.letter)).collect(),
        transitions: trans,
    })
}

/// Shortest nonempty reduced word of length ≤ `max_len` mapping the gap to itself.
fn find_stabilizer(data: &PingPongData, gap: &CyclicInterval, max_len: usize) -> Option<Word> {
    let mut layer: Vec<(Word, MoebiusK)> = vec![(Vec::new(), MoebiusK::identity(data.k()))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, g) in &layer {
            for l in (0..data.letter_count() as u16).map(Letter) {
                if w.first().is_some_and(|&f| f == l.inv()) {
                    continue;
                }
                let h = data.element(l).compose_lift(g).0;
                let mut wl = vec![l];
                wl.extend(w);
                if same_interval(&map_interval(&h, gap), gap, 1e-9) {
                    return Some(wl);
                }
                next.push((wl, h));
            }
        }
        layer = next;
    }
    None
}

/// Whether the closed-set sample stayed at ≤ 2 points over the last two depths.
pub fn is_elementary(sys: &GapSystem) -> bool {
    match sys.sample_counts.as_slice() {
        [.., a, b] => a == b && *b <= 2,
        [a] => *a <= 2,
        [] => true,
    }
}

/// Default seed on a fundamental gap: a two-piece linear map pushing the
/// midpoint forward by 10% of the gap (or of the stabilizer's fundamental
/// domain when the gap has a nontrivial stabilizer).
pub fn default_seed(sys: &GapSystem, rep: usize) -> Result<MonotoneLift> {
    let f = &sys.fundamental[rep];
    let iv = f.interval;
    match (&f.stabilizer, sys.data()) {
        (Some(word), Some(data)) => {
            let c = data.word_element(word);
            let c_inv = c.inverse();
            let z = iv.midpoint();
            let cz = c.act(z);
            let forward = iv.fraction(cz) > iv.fraction(z);
            let (dom, gen, gen_inv) = if forward {
                (CyclicInterval::new(z, cz), c, c_inv)
            } else {
                (CyclicInterval::new(cz, z), c_inv, c)
            };
            let a = iv.a;
            let seed = move |x: f64| -> f64 {
                if !iv.contains(x) {
                    return x;
                }
                // move x into [dom.a, dom.b) with powers of `gen`
                let mut y = x;
                let mut n: i32 = 0;
                while n.abs() < 400 {
                    let t = iv.fraction(y);
                    if t < iv.fraction(dom.a) {
                        y = gen.act(y);
                        n -= 1;
                    } else if t >= iv.fraction(dom.b) {
                        y = gen_inv.act(y);
                        n += 1;
                    } else {
                        break;
                    }
                }
                let s = dom.fraction(y);
                let s2 = if s < 0.5 { s * 1.2 } else { 0.6 + (s - 0.5) * 0.8 };
                let mut out = dom.at(s2);
                let step = if n > 0 { &gen } else { &gen_inv };
                for _ in 0..n.abs() {
                    out = step.act(out);
                }
                x - offset_in(a, iv.length(), x) + offset_in(a, iv.length(), out)
            };
            Ok(MonotoneLift::from_fn(
                format!("equivariant-seed-{rep}"),
                Strictness::Homeomorphism,
                seed,
            ))
        }
        _ => {
            let seed = move |x: f64| -> f64 {
                if !iv.contains(x) {
                    return x;
                }
                let s = iv.fraction(x);
                let s2 = if s < 0.5 { s * 1.2 } else { 0.6 + (s - 0.5) * 0.8 };
                x - offset(iv.a, x) + offset(iv.a, iv.at(s2))
            };
            Ok(MonotoneLift::from_fn(
                format!("tent-seed-{rep}"),
                Strictness::Homeomorphism,
                seed,
            ))
        }
    }
}

/// Offset of `out` from `a` within an arc of length `len`; a point just
/// outside the arc is rounding and snaps to the nearer end.
fn offset_in(a: f64, len: f64, out: f64) -> f64 {
    let t = offset(a, out);
    if t <= len {
        t
    } else if t - len < 1.0 - t {
        len
    } else {
        0.0
    }
}

/// Equivariant extension of per-fundamental-gap seeds (`None` is the
/// identity); the identity on the limit set and on gaps beyond reach.
pub fn commuting_homeo(sys: &GapSystem, seeds: &[Option<MonotoneLift>]) -> Result<MonotoneLift> {
    let data = sys
        .data()
        .ok_or_else(|| Error::PingPongViolation("gap system carries no group data".into()))?
        .clone();
    if seeds.len() != sys.fundamental.len() {
        return Err(Error::LengthMismatch {
            left: seeds.len(),
            right: sys.fundamental.len(),
        });
    }
    for (rep, (f, seed)) in sys.fundamental.iter().zip(seeds).enumerate() {
        let Some(seed) = seed else { continue };
        let iv = f.interval;
        let ends = [iv.a, iv.b];
        let moved = ends.iter().map(|&e| cyclic_dist(seed.act(e), e)).fold(0.0, f64::max);
        let escapes = (1..64)
            .map(|i| iv.at(i as f64 / 64.0))
            .any(|x| !iv.contains(seed.act(x)));
        if moved > 1e-8 || escapes {
            return Err(Error::SeedMovesEndpoints {
                gap: rep,
                defect: moved,
            });
        }
        if let Some(w) = &f.stabilizer {
            let c = data.word_element(w);
            let defect = (1..256)
                .map(|i| iv.at(i as f64 / 256.0))
                .map(|x| cyclic_dist(seed.act(c.act(x)), c.act(seed.act(x))))
                .fold(0.0, f64::max);
            if defect > 1e-8 {
                return Err(Error::SeedNotCommuting { defect });
            }
        }
    }
    let seeds: Vec<Option<MonotoneLift>> = seeds.to_vec();
    let sys = sys.clone();
    let eval = move |x: f64| -> f64 {
        let Some((j, w)) = sys.locate(x) else { return x };
        let bg = &sys.base_gaps[j];
        let Some(seed) = &seeds[bg.rep] else { return x };
        // x = w(c(y)) with y in the fundamental gap and c = bg.word
        let mut full = w.clone();
        full.extend(&bg.word);
        let inv: Word = full.iter().rev().map(|l| l.inv()).collect();
        let y = data.apply_word(&inv, x);
        let out = data.apply_word(&full, seed.act(y));
        let fund = sys.fundamental[bg.rep].interval;
        let a = data.apply_word(&full, fund.a);
        let len = offset(a, data.apply_word(&full, fund.b));
        x - offset_in(a, len, x) + offset_in(a, len, out)
    };
    Ok(MonotoneLift::from_fn(
        "commuting-homeo",
        Strictness::Homeomorphism,
        eval,
    ))
}
