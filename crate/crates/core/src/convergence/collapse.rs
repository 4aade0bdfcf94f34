use std::sync::Arc;

use crate::circle::{offset, wrap, CyclicInterval, MonotoneLift, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::schottky::GapSystem;

/// The collapse `π` of a gap system together with the labels it assigns.
#[derive(Clone, Debug)]
pub struct CollapseData {
    pub pi: MonotoneLift,
    /// Label of each listed gap, indexed like `sys.gaps`.
    pub gap_labels: Vec<f64>,
    pub depth: usize,
    /// Largest label jump between cyclically consecutive gaps.
    pub resolution: f64,
    pub sys: GapSystem,
}

/// Labels from the equal-mass arc measure: exact for ping-pong data.
fn measure_labels(sys: &GapSystem) -> Vec<f64> {
    sys.gaps
        .iter()
        .map(|g| wrap(sys.arc_measure_position(g.interval.midpoint()).unwrap_or(0.0)))
        .collect()
}

/// Cantor-function labels: each new level splits every bucket evenly among its new gaps.
fn hierarchical_labels(sys: &GapSystem) -> Vec<f64> {
    let anchor = sys.listed_gap(0.0).map(|j| sys.gaps[j].interval.b).unwrap_or(0.0);
    let pos = |j: usize| offset(anchor, sys.gaps[j].interval.a);
    let mut labels = vec![0.0; sys.gaps.len()];
    // (position, label) of the bucket boundaries already fixed
    let mut fixed: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 1.0)];
    if let Some(j) = sys.listed_gap(0.0) {
        labels[j] = 0.0;
    }
    let max_level = sys.gaps.iter().map(|g| g.level).max().unwrap_or(0);
    for level in 0..=max_level {
        let mut new: Vec<(f64, usize)> = (0..sys.gaps.len())
            .filter(|&j| sys.gaps[j].level == level && Some(j) != sys.listed_gap(0.0))
            .map(|j| (pos(j), j))
            .collect();
        new.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut added = Vec::with_capacity(new.len());
        let mut i = 0;
        while i < new.len() {
            let bucket = fixed.partition_point(|f| f.0 <= new[i].0);
            let end = new[i..]
                .iter()
                .position(|&(p, _)| p >= fixed[bucket].0)
                .map_or(new.len(), |e| i + e);
            let (l0, l1) = (fixed[bucket - 1].1, fixed[bucket].1);
            let c = end - i;
            for (r, &(p, j)) in new[i..end].iter().enumerate() {
                labels[j] = l0 + (r + 1) as f64 * (l1 - l0) / (c + 1) as f64;
                added.push((p, labels[j]));
            }
            i = end;
        }
        fixed.extend(added);
        fixed.sort_by(|p, q| p.0.total_cmp(&q.0));
    }
    labels
}

/// Builds `π` with flats on the listed gaps and linear pieces on the closed-set arcs between them.
pub fn collapse_map(sys: &GapSystem) -> Result<CollapseData> {
    let n = sys.gaps.len();
    if n < 4 {
        return Err(Error::TooFewGaps(n));
    }
    let labels = if sys.data().is_some() {
        measure_labels(sys)
    } else {
        hierarchical_labels(sys)
    };
    let anchor = (0..n).min_by(|&i, &j| labels[i].total_cmp(&labels[j])).unwrap();
    let s = sys.gaps[anchor].interval.a;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| offset(s, sys.gaps[i].interval.a).total_cmp(&offset(s, sys.gaps[j].interval.a)));

    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    let mut prev_label = labels[anchor];
    let mut resolution: f64 = 0.0;
    for &j in &order {
        let mut l = labels[j];
        if l < prev_label - 1e-12 {
            l += 1.0;
        }
        resolution = resolution.max(l - prev_label);
        prev_label = l;
        let x = s + offset(s, sys.gaps[j].interval.a);
        for pt in [(x, l), (x + sys.gaps[j].interval.length(), l)] {
            if knots.last().is_some_and(|k| pt.0 <= k.0) {
                continue;
            }
            knots.push(pt);
        }
    }
    resolution = resolution.max(labels[anchor] + 1.0 - prev_label);
    if knots.last().is_some_and(|k| k.0 >= knots[0].0 + 1.0) {
        knots.pop();
    }
    let pl = PiecewiseLinear::new(&knots)?;
    Ok(CollapseData {
        pi: MonotoneLift::CollapseStaircase(Arc::new(pl)),
        gap_labels: labels,
        depth: sys.depth,
        resolution,
        sys: sys.clone(),
    })
}

impl CollapseData {
    /// Flats of `π` without a listed gap at the same place, plus gaps without a flat.
    pub fn flat_mismatch(&self) -> usize {
        let MonotoneLift::CollapseStaircase(p) = &self.pi else {
            return usize::MAX;
        };
        let flats: Vec<CyclicInterval> = p
            .flats()
            .iter()
            .map(|&(a, b, _)| CyclicInterval::new(wrap(a), wrap(b)))
            .collect();
        let same = |u: &CyclicInterval, v: &CyclicInterval| u.endpoint_gap(v) <= FLAT_TOL;
        let lonely_flats = flats
            .iter()
            .filter(|f| !self.sys.gaps.iter().any(|g| same(f, &g.interval)))
            .count();
        let lonely_gaps = self
            .sys
            .gaps
            .iter()
            .filter(|g| !flats.iter().any(|f| same(f, &g.interval)))
            .count();
        lonely_flats + lonely_gaps
    }
}

/// Knot abscissae are rebuilt as `s + (a - s)`, which may move `a` by an ulp.
const FLAT_TOL: f64 = 1e-12;

const MATCH_TOL: f64 = 1e-6;

/// Partial overlap of two arcs: they meet but neither endpoint pair agrees.
fn overlaps(u: &CyclicInterval, v: &CyclicInterval) -> bool {
    u.contains(v.midpoint()) || v.contains(u.midpoint()) || u.contains(v.a) || v.contains(u.a)
}

/// The map `f̂` on labels with `f̂ ∘ π = π ∘ f` on the listed gaps.
pub fn collapsed_map(cd: &CollapseData, f: &MonotoneLift) -> Result<MonotoneLift> {
    let sys = &cd.sys;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(sys.gaps.len());
    for (j, g) in sys.gaps.iter().enumerate() {
        let image = CyclicInterval::new(f.act(g.interval.a), f.act(g.interval.b));
        let target = sys
            .gaps
            .iter()
            .position(|h| h.interval.endpoint_gap(&image) <= MATCH_TOL);
        let label = match target {
            Some(t) => cd.gap_labels[t],
            None => {
                if let Some(h) = sys.gaps.iter().find(|h| overlaps(&h.interval, &image)) {
                    return Err(Error::GapsNotPermuted {
                        defect: h.interval.endpoint_gap(&image),
                    });
                }
                match sys.arc_measure_position(image.midpoint()) {
                    Some(p) => wrap(p),
                    None => continue,
                }
            }
        };
        knots.push((cd.gap_labels[j], label));
    }
    if knots.is_empty() {
        return Err(Error::GapsNotPermuted { defect: f64::INFINITY });
    }
    knots.sort_by(|p, q| p.0.total_cmp(&q.0));
    knots.dedup_by(|p, q| p.0 == q.0);
    let mut prev = knots[0].1;
    for k in knots.iter_mut().skip(1) {
        while k.1 < prev - 1e-12 {
            k.1 += 1.0;
        }
        prev = k.1;
    }
    PiecewiseLinear::new(&knots)
        .map(|p| MonotoneLift::PiecewiseLinear(Arc::new(p)))
        .map_err(|_| Error::GapsNotPermuted { defect: f64::NAN })
}
