use serde::{Deserialize, Serialize};

use crate::circle::{cyclic_dist, grid, offset, CyclicInterval, MonotoneLift, Strictness};
use crate::error::{Error, Result};
use crate::schottky::GapSystem;

const PERIOD_TOL: f64 = 1e-6;
const ORDER_TOL: f64 = 1e-8;

fn unwrap_near(base: f64, y: f64) -> f64 {
    base + ((y - base + 0.5).rem_euclid(1.0) - 0.5)
}

fn first_return(intervals: &[CyclicInterval], h: &MonotoneLift, start: usize, cap: usize) -> Option<Vec<usize>> {
    let mut orbit = vec![start];
    let mut cur = intervals[start];
    for _ in 0..cap {
        let image = CyclicInterval::new(h.act(cur.a), h.act(cur.b));
        let next = intervals.iter().position(|iv| iv.endpoint_gap(&image) <= PERIOD_TOL)?;
        if next == start {
            return Some(orbit);
        }
        orbit.push(next);
        cur = intervals[next];
    }
    Some(orbit)
}

fn validate(sys: &GapSystem, h_ra: &MonotoneLift, k: u32) -> Result<()> {
    let hk = h_ra.power(k as i64)?;
    let defect = sys
        .closed_set_sample
        .iter()
        .map(|&x| cyclic_dist(hk.act(x), x))
        .fold(0.0, f64::max);
    if defect > PERIOD_TOL {
        return Err(Error::NotPeriodicOnLimitSet { k, defect });
    }
    if let Some(data) = sys.data() {
        for g in &data.generators {
            let defect = sys
                .closed_set_sample
                .iter()
                .map(|&x| cyclic_dist(g.act(h_ra.act(x)), h_ra.act(g.act(x))))
                .fold(0.0, f64::max);
            if defect > PERIOD_TOL {
                return Err(Error::CommutationViolation { defect });
            }
        }
    }
    let intervals: Vec<CyclicInterval> = sys.gaps.iter().map(|g| g.interval).collect();
    for j in 0..intervals.len() {
        if let Some(orbit) = first_return(&intervals, h_ra, j, k as usize) {
            if orbit.len() != k as usize {
                return Err(Error::OrbitLengthMismatch {
                    expected: k as usize,
                    found: orbit.len(),
                });
            }
        }
    }
    Ok(())
}

/// An order-`k` homeomorphism agreeing with `h_ra` on the closed set and commuting with the group.
pub fn order_k_commuter(sys: &GapSystem, h_ra: &MonotoneLift, k: u32) -> Result<MonotoneLift> {
    let k = k.max(1);
    validate(sys, h_ra, k)?;
    let hk = h_ra.power(k as i64)?;
    if grid(4096).all(|x| (hk.apply(x) - x - 1.0).abs() <= ORDER_TOL || (hk.apply(x) - x).abs() <= ORDER_TOL) {
        return Ok(h_ra.clone());
    }
    if sys.data().is_some() && sys.level_k == k {
        let deck = MonotoneLift::rotation(1.0 / k as f64);
        let defect = sys
            .closed_set_sample
            .iter()
            .map(|&x| cyclic_dist(deck.act(x), h_ra.act(x)))
            .fold(0.0, f64::max);
        if defect <= PERIOD_TOL {
            return Ok(deck);
        }
    }
    order_k_commuter_orbitwise(sys, h_ra, k)
}

/// Along each gap orbit `I₀ → … → I_{k−1}`, uses `h_ra` and closes the cycle with `h_ra^{−(k−1)}`.
/// With group data the rule is set on the base gaps and carried to every gap by the group.
pub fn order_k_commuter_orbitwise(sys: &GapSystem, h_ra: &MonotoneLift, k: u32) -> Result<MonotoneLift> {
    let k = k.max(1);
    validate(sys, h_ra, k)?;
    let intervals: Vec<CyclicInterval> = if sys.data().is_some() {
        sys.base_gaps.iter().map(|g| g.interval).collect()
    } else {
        sys.gaps.iter().map(|g| g.interval).collect()
    };
    // closing[j] is true on the last gap of its orbit
    let mut closing = vec![false; intervals.len()];
    let mut seen = vec![false; intervals.len()];
    for j in 0..intervals.len() {
        if seen[j] {
            continue;
        }
        if let Some(orbit) = first_return(&intervals, h_ra, j, k as usize) {
            orbit.iter().for_each(|&i| seen[i] = true);
            if orbit.len() == k as usize && k > 1 {
                closing[*orbit.last().unwrap()] = true;
            }
        }
    }
    let back = h_ra.power(-(k as i64 - 1))?;
    let h = h_ra.clone();
    let sys = sys.clone();
    let rule = move |y: f64| -> f64 {
        let hit = intervals.iter().position(|iv| iv.contains(y));
        match hit {
            Some(j) if closing[j] => unwrap_near(h.apply(y), back.act(y)),
            _ => h.apply(y),
        }
    };
    Ok(MonotoneLift::from_fn(
        "order-k commuter",
        Strictness::Homeomorphism,
        move |x| transported(&sys, &rule, x),
    ))
}

/// Applies `rule` after moving `x` into a base gap and back.
fn transported(sys: &GapSystem, rule: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let Some(data) = sys.data() else { return rule(x) };
    let Some((_, word)) = sys.locate(x) else { return rule(x) };
    if word.is_empty() {
        return rule(x);
    }
    let w = data.word_element(&word);
    let y = w.inverse().act(x);
    let z = w.act(rule(y));
    unwrap_near(rule(x), z)
}

fn normalize(h: &MonotoneLift, k: u32) -> Result<MonotoneLift> {
    let hk = h.power(k as i64)?;
    let d = hk.apply(0.0);
    let m = ((1.0 - d) / k as f64).round();
    let lift = if m == 0.0 {
        h.clone()
    } else {
        MonotoneLift::rotation(m).compose(h)?
    };
    let hk = lift.power(k as i64)?;
    let defect = grid(4096).map(|x| (hk.apply(x) - x - 1.0).abs()).fold(0.0, f64::max);
    if defect > ORDER_TOL {
        return Err(Error::NotFiniteOrder { k, defect });
    }
    Ok(lift)
}

/// `φ = (1/k) Σ (Hⁱ − i/k)`, which conjugates a finite-order `h` to `R_{1/k}`.
pub fn average_conjugacy(h: &MonotoneLift, k: u32) -> Result<MonotoneLift> {
    let k = k.max(1);
    let lift = normalize(h, k)?;
    let kf = k as f64;
    Ok(MonotoneLift::from_fn(
        "averaging conjugacy",
        Strictness::Homeomorphism,
        move |x| {
            let mut y = x;
            let mut sum = 0.0;
            for i in 0..k {
                sum += y - i as f64 / kf;
                y = lift.apply(y);
            }
            sum / kf
        },
    ))
}

/// `sup |φ(H(x)) − φ(x) − 1/k|` over the grid, with `H` normalized as in [`average_conjugacy`].
pub fn averaging_defect(phi: &MonotoneLift, h: &MonotoneLift, k: u32, n: usize) -> Result<f64> {
    let lift = normalize(h, k.max(1))?;
    Ok(grid(n)
        .map(|x| (phi.apply(lift.apply(x)) - phi.apply(x) - 1.0 / k.max(1) as f64).abs())
        .fold(0.0, f64::max))
}

/// Finite invariant set with each generator given as an index permutation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSet {
    pub points: Vec<f64>,
    pub perms: Vec<Vec<usize>>,
}

impl OrbitSet {
    /// Reindexes the points in cyclic order from the smallest angle.
    fn sorted(&self) -> OrbitSet {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&i, &j| offset(0.0, self.points[i]).total_cmp(&offset(0.0, self.points[j])));
        let mut rank = vec![0; idx.len()];
        for (r, &i) in idx.iter().enumerate() {
            rank[i] = r;
        }
        OrbitSet {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            perms: self
                .perms
                .iter()
                .map(|p| idx.iter().map(|&i| rank[p[i]]).collect())
                .collect(),
        }
    }
}

/// Whether a cyclic-order-preserving bijection `E → F` intertwines all generator permutations.
pub fn finite_orbit_match(e: &OrbitSet, f: &OrbitSet) -> Result<bool> {
    let n = e.points.len();
    if n != f.points.len() || n < 2 {
        return Err(Error::SizeMismatch(n, f.points.len()));
    }
    if e.perms.len() != f.perms.len() {
        return Err(Error::SizeMismatch(e.perms.len(), f.perms.len()));
    }
    if e.perms
        .iter()
        .chain(&f.perms)
        .any(|p| p.len() != n || p.iter().any(|&i| i >= n))
    {
        return Err(Error::SizeMismatch(n, 0));
    }
    let (e, f) = (e.sorted(), f.sorted());
    Ok((0..n).any(|s| {
        let sigma = |i: usize| (i + s) % n;
        e.perms
            .iter()
            .zip(&f.perms)
            .all(|(pe, pf)| (0..n).all(|i| sigma(pe[i]) == pf[sigma(i)]))
    }))
}
