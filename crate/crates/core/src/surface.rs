//! Conformal models `{h̃↓(x) < y < h̃↑(x)}` of spatially compact surfaces and
//! the grid-certified verdicts built on their boundary maps.

use serde::Serialize;

use crate::circle::{cyclic_dist, grid, offset, rotation_number, CyclicInterval, MonotoneLift, Sign, DEFAULT_GRID};
use crate::desitter::IsometryPair;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub h_down: MonotoneLift,
    pub h_up: MonotoneLift,
    pub level_k: u32,
}

#[derive(Clone, Debug)]
pub struct BoundaryMaps {
    pub h_right: MonotoneLift,
    pub h_left: MonotoneLift,
    /// `h→ ∘ h↑`.
    pub h_ra: MonotoneLift,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AcausalVerdict {
    Acausal,
    NotAcausal { witness: CyclicInterval },
    Inconclusive { arcs: Vec<CyclicInterval> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusEmbedding {
    pub embeds: bool,
    pub witness: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonproperReport {
    pub finite: bool,
    pub sup_at_most_two: bool,
    pub sup: Option<f64>,
    /// Only evaluated for acausal models.
    pub inf_at_most_one: Option<bool>,
    pub inf: Option<f64>,
    pub witness: Option<f64>,
    pub proper_certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WitnessOutcome {
    Found { n: i32, x: f64, graph: Vec<(f64, f64)> },
    RotationIsOneOverK(u32),
    Inconclusive,
}

const SLACK: f64 = 1e-10;

/// `x ∈ ]a, b[` with margin `SLACK` from both ends, so rounding never manufactures a witness.
fn strictly_between(a: f64, x: f64, b: f64) -> bool {
    let len = if cyclic_dist(a, b) < SLACK { 1.0 } else { offset(a, b) };
    let t = offset(a, x);
    t > SLACK && t < len - SLACK
}

impl SurfaceModel {
    pub fn new(h_down: MonotoneLift, h_up: MonotoneLift, level_k: u32) -> Result<Self> {
        if matches!(h_down, MonotoneLift::Infinite(Sign::Plus)) || matches!(h_up, MonotoneLift::Infinite(Sign::Minus)) {
            return Err(Error::InvariantViolation("boundary flags on the wrong side".into()));
        }
        if !h_down.is_infinite() && !h_up.is_infinite() {
            if let Some(x) = grid(DEFAULT_GRID).find(|&x| h_down.apply(x) >= h_up.apply(x)) {
                return Err(Error::BoundariesCross { x });
            }
        }
        Ok(SurfaceModel {
            h_down,
            h_up,
            level_k: level_k.max(1),
        })
    }

    pub fn flat_cylinder() -> Self {
        SurfaceModel {
            h_down: MonotoneLift::Infinite(Sign::Minus),
            h_up: MonotoneLift::Infinite(Sign::Plus),
            level_k: 1,
        }
    }

    fn finite(&self) -> Result<()> {
        if self.h_down.is_infinite() || self.h_up.is_infinite() {
            Err(Error::InfiniteBoundary)
        } else {
            Ok(())
        }
    }

    /// Each finite boundary must be strictly increasing; exact flats are witnesses,
    /// grid-level plateaus of other lifts are inconclusive.
    pub fn acausal_check(&self) -> AcausalVerdict {
        let mut arcs = Vec::new();
        for h in [&self.h_down, &self.h_up] {
            if h.is_infinite() {
                continue;
            }
            if let MonotoneLift::PiecewiseLinear(p) | MonotoneLift::CollapseStaircase(p) = h {
                if let Some(&(a, b, _)) = p.flats().iter().find(|f| f.1 > f.0) {
                    return AcausalVerdict::NotAcausal {
                        witness: CyclicInterval::new(a, b),
                    };
                }
            }
            let n = DEFAULT_GRID;
            let mut prev = h.apply(0.0);
            for i in 1..=n {
                let x = i as f64 / n as f64;
                let y = h.apply(x);
                if y <= prev {
                    arcs.push(CyclicInterval::new((i - 1) as f64 / n as f64, x));
                }
                prev = y;
            }
        }
        if arcs.is_empty() {
            AcausalVerdict::Acausal
        } else {
            AcausalVerdict::Inconclusive { arcs }
        }
    }

    /// `sup (h̃↑ − h̃↓) ≤ 1` on the grid.
    pub fn embeds_in_torus(&self) -> Result<TorusEmbedding> {
        self.finite()?;
        let (witness, sup) = grid(DEFAULT_GRID)
            .map(|x| (x, self.h_up.apply(x) - self.h_down.apply(x)))
            .fold((0.0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        Ok(TorusEmbedding {
            embeds: sup <= 1.0 + SLACK,
            witness,
            sup,
        })
    }

    pub fn boundary_maps(&self) -> Result<BoundaryMaps> {
        self.finite()?;
        let h_right = self.h_down.inverse()?;
        let h_left = self.h_up.inverse()?;
        let h_ra = h_right.compose(&self.h_up)?;
        Ok(BoundaryMaps { h_right, h_left, h_ra })
    }

    /// Worst cyclic defect of the four boundary intertwining relations.
    pub fn intertwining_defect(&self, pair: &IsometryPair) -> Result<f64> {
        let b = self.boundary_maps()?;
        let (r1, r2) = (&pair.f1, &pair.f2);
        let relations: [(&MonotoneLift, &MonotoneLift, &MonotoneLift); 4] = [
            (r2, &self.h_down, r1),
            (r2, &self.h_up, r1),
            (r1, &b.h_left, r2),
            (r1, &b.h_right, r2),
        ];
        let mut worst: f64 = 0.0;
        for x in grid(DEFAULT_GRID) {
            for (outer, h, inner) in relations {
                let lhs = outer.apply(h.apply(x));
                let rhs = h.apply(inner.apply(x));
                worst = worst.max(cyclic_dist(lhs, rhs));
            }
        }
        Ok(worst)
    }

    /// `(h̃↓, min(h̃↑, h̃↓ + 1))`; models that already embed are returned unchanged.
    pub fn reduce_to_torus(&self) -> Result<SurfaceModel> {
        if self.embeds_in_torus()?.embeds {
            return Ok(self.clone());
        }
        let shifted = MonotoneLift::rotation(1.0).compose(&self.h_down)?;
        Ok(SurfaceModel {
            h_down: self.h_down.clone(),
            h_up: MonotoneLift::min(&self.h_up, &shifted)?,
            level_k: self.level_k,
        })
    }

    /// Necessary conditions for a non-proper isometry action; any failure
    /// certifies that the action is proper.
    pub fn nonproper_necessary_check(&self) -> NonproperReport {
        if self.finite().is_err() {
            return NonproperReport {
                finite: false,
                sup_at_most_two: false,
                sup: None,
                inf_at_most_one: None,
                inf: None,
                witness: None,
                proper_certified: true,
            };
        }
        let widths: Vec<(f64, f64)> = grid(DEFAULT_GRID)
            .map(|x| (x, self.h_up.apply(x) - self.h_down.apply(x)))
            .collect();
        let sup = widths.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
        let (wx, inf) = widths
            .iter()
            .copied()
            .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        let sup_ok = sup <= 2.0 + SLACK;
        let acausal = self.acausal_check() == AcausalVerdict::Acausal;
        let inf_ok = acausal.then_some(inf <= 1.0 + SLACK);
        NonproperReport {
            finite: true,
            sup_at_most_two: sup_ok,
            sup: Some(sup),
            inf_at_most_one: inf_ok,
            inf: Some(inf),
            witness: inf_ok.filter(|&b| b).map(|_| wx),
            proper_certified: !sup_ok || inf_ok == Some(false),
        }
    }

    /// Search `x < fⁿ(x) < f(x)` for `f = h→↑`, `n ∈ ±[1, 64]`.
    pub fn invariant_graph_witness(&self) -> Result<WitnessOutcome> {
        let b = self.boundary_maps()?;
        let f = &b.h_ra;
        let f_inv = f.inverse()?;
        let n_grid = 512;
        let mut order: Vec<i32> = (2..=64).collect();
        order.extend((1..=64).map(|n| -n));
        // orbit tables fⁿ(x) for n in [-64, 64]
        let xs: Vec<f64> = grid(n_grid).collect();
        let mut fwd = vec![xs.clone()];
        let mut bwd = vec![xs.clone()];
        for i in 0..64 {
            fwd.push(fwd[i].iter().map(|&x| f.act(x)).collect());
            bwd.push(bwd[i].iter().map(|&x| f_inv.act(x)).collect());
        }
        for &n in &order {
            let table = if n > 0 { &fwd[n as usize] } else { &bwd[(-n) as usize] };
            let hit = xs
                .iter()
                .enumerate()
                .find(|&(i, &x)| strictly_between(x, table[i], fwd[1][i]));
            if let Some((_, &x)) = hit {
                if let Some(graph) = self.graph_inside(f, n) {
                    return Ok(WitnessOutcome::Found { n, x, graph });
                }
            }
        }
        let rho = rotation_number(f, 10_000)?;
        Ok(match rho.reciprocal() {
            Some(k) => WitnessOutcome::RotationIsOneOverK(k),
            None => WitnessOutcome::Inconclusive,
        })
    }

    /// Samples of `y ↦ fⁿ(h↓(y))`, if every sample lies strictly inside the model.
    fn graph_inside(&self, f: &MonotoneLift, n: i32) -> Option<Vec<(f64, f64)>> {
        let fn_ = f.power(n as i64).ok()?;
        let mut out = Vec::with_capacity(256);
        for y in grid(256) {
            let (lo, hi) = (self.h_down.act(y), self.h_up.act(y));
            let v = fn_.act(self.h_down.apply(y));
            if !strictly_between(lo, v, hi) {
                return None;
            }
            out.push((y, v));
        }
        Some(out)
    }

    /// Largest `α = j/4096` with `x < x + α < h→↑(x)` on the grid.
    pub fn spacelike_witness(&self) -> Result<f64> {
        let f = self.boundary_maps()?.h_ra;
        let n = DEFAULT_GRID;
        let min_disp = grid(n)
            .map(|x| {
                let d = f.apply(x) - x;
                d - d.ceil() + 1.0
            })
            .fold(f64::INFINITY, f64::min);
        let j = ((min_disp * n as f64).ceil() as i64 - 1).min(n as i64 - 1);
        if j < 1 {
            return Err(Error::NoWitness {
                grid: n,
                displacement: min_disp,
            });
        }
        Ok(j as f64 / n as f64)
    }
}
