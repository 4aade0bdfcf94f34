//! Small reference groups and models shared by tests, benches and the CLI.

use crate::circle::CyclicInterval;
use crate::desitter::omega_h_model;
use crate::moebius::{one_param, parabolic_at, MoebiusK};
use crate::schottky::{commuting_homeo, default_seed, limit_set, GapSystem, PingPongData};
use crate::surface::SurfaceModel;

/// Half-width of each ping-pong arc at level 1.
pub const ARC_HALF_WIDTH: f64 = 0.1;
/// Expansion factor of the reference hyperbolic generators.
pub const MULTIPLIER: f64 = 16.0;

fn arcs_around(center: f64, k: u32) -> Vec<CyclicInterval> {
    let kf = k as f64;
    (0..k)
        .map(|j| {
            let c = (center + j as f64) / kf;
            CyclicInterval::new(c - ARC_HALF_WIDTH / kf, c + ARC_HALF_WIDTH / kf)
        })
        .collect()
}

/// Hyperbolic element attracting towards the points over `x0`, repelling from those over `x0 + 1/2`.
pub fn hyperbolic_at(x0: f64, k: u32) -> MoebiusK {
    let kf = k as f64;
    one_param(x0 / kf, (x0 + 0.5) / kf, 1.0 / MULTIPLIER, k)
        .expect("distinct axis endpoints")
        .at(1.0)
}

/// `⟨a⟩` with `a` attracting at `0`.
pub fn cyclic_hyperbolic(k: u32) -> PingPongData {
    PingPongData::new(
        vec![hyperbolic_at(0.0, k)],
        vec![arcs_around(0.0, k)],
        vec![arcs_around(0.5, k)],
    )
    .expect("reference ping-pong data")
}

/// `⟨p⟩` with `p` parabolic at `0`.
pub fn cyclic_parabolic() -> PingPongData {
    let p = parabolic_at(0.0, 3.0, false, 1);
    PingPongData::new(
        vec![p],
        vec![vec![CyclicInterval::new(0.0, 0.25)]],
        vec![vec![CyclicInterval::new(0.75, 0.0)]],
    )
    .expect("reference parabolic ping-pong data")
}

/// Free group `⟨a, b⟩` with `b = R_{1/4} a R_{-1/4}`: a one-holed torus group at level 1.
pub fn schottky_pair(k: u32) -> PingPongData {
    PingPongData::new(
        vec![hyperbolic_at(0.0, k), hyperbolic_at(0.25, k)],
        vec![arcs_around(0.0, k), arcs_around(0.25, k)],
        vec![arcs_around(0.5, k), arcs_around(0.75, k)],
    )
    .expect("reference Schottky data")
}

/// Gaps of the middle-thirds Cantor set down to `depth` levels, without group data.
pub fn middle_thirds(depth: usize) -> GapSystem {
    let mut gaps = Vec::new();
    let mut cells = vec![(0.0, 1.0)];
    for level in 0..depth {
        let mut next = Vec::with_capacity(2 * cells.len());
        for (a, b) in cells {
            let t = (b - a) / 3.0;
            gaps.push((CyclicInterval::new(a + t, b - t), level));
            next.push((a, a + t));
            next.push((b - t, b));
        }
        cells = next;
    }
    GapSystem::from_gaps(gaps, 1)
}

/// Ω_h at level 1 over `⟨a⟩`, with `H` the default commuting homeomorphism of its limit set.
pub fn omega_h_cyclic() -> (SurfaceModel, MoebiusK) {
    let data = cyclic_hyperbolic(1);
    let sys = limit_set(&data, 2).expect("reference limit set");
    let seeds: Vec<_> = (0..sys.fundamental.len()).map(|i| default_seed(&sys, i).ok()).collect();
    let h = commuting_homeo(&sys, &seeds).expect("reference commuting homeomorphism");
    (omega_h_model(&h, 1).expect("normalized"), data.generators[0])
}
