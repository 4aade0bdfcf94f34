//! (h, k)-convergence of sequences, the Cantor collapse, and the tools that
//! turn an order-k commuter into a conjugacy to a rotation.

mod collapse;
mod commuter;

pub use collapse::{collapse_map, collapsed_map, CollapseData};
pub use commuter::{
    average_conjugacy, averaging_defect, finite_orbit_match, order_k_commuter, order_k_commuter_orbitwise, OrbitSet,
};

use serde::Serialize;

use crate::circle::{cyclic_dist, cyclic_less, grid, rotation_number, wrap, CyclicInterval, MonotoneLift};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ConvergenceVerdict {
    Convergent {
        a: f64,
        b: f64,
        k: u32,
    },
    Equicontinuous {
        modulus: f64,
    },
    Inconclusive {
        reason: String,
        interval: Option<CyclicInterval>,
    },
}

/// Largest image distance of neighbouring grid points over the sequence.
pub fn equicontinuity_modulus(seq: &[MonotoneLift], n: usize) -> f64 {
    let n = n.max(1);
    let mut worst: f64 = 0.0;
    for f in seq {
        let mut prev = f.apply(0.0);
        for i in 1..=n {
            let y = f.apply(i as f64 / n as f64);
            worst = worst.max(cyclic_dist(prev, y));
            prev = y;
        }
    }
    worst
}

const CLUSTER: f64 = 1e-3;
const EXCLUSION: f64 = 1e-2;

fn check_preconditions(seq: &[MonotoneLift], h: &MonotoneLift, k: u32, n: usize) -> Result<()> {
    for f in seq {
        let defect = grid(n)
            .map(|x| cyclic_dist(f.apply(h.apply(x)), h.apply(f.apply(x))))
            .fold(0.0, f64::max);
        if defect > 1e-6 {
            return Err(Error::CommutationViolation { defect });
        }
    }
    let rho = rotation_number(h, 10_000)?;
    if !rho.contains(1.0 / k as f64) {
        return Err(Error::RotationMismatch {
            k,
            lo: rho.lo,
            hi: rho.hi,
        });
    }
    Ok(())
}

/// Orbit `a, h(a), …, h^{k−1}(a)`.
fn orbit(h: &MonotoneLift, a: f64, k: u32) -> Vec<f64> {
    let mut out = vec![wrap(a)];
    for _ in 1..k {
        out.push(h.act(*out.last().unwrap()));
    }
    out
}

/// Points where the last map jumps across the circle: repelling candidates.
fn repelling_point(f: &MonotoneLift, n: usize, k: u32) -> Option<f64> {
    let jump = 0.5 / k as f64;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f.apply(x)).collect();
    let i = (0..n).max_by(|&i, &j| (ys[i + 1] - ys[i]).total_cmp(&(ys[j + 1] - ys[j])))?;
    if ys[i + 1] - ys[i] < jump {
        return None;
    }
    let target = 0.5 * (ys[i] + ys[i + 1]);
    let (mut lo, mut hi) = (xs[i], xs[i + 1]);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.apply(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(wrap(0.5 * (lo + hi)))
}

/// Checks `f(x) → hⁱ(b)` on `]hⁱ(a), hⁱ⁺¹(a)[` for the tail half of the sequence.
fn verify_pattern(
    seq: &[MonotoneLift],
    h: &MonotoneLift,
    a: f64,
    b: f64,
    k: u32,
    n: usize,
) -> std::result::Result<(), (String, CyclicInterval)> {
    let a_orbit = orbit(h, a, k);
    let b_orbit = orbit(h, b, k);
    let ka = h.power(k as i64).map(|p| p.act(a)).unwrap_or(a);
    let kb = h.power(k as i64).map(|p| p.act(b)).unwrap_or(b);
    if cyclic_dist(ka, a) > 1e-6 || cyclic_dist(kb, b) > 1e-6 {
        return Err(("a or b not h^k-periodic".into(), CyclicInterval::new(a, a)));
    }
    let tail = &seq[seq.len() / 2..];
    for i in 0..k as usize {
        let iv = CyclicInterval::new(a_orbit[i], a_orbit[(i + 1) % k as usize]);
        let iv = if k == 1 { CyclicInterval::new(a, a) } else { iv };
        for x in grid(n) {
            if !iv.contains(x) || a_orbit.iter().any(|&p| cyclic_dist(p, x) < EXCLUSION) {
                continue;
            }
            for f in tail {
                if cyclic_dist(f.apply(x), b_orbit[i]) > CLUSTER {
                    return Err((format!("no convergence to h^{i}(b) near x = {x}"), iv));
                }
            }
        }
    }
    Ok(())
}

pub fn hk_convergence_test(seq: &[MonotoneLift], h: &MonotoneLift, k: u32, n: usize) -> Result<ConvergenceVerdict> {
    if seq.is_empty() {
        return Err(Error::SizeMismatch(0, 1));
    }
    let k = k.max(1);
    check_preconditions(seq, h, k, n)?;
    let modulus = equicontinuity_modulus(seq, n);
    if modulus <= 4.0 / n as f64 {
        return Ok(ConvergenceVerdict::Equicontinuous { modulus });
    }
    let last = seq.last().unwrap();
    let Some(a) = repelling_point(last, 8 * n, k) else {
        return Ok(ConvergenceVerdict::Inconclusive {
            reason: "no concentration jump in the last map".into(),
            interval: None,
        });
    };
    // b is the image of the middle of ]a, h(a)[, then confirmed as a mode
    let ha = if k == 1 {
        a + 1.0
    } else {
        a + crate::circle::offset(a, h.act(a))
    };
    let b = last.act(0.5 * (a + ha));
    let mass = grid(n).filter(|&x| cyclic_dist(last.apply(x), b) <= CLUSTER).count();
    if mass * k as usize * 2 < n {
        return Ok(ConvergenceVerdict::Inconclusive {
            reason: format!("image cluster at {b} holds {mass} of {n} points"),
            interval: None,
        });
    }
    Ok(match verify_pattern(seq, h, a, b, k, n) {
        Ok(()) => ConvergenceVerdict::Convergent { a, b, k },
        Err((reason, iv)) => ConvergenceVerdict::Inconclusive {
            reason,
            interval: Some(iv),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplifyReport {
    pub k: u32,
    pub verified: bool,
    pub diagnostics: Option<String>,
}

/// Re-derives `k` from `ρ(h)` and re-verifies the full pattern from one interval's data.
pub fn simplify_check(seq: &[MonotoneLift], h: &MonotoneLift, a: f64, b: f64, n: usize) -> Result<SimplifyReport> {
    let k = rotation_number(h, 10_000)?
        .reciprocal()
        .ok_or(Error::RotationNotReciprocal)?;
    Ok(match verify_pattern(seq, h, a, b, k, n) {
        Ok(()) => SimplifyReport {
            k,
            verified: true,
            diagnostics: None,
        },
        Err((reason, _)) => SimplifyReport {
            k,
            verified: false,
            diagnostics: Some(reason),
        },
    })
}

/// Whether `x` lies strictly between consecutive orbit points; used by callers
/// that split the circle along an h-orbit.
pub fn in_orbit_interval(x: f64, start: f64, end: f64) -> bool {
    cyclic_less(start, x, end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::moebius::MoebiusK;
    use proptest::prelude::*;
    use std::time::Instant;

    fn powers(g: &MoebiusK, n: usize) -> Vec<MonotoneLift> {
        (1..=n as i64).map(|i| g.power(i).lift()).collect()
    }

    #[test]
    fn modulus_examples() {
        let rots: Vec<_> = (1..10).map(|i| MonotoneLift::rotation(1.0 / i as f64)).collect();
        assert!((equicontinuity_modulus(&rots, 1024) - 1.0 / 1024.0).abs() < 1e-12);
        let g = fixtures::hyperbolic_at(0.0, 1);
        assert!(equicontinuity_modulus(&powers(&g, 30), 1024) > 0.4);
    }

    #[test]
    fn level_one_north_south() {
        let g = fixtures::hyperbolic_at(0.0, 1);
        let v = hk_convergence_test(&powers(&g, 40), &MonotoneLift::identity(), 1, 4096).unwrap();
        match v {
            ConvergenceVerdict::Convergent { a, b, k } => {
                assert_eq!(k, 1);
                assert!(cyclic_dist(a, 0.5) < 1e-3 && cyclic_dist(b, 0.0) < 1e-3, "{a} {b}");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn level_two_convergence() {
        let start = Instant::now();
        let g = fixtures::hyperbolic_at(0.0, 2);
        let h = MoebiusK::center(2).lift();
        let seq = powers(&g, 40);
        let v = hk_convergence_test(&seq, &h, 2, 4096).unwrap();
        let ConvergenceVerdict::Convergent { a, b, k } = v else {
            panic!("{v:?}")
        };
        assert_eq!(k, 2);
        let near = |x: f64, pts: &[f64]| pts.iter().any(|&p| cyclic_dist(x, p) < 1e-3);
        assert!(near(a, &[0.25, 0.75]) && near(b, &[0.0, 0.5]));
        let r = simplify_check(&seq, &h, a, b, 1024).unwrap();
        assert_eq!((r.k, r.verified), (2, true));
        let mut sabotaged = seq.clone();
        *sabotaged.last_mut().unwrap() = MonotoneLift::rotation(0.5);
        assert!(!simplify_check(&sabotaged, &h, a, b, 1024).unwrap().verified);
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }

    #[test]
    fn rotations_are_equicontinuous() {
        let rots: Vec<_> = (1..=20).map(|i| MonotoneLift::rotation(1.0 / i as f64)).collect();
        assert!(matches!(
            hk_convergence_test(&rots, &MonotoneLift::identity(), 1, 4096).unwrap(),
            ConvergenceVerdict::Equicontinuous { .. }
        ));
    }

    #[test]
    fn precondition_errors() {
        let g = fixtures::hyperbolic_at(0.0, 1);
        let h = MonotoneLift::rotation(0.5);
        assert!(matches!(
            hk_convergence_test(&powers(&g, 3), &h, 2, 256),
            Err(Error::CommutationViolation { .. })
        ));
        let rots = vec![MonotoneLift::rotation(0.1)];
        assert!(matches!(
            hk_convergence_test(&rots, &h, 3, 256),
            Err(Error::RotationMismatch { .. })
        ));
        assert_eq!(
            simplify_check(&rots, &MonotoneLift::rotation(0.4), 0.0, 0.0, 64),
            Err(Error::RotationNotReciprocal)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn moebius_sequences_never_inconclusive(x0 in 0.0f64..1.0, gap in 0.1f64..0.9, mu in 4.0f64..40.0, k in 1u32..=3) {
            let kf = k as f64;
            let g = crate::moebius::one_param(x0 / kf, (x0 + gap) / kf, 1.0 / mu, k).unwrap().at(1.0);
            let h = MoebiusK::center(k).lift();
            let v = hk_convergence_test(&powers(&g, 40), &h, k, 2048).unwrap();
            prop_assert!(matches!(v, ConvergenceVerdict::Convergent { .. }), "{:?}", v);
        }
    }
}
