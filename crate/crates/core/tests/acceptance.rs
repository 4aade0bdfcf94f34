//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use lcl_core::circle::{cyclic_dist, equal_rotation_point, grid, offset, rotation_number, semi_conjugacy_defect, wrap};
use lcl_core::conjugacy::{
    classify_pipeline, detect_elementary_case, hyperbolic_case_conjugacy, parabolic_case_conjugacy, CaseTag,
};
use lcl_core::convergence::{
    average_conjugacy, averaging_defect, collapse_map, collapsed_map, hk_convergence_test, order_k_commuter,
};
use lcl_core::desitter::{de_sitter, invariant_function, jacobian_defect, omega_h_model, rect_volume_theta};
use lcl_core::fixtures;
use lcl_core::moebius::parabolic_at;
use lcl_core::schottky::{commuting_homeo, default_seed, limit_set};
use lcl_core::surface::WitnessOutcome;
use lcl_core::{
    CertificateKind, ConformalFactor, ConjugacyReport, ConvergenceVerdict, GapSystem, GroupSpec, IsometryPair,
    MoebiusK, MonotoneLift, SurfaceModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

/// `R(a) diag(e^u, e^-u) R(b)` with moderate distortion.
fn random_moebius(rng: &mut ChaCha8Rng) -> MoebiusK {
    let rot = |t: f64| [t.cos(), -t.sin(), t.sin(), t.cos()];
    let mul = |p: [f64; 4], q: [f64; 4]| {
        [
            p[0] * q[0] + p[1] * q[2],
            p[0] * q[1] + p[1] * q[3],
            p[2] * q[0] + p[3] * q[2],
            p[2] * q[1] + p[3] * q[3],
        ]
    };
    let u = rng.gen_range(-1.0..1.0f64);
    let m = mul(
        mul(rot(rng.gen_range(0.0..PI)), [u.exp(), 0.0, 0.0, (-u).exp()]),
        rot(rng.gen_range(0.0..PI)),
    );
    MoebiusK::new(m, 1, 0).unwrap()
}

fn sorted_points(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        let spread_ok = v.windows(2).all(|w| w[1] - w[0] >= min_gap) && v[0] + 1.0 - v[n - 1] >= min_gap;
        if spread_ok {
            return v;
        }
    }
}

fn dist_sup(f: &MonotoneLift, g: &MonotoneLift, n: usize) -> f64 {
    grid(n).map(|x| cyclic_dist(f.apply(x), g.apply(x))).fold(0.0, f64::max)
}

fn c1_ds2_covers() -> Check {
    let mut worst = (0.0f64, 0.0f64);
    for k in 1..=4 {
        let b = ok(ok(omega_h_model(&MonotoneLift::identity(), k))?.boundary_maps())?;
        let d = grid(4096).map(|x| (b.h_right.apply(x) - x).abs()).fold(0.0, f64::max);
        let rho = ok(rotation_number(&b.h_ra, 20_000))?;
        ensure(d <= 1e-10, format!("k={k}: h_right defect {d:e}"))?;
        ensure(
            rho.contains(1.0 / k as f64),
            format!("k={k}: [{}, {}] misses 1/k", rho.lo, rho.hi),
        )?;
        ensure(rho.width() <= 2e-4, format!("k={k}: width {:e}", rho.width()))?;
        worst = (worst.0.max(d), worst.1.max(rho.width()));
    }
    Ok(format!("h_right defect {:.1e}, max width {:.1e}", worst.0, worst.1))
}

fn c2_cross_ratio_volume() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut inv, mut add) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = random_moebius(&mut rng);
        let p = sorted_points(&mut rng, 5, 0.03);
        let (a, m, b, c, d) = (p[0], p[1], p[2], p[3], p[4]);
        let v = ok(rect_volume_theta(a, b, c, d))?;
        let w = ok(rect_volume_theta(g.act(a), g.act(b), g.act(c), g.act(d)))?;
        inv = inv.max((v - w).abs());
        let split = ok(rect_volume_theta(a, m, c, d))? + ok(rect_volume_theta(m, b, c, d))?;
        add = add.max((v - split).abs());
    }
    ensure(
        inv <= 1e-9 && add <= 1e-9,
        format!("invariance {inv:e}, additivity {add:e}"),
    )?;
    Ok(format!("invariance {inv:.1e}, additivity {add:.1e}"))
}

fn c3_jacobian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let omega = ConformalFactor::de_sitter();
    let mut worst: f64 = 0.0;
    let mut pts = Vec::new();
    for _ in 0..50 {
        let t = rng.gen::<f64>();
        pts.push((t, t + rng.gen_range(0.05..0.95)));
    }
    let mut control: f64 = 0.0;
    for _ in 0..50 {
        let g = random_moebius(&mut rng);
        let pair = IsometryPair::diagonal(&g);
        for &p in &pts {
            worst = worst.max(ok(jacobian_defect(&pair, &omega, p))?);
        }
        let bent = ok(IsometryPair::new(g.lift(), MonotoneLift::identity()))?;
        let c = pts
            .iter()
            .map(|&p| jacobian_defect(&bent, &omega, p).unwrap_or(0.0))
            .fold(0.0, f64::max);
        control = control.max(c);
    }
    ensure(worst <= 1e-6, format!("relative defect {worst:e}"))?;
    ensure(control > 1e-2, format!("negative control {control:e}"))?;
    Ok(format!("relative defect {worst:.1e}, control {control:.2}"))
}

fn c4_invariant_function() -> Check {
    let sys = ok(limit_set(&fixtures::schottky_pair(1), 6))?;
    let data = sys.data().unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for _ in 0..1000 {
        let p = (rng.gen::<f64>(), rng.gen::<f64>());
        let s = ok(invariant_function(&sys, None, p))?;
        nonzero += (s != 0.0) as usize;
        for g in &data.generators {
            let t = ok(invariant_function(&sys, None, (g.act(p.0), g.act(p.1))))?;
            worst = worst.max((s - t).abs());
        }
    }
    let mut closed: f64 = 0.0;
    for &c in &sys.closed_set_sample {
        let phi = wrap(c + rng.gen_range(0.05..0.95));
        closed = closed.max(ok(invariant_function(&sys, None, (c, phi)))?.abs());
        closed = closed.max(ok(invariant_function(&sys, None, (phi, c)))?.abs());
    }
    ensure(worst <= 1e-6, format!("invariance {worst:e}"))?;
    ensure(closed == 0.0, format!("sigma on closed set {closed:e}"))?;
    ensure(nonzero > 0, "sigma vanishes identically".into())?;
    Ok(format!(
        "invariance {worst:.1e}, {nonzero}/1000 nonzero, sigma = 0 on {} closed-set points",
        sys.closed_set_sample.len()
    ))
}

fn c5_commuting_homeo() -> Check {
    let data = fixtures::schottky_pair(1);
    let sys = ok(limit_set(&data, 5))?;
    let seeds: Vec<_> = (0..sys.fundamental.len()).map(|i| default_seed(&sys, i).ok()).collect();
    let h = ok(commuting_homeo(&sys, &seeds))?;
    let moved = dist_sup(&h, &MonotoneLift::identity(), 4096);
    let mut worst: f64 = 0.0;
    for g in &data.generators {
        let d = grid(4096)
            .map(|x| cyclic_dist(g.act(h.apply(x)), h.act(g.act(x))))
            .fold(0.0, f64::max);
        worst = worst.max(d);
    }
    ensure(moved > 1e-3, format!("h is the identity (moves {moved:e})"))?;
    ensure(worst <= 1e-6, format!("commutation defect {worst:e}"))?;
    Ok(format!("commutation {worst:.1e}, |h - id| = {moved:.2e}"))
}

/// Fixed points of a level-1 matrix as circle angles `(attracting, repelling)`.
/// In the chart x = cot(pi theta) the eigenvector (x, 1) of the larger
/// eigenvalue attracts.
fn matrix_fixed_points(m: [f64; 4]) -> (f64, f64) {
    let [a, b, c, d] = m;
    let tr = a + d;
    let disc = (tr * tr - 4.0).sqrt();
    let angle = |x: f64| wrap((1.0 / x).atan() / PI);
    let fixed = |l: f64| -> f64 {
        if c.abs() > 1e-14 {
            angle((l - d) / c)
        } else if (l - a).abs() < 1e-12 {
            0.0
        } else {
            angle(b / (l - a))
        }
    };
    (fixed((tr + disc) / 2.0), fixed((tr - disc) / 2.0))
}

fn c6_convergence() -> Check {
    let k = 2;
    let g = fixtures::hyperbolic_at(0.0, k);
    let base = fixtures::hyperbolic_at(0.0, 1).matrix();
    let (att, rep) = matrix_fixed_points(base);
    let start = Instant::now();
    let f = g.lift();
    let seq: Vec<MonotoneLift> = ok((1..=40).map(|n| f.power(n)).collect::<Result<_, _>>())?;
    let verdict = ok(hk_convergence_test(&seq, &MonotoneLift::rotation(0.5), k, 4096))?;
    let elapsed = start.elapsed().as_secs_f64();
    let near = |x: f64, p: f64| {
        (0..k)
            .map(|j| cyclic_dist(x, (p + j as f64) / k as f64))
            .fold(1.0, f64::min)
    };
    let ConvergenceVerdict::Convergent { a, b, .. } = verdict else {
        return Err(format!("hyperbolic iterates: {verdict:?}"));
    };
    ensure(near(a, rep) <= 1e-3, format!("a = {a}, repelling {rep}"))?;
    ensure(near(b, att) <= 1e-3, format!("b = {b}, attracting {att}"))?;
    ensure(elapsed <= 1.0, format!("runtime {elapsed:.2}s"))?;
    for alpha in [0.3, (5f64.sqrt() - 1.0) / 2.0] {
        let r = MonotoneLift::rotation(alpha);
        let seq: Vec<MonotoneLift> = ok((1..=40).map(|n| r.power(n)).collect::<Result<_, _>>())?;
        let v = ok(hk_convergence_test(&seq, &MonotoneLift::identity(), 1, 4096))?;
        ensure(
            matches!(v, ConvergenceVerdict::Equicontinuous { .. }),
            format!("rotation {alpha}: {v:?}"),
        )?;
    }
    Ok(format!(
        "a err {:.1e}, b err {:.1e}, {elapsed:.3}s; rotations equicontinuous",
        near(a, rep),
        near(b, att)
    ))
}

fn generator_collapse_defect(data: &lcl_core::PingPongData, depth: usize) -> Result<(f64, f64, usize), String> {
    let sys = ok(limit_set(data, depth))?;
    let cd = ok(collapse_map(&sys))?;
    let gens: Vec<MonotoneLift> = data.generators.iter().map(MoebiusK::lift).collect();
    let hats: Vec<MonotoneLift> = ok(gens.iter().map(|g| collapsed_map(&cd, g)).collect::<Result<_, _>>())?;
    let d = ok(semi_conjugacy_defect(&cd.pi, &gens, &hats, 4096))?;
    Ok((d, cd.resolution, cd.flat_mismatch()))
}

fn c7_collapse() -> Check {
    let data = fixtures::schottky_pair(1);
    let mut defects = Vec::new();
    for depth in 4..=6 {
        let (d, res, mismatch) = generator_collapse_defect(&data, depth)?;
        ensure(
            mismatch == 0,
            format!("depth {depth}: {mismatch} flats off the gap list"),
        )?;
        defects.push((d, res));
    }
    let (d6, res6) = defects[2];
    ensure(d6 <= 2.0 * res6, format!("depth 6 defect {d6:e} > 2 x {res6:e}"))?;
    ensure(
        defects.windows(2).all(|w| w[1].0 < w[0].0),
        format!("not decreasing: {defects:?}"),
    )?;

    // Omega_h over a level-2 Schottky group, H the default commuting homeomorphism
    let data2 = fixtures::schottky_pair(2);
    let sys = ok(limit_set(&data2, 6))?;
    let seeds: Vec<_> = (0..sys.fundamental.len()).map(|i| default_seed(&sys, i).ok()).collect();
    let h = ok(commuting_homeo(&sys, &seeds))?;
    let model = ok(omega_h_model(&h, 2))?;
    let b = ok(model.boundary_maps())?;
    let cd = ok(collapse_map(&sys))?;
    let hat = |f: &MonotoneLift| ok(collapsed_map(&cd, f));
    let lhs = ok(hat(&b.h_ra)?.compose(&hat(&b.h_left)?))?;
    let comm = dist_sup(&lhs, &hat(&b.h_right)?, 4096);
    ensure(comm <= 1e-3, format!("collapsed commutation {comm:e}"))?;
    Ok(format!(
        "defects d4..d6 = {:.2e} > {:.2e} > {:.2e} (2 x res {:.2e}), flats exact, commutation {comm:.1e}",
        defects[0].0,
        defects[1].0,
        d6,
        2.0 * res6
    ))
}

/// Deck half-turn bent inside the base gaps, so it is not an involution.
fn bent_half_turn(sys: &GapSystem) -> Result<MonotoneLift, String> {
    let mut knots = Vec::new();
    for g in &sys.base_gaps {
        let (a, len) = (g.interval.a, g.interval.length());
        knots.extend([(a, a), (a + 0.5 * len, a + 0.3 * len), (a + len, a + len)]);
    }
    knots.sort_by(|p, q| wrap(p.0).total_cmp(&wrap(q.0)));
    knots.dedup_by(|p, q| cyclic_dist(p.0, q.0) < 1e-15);
    let bend = ok(MonotoneLift::piecewise_linear(&knots))?;
    ok(MonotoneLift::rotation(0.5).compose(&bend))
}

fn c8_commuter_and_averaging() -> Check {
    let sys = ok(limit_set(&fixtures::schottky_pair(2), 4))?;
    let h_ra = bent_half_turn(&sys)?;
    let before = dist_sup(&ok(h_ra.power(2))?, &MonotoneLift::identity(), 4096);
    let h = ok(order_k_commuter(&sys, &h_ra, 2))?;
    let order = dist_sup(&ok(h.power(2))?, &MonotoneLift::identity(), 4096);
    ensure(before > 1e-4, format!("h_ra already an involution ({before:e})"))?;
    ensure(order <= 1e-8, format!("|h^2 - id| = {order:e}"))?;
    let mut avg = ok(averaging_defect(&ok(average_conjugacy(&h, 2))?, &h, 2, 4096))?;
    // a conjugate of R_{1/3} by a smooth diffeomorphism
    let psi = MonotoneLift::from_fn("psi", lcl_core::circle::Strictness::Homeomorphism, |x| {
        x + 0.2 / (2.0 * PI) * (2.0 * PI * (x - 0.3)).sin()
    });
    let g = ok(MonotoneLift::chain(&[
        ok(psi.inverse())?,
        MonotoneLift::rotation(1.0 / 3.0),
        psi,
    ]))?;
    avg = avg.max(ok(averaging_defect(&ok(average_conjugacy(&g, 3))?, &g, 3, 4096))?);
    ensure(avg <= 1e-9, format!("averaging defect {avg:e}"))?;
    Ok(format!(
        "|h^2 - id| = {order:.1e} (h_ra: {before:.1e}), averaging {avg:.1e}"
    ))
}

fn diag(l: f64, k: u32) -> MoebiusK {
    MoebiusK::fixing_lift([l, 0.0, 0.0, 1.0 / l], k).unwrap()
}

/// Re-measure `sup |φ(g x) - γ_g(φ x)|` on a grid of a different size.
fn remeasure(rep: &ConjugacyReport, g: &GroupSpec, n: usize) -> Result<f64, String> {
    let phi = rep.phi.as_ref().ok_or("no phi")?;
    let mut worst: f64 = 0.0;
    for (gen, t) in g.generators.iter().zip(&rep.targets) {
        let gamma = ok(t.moebius())?;
        for x in grid(n) {
            worst = worst.max(cyclic_dist(phi.apply(gen.rho1.apply(x)), gamma.act(phi.apply(x))));
        }
    }
    Ok(worst)
}

fn c9_elementary() -> Check {
    let k = 2;
    let half = MoebiusK::center(k).lift();
    let start = Instant::now();
    let f1 = diag(4.0, k);
    let swap = ok(MoebiusK::center(k).compose(&MoebiusK::rotation_matrix(PI / 2.0, k, 0)))?;
    let mut hyp: f64 = 0.0;
    for gens in [vec![f1], vec![f1, swap]] {
        let g = GroupSpec::from_moebius(k, &gens);
        let case = ok(detect_elementary_case(&g, &half, k))?;
        ensure(
            case.tag == CaseTag::TwoPerFiber,
            format!("{} generators: {:?}", gens.len(), case.tag),
        )?;
        let rep = ok(hyperbolic_case_conjugacy(&g, &case, (0.05, 0.2), 10_000))?;
        ensure(
            rep.certificate_kind == CertificateKind::Conjugacy,
            format!("{:?}", rep.notes),
        )?;
        let d = rep.max_defect().max(remeasure(&rep, &g, 7919)?);
        ensure(d <= 1e-5, format!("{} generators: defect {d:e}", gens.len()))?;
        hyp = hyp.max(d);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed <= 30.0, format!("hyperbolic builds took {elapsed:.1}s"))?;
    let mut par: f64 = 0.0;
    for (p, kk) in [
        (parabolic_at(0.0, 3.0, false, 1), 1),
        (MoebiusK::fixing_lift([1.0, 1.0, 0.0, 1.0], 2).unwrap(), 2),
    ] {
        let g = GroupSpec::from_moebius(kk, &[p]);
        let case = ok(detect_elementary_case(&g, &MoebiusK::center(kk).lift(), kk))?;
        ensure(
            case.tag == CaseTag::OnePerFiber,
            format!("parabolic k={kk}: {:?}", case.tag),
        )?;
        let rep = ok(parabolic_case_conjugacy(&g, &case, 10_000))?;
        let d = rep.max_defect().max(remeasure(&rep, &g, 7919)?);
        ensure(d <= 1e-6, format!("parabolic k={kk}: defect {d:e}"))?;
        par = par.max(d);
    }
    Ok(format!("hyperbolic {hyp:.1e} ({elapsed:.1}s), parabolic {par:.1e}"))
}

fn c10_reduction_and_properness() -> Check {
    let pl = ok(MonotoneLift::piecewise_linear(&[(0.0, 0.0), (0.3, 0.5), (0.7, 0.8)]))?;
    let corpus = [
        de_sitter(1),
        de_sitter(3),
        ok(SurfaceModel::new(
            MonotoneLift::identity(),
            MonotoneLift::rotation(2.5),
            1,
        ))?,
        ok(SurfaceModel::new(
            pl.clone(),
            ok(MonotoneLift::rotation(1.7).compose(&pl))?,
            1,
        ))?,
        ok(SurfaceModel::new(
            MonotoneLift::identity(),
            MonotoneLift::rotation(0.4),
            1,
        ))?,
        fixtures::omega_h_cyclic().0,
    ];
    for (i, m) in corpus.iter().enumerate() {
        let r = ok(m.reduce_to_torus())?;
        ensure(
            ok(r.embeds_in_torus())?.embeds,
            format!("model {i}: reduction does not embed"),
        )?;
        let rr = ok(r.reduce_to_torus())?;
        let d = grid(4096)
            .map(|x| {
                (rr.h_up.apply(x) - r.h_up.apply(x))
                    .abs()
                    .max((rr.h_down.apply(x) - r.h_down.apply(x)).abs())
            })
            .fold(0.0, f64::max);
        ensure(d == 0.0, format!("model {i}: reduction moved by {d:e} on second pass"))?;
    }
    let ds = de_sitter(1).nonproper_necessary_check();
    ensure(
        ds.finite && ds.sup_at_most_two && ds.inf_at_most_one == Some(true),
        format!("dS2: {ds:?}"),
    )?;
    let flat = SurfaceModel::flat_cylinder().nonproper_necessary_check();
    ensure(!flat.finite, format!("flat cylinder: {flat:?}"))?;
    let wide = ok(SurfaceModel::new(
        pl.clone(),
        ok(MonotoneLift::rotation(2.5).compose(&pl))?,
        1,
    ))?
    .nonproper_necessary_check();
    ensure(
        !wide.sup_at_most_two && wide.proper_certified,
        format!("h_up = h_down + 2.5: {wide:?}"),
    )?;
    Ok(format!(
        "{} models reduce idempotently and embed; dS2 passes, cylinder and +2.5 strip fail",
        corpus.len()
    ))
}

fn c11_witness() -> Check {
    for k in 1..=4 {
        let w = ok(de_sitter(k).invariant_graph_witness())?;
        ensure(w == WitnessOutcome::RotationIsOneOverK(k), format!("k={k}: {w:?}"))?;
    }
    let mut found = Vec::new();
    for alpha in [0.4, (5f64.sqrt() - 1.0) / 2.0] {
        let m = ok(SurfaceModel::new(
            MonotoneLift::identity(),
            MonotoneLift::rotation(alpha),
            1,
        ))?;
        let WitnessOutcome::Found { n, graph, .. } = ok(m.invariant_graph_witness())? else {
            return Err(format!("rotation {alpha}: no graph"));
        };
        for &(y, v) in &graph {
            let (lo, hi) = (m.h_down.act(y), m.h_up.act(y));
            let t = offset(lo, v);
            ensure(
                t > 1e-9 && t < offset(lo, hi) - 1e-9,
                format!("rotation {alpha}: graph leaves the model at {y}"),
            )?;
        }
        found.push(n);
    }
    Ok(format!(
        "1/k for k = 1..4; interior graphs of h^{} and h^{}",
        found[0], found[1]
    ))
}

fn c12_equal_rotation_point() -> Check {
    let psi = ok(MonotoneLift::piecewise_linear(&[
        (0.0, 0.0),
        (0.3, 0.24),
        (0.6, 0.56),
        (0.8, 0.8),
    ]))?;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let corpus = [
        MonotoneLift::rotation(0.3),
        MonotoneLift::rotation(golden),
        fixtures::hyperbolic_at(0.1, 1).lift(),
        parabolic_at(0.2, 1.0, true, 1).lift(),
        MoebiusK::rotation_matrix(1.0, 1, 0).lift(),
        psi.clone(),
        ok(MonotoneLift::chain(&[
            psi.clone(),
            MonotoneLift::rotation(golden),
            ok(psi.inverse())?,
        ]))?,
        ok(MonotoneLift::chain(&[fixtures::hyperbolic_at(0.3, 2).lift(), psi]))?,
    ];
    let mut worst: f64 = 0.0;
    for (i, f) in corpus.iter().enumerate() {
        let (_, d) = ok(equal_rotation_point(f)).map_err(|e| format!("map {i}: {e}"))?;
        ensure(d <= 1e-8, format!("map {i}: defect {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("{} maps, max defect {worst:.1e}", corpus.len()))
}

fn c13_determinism() -> Check {
    let with_pingpong = |data: lcl_core::PingPongData| {
        let mut g = GroupSpec::from_moebius(data.k(), &data.generators);
        g.pingpong = Some(data);
        g
    };
    let (omega_h, a) = fixtures::omega_h_cyclic();
    let swap = ok(MoebiusK::center(2).compose(&MoebiusK::rotation_matrix(PI / 2.0, 2, 0)))?;
    let corpus: Vec<(&str, SurfaceModel, GroupSpec)> = vec![
        (
            "schottky on dS2 double cover",
            de_sitter(2),
            with_pingpong(fixtures::schottky_pair(2)),
        ),
        (
            "schottky on dS2",
            de_sitter(1),
            with_pingpong(fixtures::schottky_pair(1)),
        ),
        (
            "cyclic hyperbolic",
            de_sitter(1),
            with_pingpong(fixtures::cyclic_hyperbolic(1)),
        ),
        (
            "cyclic parabolic",
            de_sitter(1),
            with_pingpong(fixtures::cyclic_parabolic()),
        ),
        (
            "axis swap",
            de_sitter(2),
            GroupSpec::from_moebius(2, &[diag(4.0, 2), swap]),
        ),
        ("omega_h", omega_h, GroupSpec::from_moebius(1, &[a])),
        ("flat cylinder", SurfaceModel::flat_cylinder(), GroupSpec::default()),
        (
            "rotation 2/5",
            ok(SurfaceModel::new(
                MonotoneLift::identity(),
                MonotoneLift::rotation(0.4),
                1,
            ))?,
            GroupSpec::diagonal(1, [("r".to_string(), MonotoneLift::rotation(0.4))]),
        ),
    ];
    for (name, m, g) in &corpus {
        let run = || -> Result<String, String> { ok(serde_json::to_string(&ok(classify_pipeline(m, g, 2048, 0))?)) };
        let (x, y) = (run()?, run()?);
        ensure(x == y, format!("{name}: reports differ"))?;
    }
    Ok(format!("{} fixtures byte-identical", corpus.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("dS2 covers", c1_ds2_covers),
        ("cross-ratio volume", c2_cross_ratio_volume),
        ("isometry Jacobian identity", c3_jacobian),
        ("invariant function", c4_invariant_function),
        ("commuting homeomorphism", c5_commuting_homeo),
        ("convergence dynamics", c6_convergence),
        ("collapse", c7_collapse),
        ("order-k commuter and averaging", c8_commuter_and_averaging),
        ("elementary conjugacies", c9_elementary),
        ("reduction and properness screens", c10_reduction_and_properness),
        ("rotation-number witness dichotomy", c11_witness),
        ("equal rotation point", c12_equal_rotation_point),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2}s]", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
