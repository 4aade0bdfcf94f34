use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcl_core::circle::{cyclic_dist, grid, rotation_number, semi_conjugacy_defect, RotationNumber, DEFAULT_GRID};
use lcl_core::conjugacy::{
    classify_pipeline, detect_elementary_case, elliptic_verdict, hyperbolic_case_conjugacy, parabolic_case_conjugacy,
    CaseTag,
};
use lcl_core::convergence::{collapse_map, collapsed_map, hk_convergence_test};
use lcl_core::desitter::{de_sitter, invariant_function, jacobian_defect, omega_h_model};
use lcl_core::schottky::{commuting_homeo, default_seed, is_elementary, limit_set};
use lcl_core::surface::AcausalVerdict;
use lcl_core::{
    CertificateKind, ConformalFactor, ConjugacyReport, ConvergenceVerdict, GapSystem, IsometryPair, MonotoneLift,
    SurfaceModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::files::{GroupFile, MapSpec, ModelFile};
use crate::{plot, read_file, read_inline, CliError, Outcome, Table};

#[derive(Parser, Debug)]
#[command(
    name = "lcl",
    version,
    about = "Circle-bundle dynamics: models, limit sets and conjugacy certificates"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Sample count for grid-based checks.
    #[arg(long, global = true, env = "LCL_GRID", default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Tolerance for pass/fail verdicts; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rotation-number enclosure of a map.
    RotNum {
        /// MapSpec JSON, or @file.
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
    },
    /// Acausality, torus embedding and properness screens of a model.
    ModelCheck {
        #[arg(long)]
        model: PathBuf,
    },
    /// Replace the future boundary by min(h_up, h_down + 1).
    ModelReduce {
        #[arg(long)]
        model: PathBuf,
    },
    /// The boundary maps h_right, h_left and h_ra.
    BoundaryMaps {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        iters: usize,
    },
    /// The model with past boundary H and future boundary x + 1/k.
    OmegaBuild {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Gaps of the limit set of a ping-pong group.
    LimitSet {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// A homeomorphism commuting with the group, built from default seeds.
    CommutingHomeo {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Generator invariance of the corner-rectangle function sigma.
    InvariantFn {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Isometry Jacobian identity of each generator pair on the k-fold cover of dS2.
    JacobianCheck {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// (h,k)-convergence of the iterates g, g^2, ..., g^iters.
    ConvergenceTest {
        #[arg(long)]
        map: String,
        /// Commuter h; the deck rotation by 1/k when omitted.
        #[arg(long)]
        h: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 40)]
        iters: usize,
    },
    /// Devil's-staircase collapse of a limit set (middle thirds without a group).
    Collapse {
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Elementary-case conjugacy to a PSL_k action.
    Conjugacy {
        #[arg(long)]
        group: PathBuf,
        /// Model supplying h_ra; the k-fold dS2 cover when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Target fixed points `x0,y0` for the hyperbolic case.
        #[arg(long, value_parser = parse_pair)]
        targets: Option<(f64, f64)>,
    },
    /// Full classification of a group acting on a model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        group: PathBuf,
    },
    /// Plot data as CSV: boundary-graphs, limit-set-arcs, orbit-trace, convergence-heatmap, collapse-staircase.
    EmitPlot {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 40)]
        iters: usize,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x0,y0")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

pub fn load_model(path: &Path) -> Result<SurfaceModel, CliError> {
    ModelFile::parse(&read_file(path)?)?.to_model()
}

pub fn load_group(path: &Path) -> Result<GroupFile, CliError> {
    GroupFile::parse(&read_file(path)?)
}

pub fn load_map(arg: &str) -> Result<MonotoneLift, CliError> {
    MapSpec::parse(&read_inline(arg)?)?.to_lift()
}

pub fn group_limit_set(g: &GroupFile, depth: usize) -> Result<GapSystem, CliError> {
    let data = g
        .pingpong_data()?
        .ok_or(CliError::Missing("group has no pingpong data"))?;
    Ok(limit_set(&data, depth)?)
}

fn rotation_json(r: &RotationNumber) -> Value {
    json!({
        "lo": r.lo,
        "hi": r.hi,
        "width": r.width(),
        "lift_mean": r.lift_mean,
        "n_iter": r.n_iter,
        "rational": r.rational.map(|q| format!("{}/{}", q.p, q.q)),
        "has_fixed_point": r.has_fixed_point,
    })
}

fn sample_table(name: &str, f: &MonotoneLift, n: usize) -> Table {
    let mut t = Table::new(&["x", name]);
    for x in grid(n) {
        t.push_floats(&[x, f.apply(x)]);
    }
    t
}

fn commutation_defect(f: &MonotoneLift, g: &MonotoneLift, n: usize) -> f64 {
    grid(n)
        .map(|x| cyclic_dist(f.apply(g.apply(x)), g.apply(f.apply(x))))
        .fold(0.0, f64::max)
}

fn conjugacy_outcome(rep: &ConjugacyReport, n: usize) -> Result<Outcome, CliError> {
    let negative = rep.certificate_kind == CertificateKind::SemiConjugacy;
    let mut out = Outcome::report(serde_json::to_value(rep)?).negative_if(negative);
    if let Some(phi) = &rep.phi {
        out = out.with_table(sample_table("phi", phi, n));
    }
    Ok(out)
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    let n = c.grid.max(1);
    match &cli.command {
        Command::RotNum { map, iters } => {
            let r = rotation_number(&load_map(map)?, *iters)?;
            Ok(Outcome::report(rotation_json(&r)))
        }
        Command::ModelCheck { model } => {
            let m = load_model(model)?;
            let acausal = m.acausal_check();
            let negative = matches!(acausal, AcausalVerdict::NotAcausal { .. });
            let embedding = match m.embeds_in_torus() {
                Ok(e) => serde_json::to_value(e)?,
                Err(lcl_core::Error::InfiniteBoundary) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            Ok(Outcome::report(json!({
                "grid": DEFAULT_GRID,
                "level_k": m.level_k,
                "acausal": acausal,
                "embedding": embedding,
                "properness": m.nonproper_necessary_check(),
            }))
            .negative_if(negative))
        }
        Command::ModelReduce { model } => {
            let m = load_model(model)?.reduce_to_torus()?;
            Ok(Outcome::report(serde_json::from_str(
                &ModelFile::from_model(&m)?.to_canonical(),
            )?))
        }
        Command::BoundaryMaps { model, iters } => {
            let m = load_model(model)?;
            let b = m.boundary_maps()?;
            let id = MonotoneLift::identity();
            let deck = MonotoneLift::rotation(1.0 / m.level_k as f64);
            let rho = rotation_number(&b.h_ra, *iters)?;
            let mut t = Table::new(&["x", "h_right", "h_left", "h_ra"]);
            for x in grid(n) {
                t.push_floats(&[x, b.h_right.apply(x), b.h_left.apply(x), b.h_ra.apply(x)]);
            }
            Ok(Outcome::report(json!({
                "grid": n,
                "level_k": m.level_k,
                "h_right": { "identity_defect": b.h_right.circle_distance(&id, n) },
                "h_left": { "identity_defect": b.h_left.circle_distance(&id, n) },
                "h_ra": {
                    "rotation": rotation_json(&rho),
                    "deck_rotation_defect": b.h_ra.circle_distance(&deck, n),
                    "contains_one_over_k": rho.contains(1.0 / m.level_k as f64),
                },
            }))
            .with_table(t))
        }
        Command::OmegaBuild { map, k } => {
            let m = omega_h_model(&load_map(map)?, *k)?;
            Ok(Outcome::report(serde_json::from_str(
                &ModelFile::from_model(&m)?.to_canonical(),
            )?))
        }
        Command::LimitSet { group, depth } => {
            let sys = group_limit_set(&load_group(group)?, *depth)?;
            let mut t = Table::new(&["a", "b", "level", "fundamental"]);
            for g in &sys.gaps {
                t.rows.push(vec![
                    crate::num(g.interval.a),
                    crate::num(g.interval.b),
                    g.level.to_string(),
                    g.fundamental.to_string(),
                ]);
            }
            Ok(Outcome::report(json!({
                "depth": sys.depth,
                "level_k": sys.level_k,
                "elementary": is_elementary(&sys),
                "gap_count": sys.gaps.len(),
                "gaps": sys.gaps,
                "fundamental": sys.fundamental,
                "closed_set_samples": sys.closed_set_sample.len(),
            }))
            .with_table(t))
        }
        Command::CommutingHomeo { group, depth } => {
            let gf = load_group(group)?;
            let sys = group_limit_set(&gf, *depth)?;
            let seeds: Vec<Option<MonotoneLift>> =
                (0..sys.fundamental.len()).map(|i| default_seed(&sys, i).ok()).collect();
            let h = commuting_homeo(&sys, &seeds)?;
            let tol = c.tol.unwrap_or(1e-6);
            let g = gf.to_group()?;
            let defects: Vec<Value> = g
                .generators
                .iter()
                .map(
                    |gen| json!({ "name": gen.name, "defect": commutation_defect(&gen.rho1, &h, n), "tolerance": tol }),
                )
                .collect();
            let worst = defects.iter().filter_map(|d| d["defect"].as_f64()).fold(0.0, f64::max);
            let identity_distance = h.circle_distance(&MonotoneLift::identity(), n);
            Ok(Outcome::report(json!({
                "grid": n,
                "depth": sys.depth,
                "defects": defects,
                "identity_distance": identity_distance,
            }))
            .with_table(sample_table("h", &h, n))
            .negative_if(worst > tol || identity_distance == 0.0))
        }
        Command::InvariantFn { group, depth, points } => {
            let sys = group_limit_set(&load_group(group)?, *depth)?;
            let data = sys
                .data()
                .cloned()
                .ok_or(CliError::Missing("group has no pingpong data"))?;
            let tol = c.tol.unwrap_or(1e-6);
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let mut worst = vec![0.0f64; data.generators.len()];
            let mut nonzero = 0;
            for _ in 0..*points {
                let p = (rng.gen::<f64>(), rng.gen::<f64>());
                let Ok(s) = invariant_function(&sys, None, p) else {
                    continue;
                };
                nonzero += (s != 0.0) as usize;
                for (w, g) in worst.iter_mut().zip(&data.generators) {
                    if let Ok(t) = invariant_function(&sys, None, (g.act(p.0), g.act(p.1))) {
                        *w = w.max((s - t).abs());
                    }
                }
            }
            let closed = sys
                .closed_set_sample
                .iter()
                .map(|&x| {
                    invariant_function(&sys, None, (x, x + 0.5))
                        .map(f64::abs)
                        .unwrap_or(0.0)
                })
                .fold(0.0, f64::max);
            let defects: Vec<Value> = worst
                .iter()
                .enumerate()
                .map(|(i, d)| json!({ "name": format!("g{i}"), "defect": d, "tolerance": tol }))
                .collect();
            let negative = worst.iter().any(|&d| d > tol) || closed != 0.0;
            Ok(Outcome::report(json!({
                "depth": sys.depth,
                "points": points,
                "seed": c.seed,
                "defects": defects,
                "nonzero_samples": nonzero,
                "closed_set_max": closed,
                "closed_set_grid": sys.closed_set_sample.len(),
            }))
            .negative_if(negative))
        }
        Command::JacobianCheck { group, points } => {
            let g = load_group(group)?.to_group()?;
            let k = g.level_k.max(1) as f64;
            let omega = ConformalFactor::de_sitter_cover(g.level_k);
            let tol = c.tol.unwrap_or(1e-6);
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let pts: Vec<(f64, f64)> = (0..*points)
                .map(|_| {
                    let t = rng.gen::<f64>();
                    (t, t + rng.gen_range(0.05..0.95) / k)
                })
                .collect();
            let mut defects = Vec::new();
            let mut negative = false;
            for gen in &g.generators {
                let pair = IsometryPair::new(gen.rho1.clone(), gen.rho2.clone())?;
                let mut worst: f64 = 0.0;
                for &p in &pts {
                    worst = worst.max(jacobian_defect(&pair, &omega, p)?);
                }
                negative |= worst > tol;
                defects.push(json!({ "name": gen.name, "defect": worst, "tolerance": tol }));
            }
            Ok(Outcome::report(json!({ "points": points, "seed": c.seed, "defects": defects })).negative_if(negative))
        }
        Command::ConvergenceTest { map, h, k, iters } => {
            let g = load_map(map)?;
            let h = match h {
                Some(s) => load_map(s)?,
                None => MonotoneLift::rotation(1.0 / (*k).max(1) as f64),
            };
            let seq = (1..=*iters as i64).map(|p| g.power(p)).collect::<Result<Vec<_>, _>>()?;
            let verdict = hk_convergence_test(&seq, &h, *k, n)?;
            let negative = matches!(verdict, ConvergenceVerdict::Inconclusive { .. });
            Ok(Outcome::report(json!({ "grid": n, "iters": iters, "k": k, "verdict": verdict })).negative_if(negative))
        }
        Command::Collapse { group, depth } => {
            let (sys, gens) = match group {
                Some(p) => {
                    let g = load_group(p)?;
                    let sys = group_limit_set(&g, *depth)?;
                    let gens: Vec<(String, MonotoneLift)> = g
                        .to_group()?
                        .generators
                        .into_iter()
                        .map(|gen| (gen.name, gen.rho1))
                        .collect();
                    (sys, gens)
                }
                None => (lcl_core::fixtures::middle_thirds(*depth), Vec::new()),
            };
            let cd = collapse_map(&sys)?;
            let tol = c.tol.unwrap_or(2.0 * cd.resolution);
            let mut defects = Vec::new();
            let mut negative = cd.flat_mismatch() != 0;
            for (name, f) in &gens {
                let hat = collapsed_map(&cd, f)?;
                let d = semi_conjugacy_defect(&cd.pi, std::slice::from_ref(f), std::slice::from_ref(&hat), n)?;
                negative |= d > tol;
                defects.push(json!({ "name": name, "defect": d, "tolerance": tol }));
            }
            Ok(Outcome::report(json!({
                "grid": n,
                "depth": cd.depth,
                "gap_count": sys.gaps.len(),
                "resolution": cd.resolution,
                "flat_mismatch": cd.flat_mismatch(),
                "defects": defects,
            }))
            .with_table(sample_table("pi", &cd.pi, n))
            .negative_if(negative))
        }
        Command::Conjugacy { group, model, targets } => {
            let gf = load_group(group)?;
            let g = gf.to_group()?;
            let k = gf.level_k.max(1);
            let m = match model {
                Some(p) => load_model(p)?,
                None => de_sitter(k),
            };
            let h_ra = m.boundary_maps()?.h_ra;
            let case = detect_elementary_case(&g, &h_ra, k)?;
            let rep = match case.tag {
                CaseTag::ManyPoints => {
                    let cert = elliptic_verdict(&g, &case, 6)?;
                    let mut rep = ConjugacyReport::new(k, CertificateKind::CompactGroup, n);
                    rep.compact = Some(cert);
                    rep.case = Some(case);
                    rep
                }
                CaseTag::TwoPerFiber => {
                    let t = targets.unwrap_or((case.points[0], case.points[1]));
                    hyperbolic_case_conjugacy(&g, &case, t, n)?
                }
                CaseTag::OnePerFiber => parabolic_case_conjugacy(&g, &case, n)?,
            };
            conjugacy_outcome(&rep, n)
        }
        Command::Classify { model, group } => {
            let m = load_model(model)?;
            let g = load_group(group)?.to_group()?;
            let rep = classify_pipeline(&m, &g, n, c.seed)?;
            let mut out = conjugacy_outcome(&rep, n)?;
            out.negative = false;
            Ok(out)
        }
        Command::EmitPlot {
            kind,
            model,
            group,
            map,
            depth,
            iters,
            x0,
        } => {
            let inputs = plot::PlotInputs {
                model: model.as_deref().map(load_model).transpose()?,
                group: group.as_deref().map(load_group).transpose()?,
                map: map.as_deref().map(load_map).transpose()?,
                depth: *depth,
                iters: *iters,
                x0: *x0,
                grid: n,
            };
            let t = plot::emit_plot(kind, &inputs)?;
            let mut out = Outcome::report(Value::Null).with_table(t);
            out.csv_only = true;
            Ok(out)
        }
    }
}
