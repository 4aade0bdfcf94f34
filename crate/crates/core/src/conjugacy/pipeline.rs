use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    detect_elementary_case, elliptic_verdict, hyperbolic_case_conjugacy, parabolic_case_conjugacy, CaseTag,
    CertificateKind, ConjugacyReport, GeneratorDefect, GroupSpec, CONJUGACY_TOL,
};
use crate::circle::{cyclic_dist, grid, MonotoneLift};
use crate::convergence::{
    average_conjugacy, averaging_defect, hk_convergence_test, order_k_commuter, ConvergenceVerdict,
};
use crate::desitter::IsometryPair;
use crate::error::{Error, Result};
use crate::schottky::limit_set;
use crate::surface::{AcausalVerdict, SurfaceModel, WitnessOutcome};

const INTERTWINING_TOL: f64 = 1e-6;
const LIMIT_DEPTH: usize = 5;
const WORD_POWERS: usize = 24;
const ELLIPTIC_WORDS: usize = 6;

/// Random reduced word of length 1 to 3 in the generators, as a lift.
fn random_word(maps: &[MonotoneLift], rng: &mut ChaCha8Rng) -> Result<MonotoneLift> {
    let len = rng.gen_range(1..=3usize);
    let mut word = MonotoneLift::identity();
    let mut last: Option<(usize, bool)> = None;
    for _ in 0..len {
        let (i, inv) = loop {
            let c = (rng.gen_range(0..maps.len()), rng.gen_bool(0.5));
            if last != Some((c.0, !c.1)) {
                break c;
            }
        };
        let letter = if inv { maps[i].inverse()? } else { maps[i].clone() };
        word = letter.compose(&word)?;
        last = Some((i, inv));
    }
    Ok(word)
}

fn powers(w: &MonotoneLift, n: usize) -> Result<Vec<MonotoneLift>> {
    (1..=n as i64).map(|p| w.power(p)).collect()
}

/// End-to-end classification of `G` acting on `model`.
pub fn classify_pipeline(model: &SurfaceModel, g: &GroupSpec, grid_n: usize, seed: u64) -> Result<ConjugacyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stages = Vec::new();

    if model.h_down.is_infinite() || model.h_up.is_infinite() {
        let mut rep = ConjugacyReport::new(model.level_k, CertificateKind::CompactGroup, grid_n);
        rep.properness = Some(model.nonproper_necessary_check());
        rep.stages = vec!["properness".into()];
        rep.notes
            .push("infinite boundary: every isometry group acts properly".into());
        return Ok(rep);
    }

    stages.push("embed".to_string());
    let model = if model.embeds_in_torus().map_err(|e| e.at("embed"))?.embeds {
        model.clone()
    } else {
        model.reduce_to_torus().map_err(|e| e.at("embed"))?
    };

    stages.push("intertwining".into());
    for gen in &g.generators {
        let pair = IsometryPair::new(gen.rho1.clone(), gen.rho2.clone()).map_err(|e| e.at("intertwining"))?;
        let defect = model.intertwining_defect(&pair).map_err(|e| e.at("intertwining"))?;
        if defect > INTERTWINING_TOL {
            return Err(Error::CommutationViolation { defect }.at("intertwining"));
        }
    }

    stages.push("acausal".into());
    let mut notes = Vec::new();
    match model.acausal_check() {
        AcausalVerdict::Acausal => {}
        AcausalVerdict::NotAcausal { witness } => notes.push(format!(
            "boundary has a flat on ]{}, {}[; the model is not acausal",
            witness.a, witness.b
        )),
        AcausalVerdict::Inconclusive { arcs } => {
            notes.push(format!("acausality inconclusive on {} grid arcs", arcs.len()))
        }
    }

    stages.push("boundary".into());
    let h_ra = model.boundary_maps().map_err(|e| e.at("boundary"))?.h_ra;

    stages.push("rotation".into());
    let k = match model.invariant_graph_witness().map_err(|e| e.at("rotation"))? {
        WitnessOutcome::RotationIsOneOverK(k) => k,
        WitnessOutcome::Found { n, .. } => {
            let mut rep = ConjugacyReport::new(model.level_k, CertificateKind::CompactGroup, grid_n);
            rep.properness = Some(model.nonproper_necessary_check());
            rep.notes = notes;
            rep.notes.push(format!(
                "invariant spacelike graph of h^{n} found: the rotation number is not 1/k"
            ));
            rep.stages = stages;
            return Ok(rep);
        }
        WitnessOutcome::Inconclusive => {
            let mut rep = ConjugacyReport::new(model.level_k, CertificateKind::SemiConjugacy, grid_n);
            rep.notes = notes;
            rep.notes
                .push("rotation number of h→↑ is neither certified 1/k nor excluded".into());
            rep.stages = stages;
            return Ok(rep);
        }
    };

    stages.push("elementary".into());
    let mut rep = match detect_elementary_case(g, &h_ra, k) {
        Ok(case) => match case.tag {
            CaseTag::ManyPoints => {
                stages.push("elliptic".into());
                let cert = elliptic_verdict(g, &case, ELLIPTIC_WORDS).map_err(|e| e.at("elliptic"))?;
                let mut rep = ConjugacyReport::new(k, CertificateKind::CompactGroup, grid_n);
                rep.compact = Some(cert);
                rep.case = Some(case);
                rep
            }
            CaseTag::TwoPerFiber => {
                stages.push("hyperbolic".into());
                let targets = (case.points[0], case.points[1]);
                hyperbolic_case_conjugacy(g, &case, targets, grid_n).map_err(|e| e.at("hyperbolic"))?
            }
            CaseTag::OnePerFiber => {
                stages.push("parabolic".into());
                match parabolic_case_conjugacy(g, &case, grid_n) {
                    Ok(rep) => rep,
                    Err(Error::MixedStabilizer) => {
                        let mut rep = ConjugacyReport::new(k, CertificateKind::SemiConjugacy, grid_n);
                        rep.notes.push(
                            "stabilizer contains a hyperbolic element; only a semi-conjugacy is certified".into(),
                        );
                        rep.case = Some(case);
                        rep
                    }
                    Err(e) => return Err(e.at("parabolic")),
                }
            }
        },
        Err(Error::NotElementary { cap }) => {
            notes.push(format!("invariant set saturation exceeded {cap} points"));
            non_elementary(g, &h_ra, k, grid_n, &mut rng, &mut stages)?
        }
        Err(e) => return Err(e.at("elementary")),
    };
    rep.stages = stages;
    notes.append(&mut rep.notes);
    rep.notes = notes;
    Ok(rep)
}

fn non_elementary(
    g: &GroupSpec,
    h_ra: &MonotoneLift,
    k: u32,
    grid_n: usize,
    rng: &mut ChaCha8Rng,
    stages: &mut Vec<String>,
) -> Result<ConjugacyReport> {
    let maps = g.circle_maps();
    let mut rep = ConjugacyReport::new(k, CertificateKind::ConvergenceCertificate, grid_n);

    let h_tilde = match &g.pingpong {
        Some(data) => {
            stages.push("limit-set".into());
            let sys = limit_set(data, LIMIT_DEPTH).map_err(|e| e.at("limit-set"))?;
            stages.push("commuter".into());
            let h = order_k_commuter(&sys, h_ra, k).map_err(|e| e.at("commuter"))?;
            let hk = h.power(k as i64).map_err(|e| e.at("commuter"))?;
            rep.commuter_order_defect = Some(hk.circle_distance(&MonotoneLift::identity(), grid_n));
            stages.push("average".into());
            let phi = average_conjugacy(&h, k).map_err(|e| e.at("average"))?;
            rep.averaging_defect = Some(averaging_defect(&phi, &h, k, grid_n).map_err(|e| e.at("average"))?);
            rep.phi = Some(phi);
            h
        }
        None => {
            rep.notes.push("no ping-pong data: convergence certificate only".into());
            h_ra.clone()
        }
    };

    stages.push("quotient".into());
    rep.defects = g
        .generators
        .iter()
        .map(|gen| {
            let defect = grid(grid_n)
                .map(|x| cyclic_dist(gen.rho1.apply(h_tilde.apply(x)), h_tilde.apply(gen.rho1.apply(x))))
                .fold(0.0, f64::max);
            GeneratorDefect {
                name: format!("[{}, h]", gen.name),
                defect,
                tolerance: CONJUGACY_TOL,
            }
        })
        .collect();

    stages.push("convergence".into());
    if maps.is_empty() {
        rep.certificate_kind = CertificateKind::SemiConjugacy;
        return Ok(rep);
    }
    let w = random_word(&maps, rng)?;
    let verdict =
        hk_convergence_test(&powers(&w, WORD_POWERS)?, &h_tilde, k, grid_n).map_err(|e| e.at("convergence"))?;
    if !matches!(verdict, ConvergenceVerdict::Convergent { .. }) || !rep.within_tolerance() {
        rep.certificate_kind = CertificateKind::SemiConjugacy;
        rep.notes
            .push("convergence of the sampled sequence not certified".into());
    }
    rep.convergence = Some(verdict);
    Ok(rep)
}
