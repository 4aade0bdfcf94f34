//! On-disk formats for maps, models and groups.

use std::collections::BTreeSet;

use lcl_core::circle::Sign;
use lcl_core::conjugacy::{Flow, Generator};
use lcl_core::moebius::one_param;
use lcl_core::{CyclicInterval, GroupSpec, MoebiusK, MonotoneLift, PingPongData, SurfaceModel};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::canon::to_canonical;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Rotation { alpha: f64 },
    Moebius { matrix: [f64; 4], k: u32, sheet: u32 },
    PiecewiseLinear { breaks: Vec<[f64; 2]> },
    Compose(Vec<MapSpec>),
    Inverse(Box<MapSpec>),
    Min(Box<[MapSpec; 2]>),
}

impl MapSpec {
    pub fn to_lift(&self) -> Result<MonotoneLift, CliError> {
        Ok(match self {
            MapSpec::Rotation { alpha } => MonotoneLift::rotation(*alpha),
            MapSpec::Moebius { matrix, k, sheet } => MoebiusK::new(*matrix, *k, *sheet)?.lift(),
            MapSpec::PiecewiseLinear { breaks } => {
                let b: Vec<(f64, f64)> = breaks.iter().map(|p| (p[0], p[1])).collect();
                MonotoneLift::piecewise_linear(&b)?
            }
            MapSpec::Compose(v) => {
                let maps = v.iter().map(MapSpec::to_lift).collect::<Result<Vec<_>, _>>()?;
                MonotoneLift::chain(&maps)?
            }
            MapSpec::Inverse(m) => m.to_lift()?.inverse()?,
            MapSpec::Min(p) => MonotoneLift::min(&p[0].to_lift()?, &p[1].to_lift()?)?,
        })
    }

    pub fn from_lift(f: &MonotoneLift) -> Result<MapSpec, CliError> {
        Ok(match f {
            MonotoneLift::Rotation(a) => MapSpec::Rotation { alpha: *a },
            MonotoneLift::Moebius(m) => MapSpec::Moebius {
                matrix: m.matrix(),
                k: m.k(),
                sheet: m.sheet(),
            },
            MonotoneLift::PiecewiseLinear(p) | MonotoneLift::CollapseStaircase(p) => MapSpec::PiecewiseLinear {
                breaks: p.knots().map(|(x, y)| [x, y]).collect(),
            },
            MonotoneLift::Composition(v) => {
                MapSpec::Compose(v.iter().map(MapSpec::from_lift).collect::<Result<_, _>>()?)
            }
            MonotoneLift::Inverse(g) => MapSpec::Inverse(Box::new(MapSpec::from_lift(g)?)),
            MonotoneLift::Min(p) => MapSpec::Min(Box::new([MapSpec::from_lift(&p[0])?, MapSpec::from_lift(&p[1])?])),
            MonotoneLift::Constructed(_) | MonotoneLift::Infinite(_) => {
                return Err(CliError::Unrepresentable(format!("{f:?}")))
            }
        })
    }

    /// Cover levels of every Möbius leaf.
    fn levels(&self, out: &mut BTreeSet<u32>) {
        match self {
            MapSpec::Moebius { k, .. } => {
                out.insert(*k);
            }
            MapSpec::Compose(v) => v.iter().for_each(|m| m.levels(out)),
            MapSpec::Inverse(m) => m.levels(out),
            MapSpec::Min(p) => p.iter().for_each(|m| m.levels(out)),
            MapSpec::Rotation { .. } | MapSpec::PiecewiseLinear { .. } => {}
        }
    }

    pub fn parse(text: &str) -> Result<MapSpec, CliError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A boundary graph: a map, or the flag `"-inf"` / `"+inf"` (`"−inf"` is accepted too).
#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    Map(MapSpec),
    MinusInf,
    PlusInf,
}

impl Serialize for Boundary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Boundary::Map(m) => m.serialize(s),
            Boundary::MinusInf => s.serialize_str("-inf"),
            Boundary::PlusInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Boundary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => match s.as_str() {
                "-inf" | "\u{2212}inf" => Ok(Boundary::MinusInf),
                "+inf" | "inf" => Ok(Boundary::PlusInf),
                other => Err(de::Error::custom(format!("unknown boundary flag {other:?}"))),
            },
            v => MapSpec::deserialize(v).map(Boundary::Map).map_err(de::Error::custom),
        }
    }
}

impl Boundary {
    fn to_lift(&self) -> Result<MonotoneLift, CliError> {
        match self {
            Boundary::Map(m) => m.to_lift(),
            Boundary::MinusInf => Ok(MonotoneLift::Infinite(Sign::Minus)),
            Boundary::PlusInf => Ok(MonotoneLift::Infinite(Sign::Plus)),
        }
    }

    fn from_lift(f: &MonotoneLift) -> Result<Boundary, CliError> {
        Ok(match f {
            MonotoneLift::Infinite(Sign::Minus) => Boundary::MinusInf,
            MonotoneLift::Infinite(Sign::Plus) => Boundary::PlusInf,
            f => Boundary::Map(MapSpec::from_lift(f)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kind: String,
    pub level_k: u32,
    pub h_down: Boundary,
    pub h_up: Boundary,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile, CliError> {
        let m: ModelFile = serde_json::from_str(text)?;
        if m.kind != "cylinder" {
            return Err(CliError::Format(format!("unsupported model kind {:?}", m.kind)));
        }
        Ok(m)
    }

    pub fn to_model(&self) -> Result<SurfaceModel, CliError> {
        Ok(SurfaceModel::new(
            self.h_down.to_lift()?,
            self.h_up.to_lift()?,
            self.level_k,
        )?)
    }

    pub fn from_model(m: &SurfaceModel) -> Result<ModelFile, CliError> {
        Ok(ModelFile {
            kind: "cylinder".into(),
            level_k: m.level_k,
            h_down: Boundary::from_lift(&m.h_down)?,
            h_up: Boundary::from_lift(&m.h_up)?,
        })
    }

    pub fn to_canonical(&self) -> String {
        to_canonical(self).expect("model files serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    pub rho1: MapSpec,
    pub rho2: MapSpec,
}

/// Ping-pong arcs per generator, each arc an `[a, b]` pair read counterclockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PingPongFile {
    pub generators: Vec<MapSpec>,
    pub attracting: Vec<Vec<[f64; 2]>>,
    pub repelling: Vec<Vec<[f64; 2]>>,
}

impl PingPongFile {
    pub fn to_data(&self) -> Result<PingPongData, CliError> {
        let gens = self
            .generators
            .iter()
            .map(|g| match g {
                MapSpec::Moebius { matrix, k, sheet } => Ok(MoebiusK::new(*matrix, *k, *sheet)?),
                _ => Err(CliError::Format("ping-pong generators must be moebius maps".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let arcs = |v: &Vec<Vec<[f64; 2]>>| -> Vec<Vec<CyclicInterval>> {
            v.iter()
                .map(|l| l.iter().map(|p| CyclicInterval::new(p[0], p[1])).collect())
                .collect()
        };
        Ok(PingPongData::new(gens, arcs(&self.attracting), arcs(&self.repelling))?)
    }

    pub fn from_data(d: &PingPongData) -> PingPongFile {
        let arcs = |v: &Vec<Vec<CyclicInterval>>| v.iter().map(|l| l.iter().map(|c| [c.a, c.b]).collect()).collect();
        PingPongFile {
            generators: d
                .generators
                .iter()
                .map(|m| MapSpec::Moebius {
                    matrix: m.matrix(),
                    k: m.k(),
                    sheet: m.sheet(),
                })
                .collect(),
            attracting: arcs(&d.attracting),
            repelling: arcs(&d.repelling),
        }
    }
}

/// A one-parameter flow for stabilizers that are not cyclic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowFile {
    Hyperbolic { x0: f64, y0: f64, lambda: f64 },
    Parabolic { x0: f64, forward: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub level_k: u32,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pingpong: Option<PingPongFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<f64>>,
}

impl GroupFile {
    pub fn parse(text: &str) -> Result<GroupFile, CliError> {
        let g: GroupFile = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), CliError> {
        let mut names = BTreeSet::new();
        for gen in &self.generators {
            if !names.insert(gen.name.as_str()) {
                return Err(CliError::Format(format!("duplicate generator name {:?}", gen.name)));
            }
            let mut levels = BTreeSet::new();
            gen.rho1.levels(&mut levels);
            gen.rho2.levels(&mut levels);
            if let Some(&k) = levels.iter().find(|&&k| k != self.level_k) {
                return Err(lcl_core::Error::LevelMismatch(k, self.level_k).into());
            }
        }
        if let Some(p) = &self.pingpong {
            let mut levels = BTreeSet::new();
            p.generators.iter().for_each(|m| m.levels(&mut levels));
            if let Some(&k) = levels.iter().find(|&&k| k != self.level_k) {
                return Err(lcl_core::Error::LevelMismatch(k, self.level_k).into());
            }
        }
        Ok(())
    }

    pub fn pingpong_data(&self) -> Result<Option<PingPongData>, CliError> {
        self.pingpong.as_ref().map(PingPongFile::to_data).transpose()
    }

    pub fn to_group(&self) -> Result<GroupSpec, CliError> {
        let generators = self
            .generators
            .iter()
            .map(|g| {
                Ok(Generator {
                    name: g.name.clone(),
                    rho1: g.rho1.to_lift()?,
                    rho2: g.rho2.to_lift()?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let flow = match &self.flow {
            None => None,
            Some(FlowFile::Hyperbolic { x0, y0, lambda }) => {
                Some(Flow::hyperbolic(one_param(*x0, *y0, *lambda, self.level_k)?))
            }
            Some(FlowFile::Parabolic { x0, forward }) => Some(Flow::parabolic(*x0, *forward, self.level_k)),
        };
        Ok(GroupSpec {
            level_k: self.level_k,
            generators,
            pingpong: self.pingpong_data()?,
            flow,
            candidates: self.candidates.clone(),
        })
    }

    /// Diagonal group file for Möbius generators named `g0, g1, …`, carrying ping-pong data.
    pub fn from_pingpong(d: &PingPongData) -> GroupFile {
        let pp = PingPongFile::from_data(d);
        GroupFile {
            level_k: d.k(),
            generators: pp
                .generators
                .iter()
                .enumerate()
                .map(|(i, m)| GeneratorEntry {
                    name: format!("g{i}"),
                    rho1: m.clone(),
                    rho2: m.clone(),
                })
                .collect(),
            pingpong: Some(pp),
            flow: None,
            candidates: None,
        }
    }

    pub fn to_canonical(&self) -> String {
        to_canonical(self).expect("group files serialize")
    }
}
