//! CSV sample dumps for the figures; each kind writes one row per grid sample.

use lcl_core::circle::{grid, wrap};
use lcl_core::convergence::collapse_map;
use lcl_core::fixtures::middle_thirds;
use lcl_core::{MonotoneLift, SurfaceModel};

use crate::commands::group_limit_set;
use crate::files::GroupFile;
use crate::{num, CliError, Table};

pub const KINDS: [&str; 5] = [
    "boundary-graphs",
    "limit-set-arcs",
    "orbit-trace",
    "convergence-heatmap",
    "collapse-staircase",
];

pub struct PlotInputs {
    pub model: Option<SurfaceModel>,
    pub group: Option<GroupFile>,
    pub map: Option<MonotoneLift>,
    pub depth: usize,
    pub iters: usize,
    pub x0: f64,
    pub grid: usize,
}

fn boundary_value(f: &MonotoneLift, x: f64) -> String {
    match f.eval(x) {
        Ok(v) => num(v),
        Err(_) if matches!(f, MonotoneLift::Infinite(lcl_core::circle::Sign::Minus)) => "-inf".into(),
        Err(_) => "inf".into(),
    }
}

pub fn emit_plot(kind: &str, inp: &PlotInputs) -> Result<Table, CliError> {
    let n = inp.grid.max(1);
    match kind {
        "boundary-graphs" => {
            let m = inp.model.as_ref().ok_or(CliError::Missing("--model"))?;
            let mut t = Table::new(&["x", "h_down", "h_up"]);
            for x in grid(n) {
                t.rows
                    .push(vec![num(x), boundary_value(&m.h_down, x), boundary_value(&m.h_up, x)]);
            }
            Ok(t)
        }
        "limit-set-arcs" => {
            let g = inp.group.as_ref().ok_or(CliError::Missing("--group"))?;
            let sys = group_limit_set(g, inp.depth)?;
            let mut t = Table::new(&["x", "gap", "level"]);
            for x in grid(n) {
                let (gap, level) = match sys.listed_gap(x) {
                    Some(j) => (j as i64, sys.gaps[j].level as i64),
                    None => (-1, -1),
                };
                t.rows.push(vec![num(x), gap.to_string(), level.to_string()]);
            }
            Ok(t)
        }
        "orbit-trace" => {
            let f = inp.map.as_ref().ok_or(CliError::Missing("--map"))?;
            let mut t = Table::new(&["n", "theta", "lift"]);
            let mut x = inp.x0;
            for i in 0..n {
                t.rows.push(vec![i.to_string(), num(wrap(x)), num(x)]);
                x = f.apply(x);
            }
            Ok(t)
        }
        "convergence-heatmap" => {
            let f = inp.map.as_ref().ok_or(CliError::Missing("--map"))?;
            let mut header = vec!["x".to_string()];
            header.extend((1..=inp.iters).map(|i| format!("n{i}")));
            let mut t = Table {
                header,
                rows: Vec::with_capacity(n),
            };
            for x in grid(n) {
                let mut row = vec![num(x)];
                let mut y = x;
                for _ in 0..inp.iters {
                    y = f.apply(y);
                    row.push(num(wrap(y)));
                }
                t.rows.push(row);
            }
            Ok(t)
        }
        "collapse-staircase" => {
            let sys = match &inp.group {
                Some(g) => group_limit_set(g, inp.depth)?,
                None => middle_thirds(inp.depth),
            };
            let cd = collapse_map(&sys)?;
            let mut t = Table::new(&["x", "pi"]);
            for x in grid(n) {
                t.push_floats(&[x, cd.pi.apply(x)]);
            }
            Ok(t)
        }
        other => Err(CliError::UnknownKind(other.to_string())),
    }
}
