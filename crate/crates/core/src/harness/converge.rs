//! Refinement studies along one parameter axis.
//!
//! - `dx`: cells per axis doubles from the configured value. A reaction-free,
//!   floor-free Barenblatt run is compared with the exact profile; anything
//!   else is compared with the finest grid, block-averaged down.
//! - `epsilon`: levels `0.1, 0.01, ...`, each compared with the smallest.
//! - `delta`: levels `0.01, 0.001, ...`, each compared with the smallest.
//!
//! Every row reports the `L1` error of `n` at `t_end` and the space-time `L2`
//! error of `∇p` sampled at [`SAMPLE_TIMES`] equally spaced times.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{InitialSource, RunConfig};
use super::presets::Preset;
use super::{initial_data_on, HarnessError};
use crate::field::{Field, Grid, VectorField};
use crate::model::Barenblatt;
use crate::scheme::{SchemeParams, Simulation};
use crate::stencil::gradient;

pub const SAMPLE_TIMES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Dx,
    Epsilon,
    Delta,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Dx => "dx",
            Axis::Epsilon => "epsilon",
            Axis::Delta => "delta",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dx" => Ok(Axis::Dx),
            "epsilon" => Ok(Axis::Epsilon),
            "delta" => Ok(Axis::Delta),
            other => Err(format!("unknown axis `{other}` (expected dx, epsilon or delta)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub parameter: f64,
    pub cells_per_axis: usize,
    pub l1_error_n: f64,
    pub l2_error_grad_p: f64,
    /// Observed order against the previous row, from the `L1` error of `n`
    /// (for `epsilon`, from the gradient error). `None` for the first row or
    /// when an error vanishes.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub axis: Axis,
    /// `true` when errors are measured against the closed-form solution.
    pub exact_reference: bool,
    pub rows: Vec<ConvergenceRow>,
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "axis {} (reference: {})",
            self.axis,
            if self.exact_reference { "exact solution" } else { "finest level" }
        )?;
        writeln!(f, "{:>12} {:>8} {:>14} {:>14} {:>8}", self.axis, "cells", "L1(n)", "L2(grad p)", "order")?;
        for r in &self.rows {
            let order = r.order.map_or_else(|| "-".to_string(), |o| format!("{o:.3}"));
            writeln!(
                f,
                "{:>12.4e} {:>8} {:>14.6e} {:>14.6e} {:>8}",
                r.parameter, r.cells_per_axis, r.l1_error_n, r.l2_error_grad_p, order
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Level {
    parameter: f64,
    grid: Grid,
    params_epsilon: f64,
    params_delta: f64,
}

struct LevelRun {
    n: Field,
    grad_p: Vec<VectorField>,
}

fn sample_times(t0: f64, t_end: f64) -> Vec<f64> {
    (1..=SAMPLE_TIMES)
        .map(|k| {
            if k == SAMPLE_TIMES {
                t_end
            } else {
                t0 + (t_end - t0) * k as f64 / SAMPLE_TIMES as f64
            }
        })
        .collect()
}

fn run_level(cfg: &RunConfig, level: &Level, times: &[f64]) -> Result<LevelRun, HarnessError> {
    let initial = initial_data_on(cfg, &level.grid)?;
    let params = SchemeParams {
        epsilon: level.params_epsilon,
        delta: level.params_delta,
        ..cfg.scheme.clone()
    };
    let mut sim = Simulation::new(&initial, &params, &cfg.model)?;
    let mut grad_p = Vec::with_capacity(times.len());
    for &t in times {
        sim.advance_to(t)?;
        grad_p.push(gradient(&sim.state().pressure(cfg.model.gamma())));
    }
    Ok(LevelRun {
        n: sim.state().n.clone(),
        grad_p,
    })
}

/// Block-averages `fine` onto `coarse`; the cell counts must divide.
fn restrict(fine: &Field, coarse: &Grid) -> Field {
    let fg = fine.grid();
    let r = fg.cells_per_axis() / coarse.cells_per_axis();
    let nf = fg.cells_per_axis();
    let nc = coarse.cells_per_axis();
    let mut out = Field::zeros(*coarse);
    let blocks = r.pow(coarse.dim() as u32) as f64;
    for i in 0..fg.len() {
        let j = if coarse.dim() == 1 {
            i / r
        } else {
            (i / nf / r) * nc + (i % nf) / r
        };
        out[j] += fine[i] / blocks;
    }
    out
}

fn l1_diff(a: &Field, b: &Field) -> f64 {
    a.zip_map(b, |x, y| (x - y).abs()).integral()
}

fn grad_sq_diff(a: &VectorField, b: &VectorField) -> f64 {
    let mut total = 0.0;
    for (ca, cb) in a.components().iter().zip(b.components()) {
        total += ca.zip_map(cb, |x, y| (x - y) * (x - y)).integral();
    }
    total
}

fn order(prev: (f64, f64), cur: (f64, f64)) -> Option<f64> {
    let o = (prev.1 / cur.1).ln() / (prev.0 / cur.0).ln();
    o.is_finite().then_some(o)
}

/// Runs `levels` refinements along `axis`, concurrently.
pub fn converge(cfg: &RunConfig, axis: Axis, levels: usize) -> Result<ConvergenceTable, HarnessError> {
    if levels < 3 {
        return Err(HarnessError::Converge(format!("need at least 3 levels, got {levels}")));
    }
    let base = cfg.grid();
    let t0 = match &cfg.initial {
        InitialSource::Preset(p) => p.start_time(),
        InitialSource::Snapshot(_) if axis == Axis::Dx => {
            return Err(HarnessError::Converge(
                "a dx study needs a preset; a snapshot exists on one grid only".into(),
            ))
        }
        InitialSource::Snapshot(_) => initial_data_on(cfg, &base)?.t0,
    };
    let t_end = cfg.scheme.t_end;
    if !(t_end > t0) {
        return Err(HarnessError::Converge(format!(
            "t_end = {t_end} must be after the start time {t0}"
        )));
    }
    let specs: Vec<Level> = (0..levels)
        .map(|k| -> Result<Level, HarnessError> {
            let scale = 10f64.powi(-(k as i32));
            Ok(match axis {
                Axis::Dx => {
                    let grid = Grid::new(base.dim(), base.half_width(), base.cells_per_axis() << k)?;
                    Level {
                        parameter: grid.dx(),
                        grid,
                        params_epsilon: cfg.scheme.epsilon,
                        params_delta: cfg.scheme.delta,
                    }
                }
                Axis::Epsilon => Level {
                    parameter: 0.1 * scale,
                    grid: base,
                    params_epsilon: 0.1 * scale,
                    params_delta: cfg.scheme.delta,
                },
                Axis::Delta => Level {
                    parameter: 0.01 * scale,
                    grid: base,
                    params_epsilon: cfg.scheme.epsilon,
                    params_delta: 0.01 * scale,
                },
            })
        })
        .collect::<Result<_, _>>()?;

    let times = sample_times(t0, t_end);
    let dt_sample = (t_end - t0) / SAMPLE_TIMES as f64;
    let runs: Vec<LevelRun> = specs
        .par_iter()
        .map(|level| run_level(cfg, level, &times))
        .collect::<Result<_, _>>()?;

    let exact = match (&cfg.initial, axis) {
        (InitialSource::Preset(Preset::Barenblatt { mass, .. }), Axis::Dx)
            if cfg.model.rate_bound() == 0.0 && cfg.scheme.delta == 0.0 =>
        {
            Some(Barenblatt::new(cfg.model.gamma(), base.dim(), *mass)?)
        }
        _ => None,
    };

    let mut rows = Vec::new();
    // against the finest level, the finest row itself carries no information
    let measured = if exact.is_some() { levels } else { levels - 1 };
    let finest = runs.last().expect("levels >= 3");
    for k in 0..measured {
        let level = &specs[k];
        let run = &runs[k];
        let grid = level.grid;
        let (l1, grad_sq) = match &exact {
            Some(b) => {
                let n_exact = b.sample(&grid, t_end);
                let mut sq = 0.0;
                for (g, &t) in run.grad_p.iter().zip(&times) {
                    let comps = (0..grid.dim())
                        .map(|a| Field::from_fn(grid, |x| b.pressure_gradient_at(x, t)[a]))
                        .collect();
                    sq += grad_sq_diff(g, &VectorField::new(comps));
                }
                (l1_diff(&run.n, &n_exact), sq)
            }
            None => {
                let coarse = |f: &Field| {
                    if axis == Axis::Dx {
                        restrict(f, &grid)
                    } else {
                        f.clone()
                    }
                };
                let mut sq = 0.0;
                for (g, gf) in run.grad_p.iter().zip(&finest.grad_p) {
                    let comps = gf.components().iter().map(&coarse).collect();
                    sq += grad_sq_diff(g, &VectorField::new(comps));
                }
                (l1_diff(&run.n, &coarse(&finest.n)), sq)
            }
        };
        rows.push(ConvergenceRow {
            parameter: level.parameter,
            cells_per_axis: grid.cells_per_axis(),
            l1_error_n: l1,
            l2_error_grad_p: (dt_sample * grad_sq).sqrt(),
            order: None,
        });
    }
    for i in 1..rows.len() {
        let pick = |r: &ConvergenceRow| {
            if axis == Axis::Epsilon {
                r.l2_error_grad_p
            } else {
                r.l1_error_n
            }
        };
        rows[i].order = order(
            (rows[i - 1].parameter, pick(&rows[i - 1])),
            (rows[i].parameter, pick(&rows[i])),
        );
    }
    Ok(ConvergenceTable {
        axis,
        exact_reference: exact.is_some(),
        rows,
    })
}
