//! Configuration, scenario orchestration and file output.
//!
//! Exit codes of the command-line front end, one per failure category:
//!
//! | code | [`ExitCategory`] | meaning                                        |
//! |------|------------------|------------------------------------------------|
//! | 0    | `Success`        | run finished and every audit passed            |
//! | 2    | (argument parser)| malformed command line                         |
//! | 3    | `Config`         | configuration rejected                         |
//! | 4    | `Assumptions`    | rate family fails its structural checks        |
//! | 5    | `Diverged`       | step size collapsed or the state blew up       |
//! | 6    | `AuditFailed`    | run finished but an audited bound was violated |
//! | 7    | `Io`             | file system, snapshot or plotting failure      |

pub mod config;
pub mod converge;
pub mod output;
pub mod presets;
pub mod snapshot;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use thiserror::Error;

use crate::diagnostics::{audit, AuditReport, DiagnosticsSeries};
use crate::field::{Grid, GridError};
use crate::model::{validate_assumptions, AssumptionReport, InitialData, ModelError, ReactionModel};
use crate::scheme::{SchemeError, Simulation, State};

pub use config::{parse_config, ConfigError, InitialSource, RunConfig};
pub use converge::{converge, Axis, ConvergenceRow, ConvergenceTable};
pub use presets::Preset;
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("could not draw {path}: {message}")]
    Plot { path: PathBuf, message: String },
    #[error("convergence study: {0}")]
    Converge(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCategory {
    Success,
    Config,
    Assumptions,
    Diverged,
    AuditFailed,
    Io,
}

impl ExitCategory {
    pub fn code(self) -> u8 {
        match self {
            ExitCategory::Success => 0,
            ExitCategory::Config => 3,
            ExitCategory::Assumptions => 4,
            ExitCategory::Diverged => 5,
            ExitCategory::AuditFailed => 6,
            ExitCategory::Io => 7,
        }
    }
}

impl HarnessError {
    pub fn category(&self) -> ExitCategory {
        match self {
            HarnessError::Config(_)
            | HarnessError::Model(_)
            | HarnessError::Grid(_)
            | HarnessError::Converge(_) => ExitCategory::Config,
            HarnessError::Scheme(e) => match e {
                SchemeError::AssumptionsViolated(_) => ExitCategory::Assumptions,
                SchemeError::StepRejected { .. }
                | SchemeError::Diverged { .. }
                | SchemeError::NonFinite { .. } => ExitCategory::Diverged,
                _ => ExitCategory::Config,
            },
            HarnessError::Snapshot(_) | HarnessError::Io { .. } | HarnessError::Plot { .. } => {
                ExitCategory::Io
            }
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Builds the configured initial data on `grid`, which may differ from the
/// configured grid for presets.
pub fn initial_data_on(cfg: &RunConfig, grid: &Grid) -> Result<InitialData, HarnessError> {
    match &cfg.initial {
        InitialSource::Preset(p) => Ok(p.build(grid, &cfg.model)?),
        InitialSource::Snapshot(path) => {
            let snap = snapshot::read_snapshot_for(path, grid)?;
            if snap.gamma != cfg.model.gamma() {
                log::warn!(
                    "snapshot was written with gamma = {}, configuration uses {}",
                    snap.gamma,
                    cfg.model.gamma()
                );
            }
            let s = snap.state;
            let n1 = s.n1();
            let n2 = s.n.zip_map(&n1, |n, a| (n - a).max(0.0));
            Ok(InitialData::new(n1, n2, s.t, &cfg.model)?)
        }
    }
}

pub fn initial_data(cfg: &RunConfig) -> Result<InitialData, HarnessError> {
    initial_data_on(cfg, &cfg.grid())
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: State,
    pub series: DiagnosticsSeries,
    pub assumptions: AssumptionReport,
    pub audit: AuditReport,
    pub steps: usize,
}

impl RunOutcome {
    pub fn category(&self) -> ExitCategory {
        if self.audit.all_pass() {
            ExitCategory::Success
        } else {
            ExitCategory::AuditFailed
        }
    }
}

pub fn assumption_text(r: &AssumptionReport) -> String {
    let mark = |b: bool| if b { "PASS" } else { "FAIL" };
    let mut s = String::new();
    let _ = writeln!(s, "contact inhibition (F, G <= 0 above P_H)   {}", mark(r.passes_3));
    let _ = writeln!(s, "exponent condition gamma > 2 - 4/d        {}", mark(r.passes_7_gamma));
    let _ = writeln!(s, "bounded cancellation (F - G)^2 / p^(1/g)  {}", mark(r.passes_7_cancellation));
    let _ = writeln!(s, "estimated C_H                             {:.6e}", r.estimated_c_h);
    let _ = writeln!(s, "sup |R| over sampled pressures            {:.6e}", r.r_inf_norm);
    let _ = write!(s, "overall: {}", mark(r.all_pass()));
    s
}

fn report_text(cfg: &RunConfig, outcome: &RunOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "status: {}",
        if outcome.audit.all_pass() { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(s, "steps: {}", outcome.steps);
    let _ = writeln!(s, "t_final: {:.16e}", outcome.state.t);
    let g = cfg.grid();
    let _ = writeln!(
        s,
        "grid: dim {} half_width {} cells_per_axis {}",
        g.dim(),
        g.half_width(),
        g.cells_per_axis()
    );
    let _ = writeln!(s, "\n[assumptions]\n{}", assumption_text(&outcome.assumptions));
    let _ = writeln!(s, "\n[audit]\n{}", outcome.audit);
    s
}

fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:08}.tgs"))
}

/// Runs the configured scenario and writes `diagnostics.csv`, `report.txt`,
/// snapshots under `snapshots/` and, when enabled, `diagnostics.svg`.
///
/// A finished run is `Ok` even when the audit fails; see
/// [`RunOutcome::category`]. If the run stops early the diagnostics gathered
/// so far are still written.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    for d in &cfg.defaults_applied {
        info!("default applied: {d}");
    }
    let dir = &cfg.output.directory;
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(io_err(&snaps))?;

    let initial = initial_data(cfg)?;
    let model: &ReactionModel = &cfg.model;
    let assumptions = validate_assumptions(model, cfg.grid.dim);
    let mut sim = Simulation::new(&initial, &cfg.scheme, model)?;
    let gamma = model.gamma();
    let save = |state: &State, path: &Path| {
        write_snapshot(
            &Snapshot {
                state: state.clone(),
                gamma,
            },
            path,
        )
    };
    let every = cfg.output.snapshot_every;
    if every > 0 {
        save(sim.state(), &snapshot_path(&snaps, 0))?;
    }
    let t_end = cfg.scheme.t_end;
    while sim.state().t < t_end {
        if let Err(e) = sim.step_toward(t_end) {
            let csv = dir.join("diagnostics.csv");
            output::write_text(&csv, &output::diagnostics_csv(sim.series()))?;
            return Err(e.into());
        }
        if every > 0 && sim.steps() % every == 0 {
            save(sim.state(), &snapshot_path(&snaps, sim.steps()))?;
        }
    }
    let steps = sim.steps();
    let (state, series) = sim.finish()?;
    save(&state, &snaps.join("final.tgs"))?;

    let outcome = RunOutcome {
        audit: audit(&series, model, &[]),
        state,
        series,
        assumptions,
        steps,
    };
    output::write_text(&dir.join("diagnostics.csv"), &output::diagnostics_csv(&outcome.series))?;
    output::write_text(&dir.join("report.txt"), &report_text(cfg, &outcome))?;
    if cfg.output.emit_plots {
        output::plot_diagnostics(&outcome.series, &dir.join("diagnostics.svg"))?;
    }
    info!(
        "run finished after {steps} steps at t = {}; audit {}",
        outcome.state.t,
        if outcome.audit.all_pass() { "passed" } else { "FAILED" }
    );
    Ok(outcome)
}

/// Runs a refinement study and writes `convergence_<axis>.csv` (plus an SVG
/// when plots are enabled).
pub fn cmd_converge(
    cfg: &RunConfig,
    axis: Axis,
    levels: usize,
) -> Result<ConvergenceTable, HarnessError> {
    for d in &cfg.defaults_applied {
        info!("default applied: {d}");
    }
    let table = converge(cfg, axis, levels)?;
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    output::write_text(
        &dir.join(format!("convergence_{axis}.csv")),
        &output::convergence_csv(&table),
    )?;
    if cfg.output.emit_plots {
        output::plot_convergence(&table, &dir.join(format!("convergence_{axis}.svg")))?;
    }
    Ok(table)
}

/// Assumption report for the configured rate family.
pub fn cmd_validate(cfg: &RunConfig) -> AssumptionReport {
    validate_assumptions(&cfg.model, cfg.grid.dim)
}
