//! Explicit time integration of the regularized two-species system.
//!
//! The state is the total density `n` and the species-1 fraction `c1`. Each
//! forward-Euler step updates `n` with the conservative porous-medium flux plus
//! net growth, and `c1` with upwind transport along `-∇p`, an optional
//! `ε div[p ∇c1]` smoothing term and the fraction exchange rates.

use log::warn;
use thiserror::Error;

use crate::diagnostics::{self, DiagnosticsSeries, LocalizerRadii, Monitor};
use crate::field::{Field, Grid, GridError};
use crate::model::{
    gaussian_floor, validate_assumptions, AssumptionReport, InitialData, ModelError,
    ReactionModel,
};
use crate::stencil::{div_density_flux, div_mobility_flux, gradient, upwind_advect};

/// Guard against division by zero in the step-size limits.
pub const TINY: f64 = 1e-300;

/// Relative overshoot of `P_H` that rejects a step.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-6;

/// A run diverges once retries push `dt` below this fraction of `t_end`.
const DIVERGENCE_FRACTION: f64 = 1e-14;

/// Mass share in the outer shell of the box that triggers a warning.
const SHELL_WARNING: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("step rejected: max pressure {p_max} exceeds {limit}")]
    StepRejected { p_max: f64, limit: f64 },
    #[error("time step fell to {dt:e} at t = {t}; the run diverged")]
    Diverged { t: f64, dt: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("rate family fails the structural assumptions: {0:?}")]
    AssumptionsViolated(AssumptionReport),
    #[error("cfl safety factor must lie in (0, 1], got {0}")]
    BadCflSafety(f64),
    #[error("epsilon must be finite and >= 0, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Total density and species-1 fraction at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub n: Field,
    pub c1: Field,
    pub t: f64,
}

impl State {
    /// `c1 = n1 / n`; vacuum cells take the global species-1 mass fraction.
    pub fn from_initial(data: &InitialData) -> Self {
        let global = data.global_fraction();
        let n = data.total();
        let c1 = n.zip_map(&data.n1, |total, n1| {
            if total > 0.0 {
                (n1 / total).clamp(0.0, 1.0)
            } else {
                global
            }
        });
        Self { n, c1, t: data.t0 }
    }

    pub fn grid(&self) -> &Grid {
        self.n.grid()
    }

    pub fn c2(&self) -> Field {
        self.c1.map(|c| 1.0 - c)
    }

    pub fn n1(&self) -> Field {
        self.c1.zip_map(&self.n, |c, n| c * n)
    }

    pub fn n2(&self) -> Field {
        self.c1.zip_map(&self.n, |c, n| (1.0 - c) * n)
    }

    pub fn pressure(&self, gamma: f64) -> Field {
        self.n.map(|v| v.max(0.0).powf(gamma))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    /// Coefficient of the `div[p ∇c1]` regularization.
    pub epsilon: f64,
    /// Amplitude of the Gaussian floor added to the initial density.
    pub delta: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Steps between diagnostics records.
    pub diag_every: usize,
    /// Run even when the rate family fails its assumption checks.
    pub override_assumptions: bool,
    /// Cutoff radii for the diagnostics; derived from the box when `None`.
    pub localizers: Option<LocalizerRadii>,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            delta: 1e-3,
            cfl_safety: 0.4,
            t_end: 1.0,
            diag_every: 10,
            override_assumptions: false,
            localizers: None,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(SchemeError::BadCflSafety(self.cfl_safety));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(SchemeError::BadEpsilon(self.epsilon));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(ModelError::BadDelta(self.delta).into());
        }
        Ok(())
    }
}

/// Stable explicit step: the smallest of the diffusion, advection,
/// ε-diffusion and reaction limits times `cfl_safety`, capped by the time
/// remaining until `t_end`.
pub fn cfl_dt(state: &State, params: &SchemeParams, model: &ReactionModel) -> f64 {
    let grid = state.grid();
    let dx = grid.dx();
    let two_d = 2.0 * grid.dim() as f64;
    let p = state.pressure(model.gamma());
    let p_max = p.max().max(0.0);
    let grad_max = gradient(&p).max_norm();
    let limit = (dx * dx / (two_d * model.gamma() * p_max + TINY))
        .min(dx / (grad_max + TINY))
        .min(dx * dx / (two_d * params.epsilon * p_max + TINY))
        .min(1.0 / (model.rate_bound() + TINY));
    let dt = params.cfl_safety * limit;
    let remaining = params.t_end - state.t;
    if remaining > 0.0 {
        dt.min(remaining)
    } else {
        dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stepped {
    pub state: State,
    /// Mass-weighted amount removed or added by clamping `n >= 0` and `c1 in [0,1]`.
    pub clamped: f64,
}

/// One forward-Euler step of length `dt`.
///
/// Returns [`SchemeError::StepRejected`] when the new pressure exceeds
/// `P_H (1 + 1e-6)`; the caller is expected to retry with a smaller step.
pub fn step(
    state: &State,
    dt: f64,
    params: &SchemeParams,
    model: &ReactionModel,
) -> Result<Stepped, SchemeError> {
    step_with(state, dt, params, model, true)
}

fn step_with(
    state: &State,
    dt: f64,
    params: &SchemeParams,
    model: &ReactionModel,
    enforce_max_principle: bool,
) -> Result<Stepped, SchemeError> {
    let grid = *state.grid();
    let p = state.pressure(model.gamma());
    let grad_p = gradient(&p);
    let density_flux = div_density_flux(&state.n, &p);
    let transport = upwind_advect(&state.c1, &grad_p.neg());
    let smoothing = if params.epsilon > 0.0 {
        Some(div_mobility_flux(&p, &state.c1))
    } else {
        None
    };

    let vol = grid.cell_volume();
    let mut n = Field::zeros(grid);
    let mut c1 = Field::zeros(grid);
    let mut clamped = 0.0;
    for i in 0..grid.len() {
        let rates = model.rates(p[i]);
        let c = state.c1[i];
        let growth = c * rates.f() + (1.0 - c) * rates.g();
        let mut n_new = state.n[i] + dt * (density_flux[i] + state.n[i] * growth);

        let exchange = c * rates.f1 + (1.0 - c) * rates.g1 - c * growth;
        let eps_term = smoothing.as_ref().map_or(0.0, |s| params.epsilon * s[i]);
        let mut c_new = c + dt * (transport[i] + eps_term + exchange);

        if n_new < 0.0 {
            clamped += -n_new * vol;
            n_new = 0.0;
        }
        let c_clamped = c_new.clamp(0.0, 1.0);
        clamped += (c_new - c_clamped).abs() * n_new * vol;
        c_new = c_clamped;

        if !(n_new.is_finite() && c_new.is_finite()) {
            return Err(SchemeError::NonFinite { t: state.t });
        }
        n[i] = n_new;
        c1[i] = c_new;
    }

    if enforce_max_principle {
        let limit = model.homeostatic_pressure() * (1.0 + MAX_PRINCIPLE_SLACK);
        let p_max = n.max().powf(model.gamma());
        if p_max > limit {
            return Err(SchemeError::StepRejected { p_max, limit });
        }
    }

    Ok(Stepped {
        state: State {
            n,
            c1,
            t: state.t + dt,
        },
        clamped,
    })
}

/// Time loop for one `(epsilon, delta)` member of the regularized family.
///
/// Owns the state and the diagnostics accumulator; [`Simulation::advance_to`]
/// can be called repeatedly to stop at sample times.
#[derive(Debug, Clone)]
pub struct Simulation {
    model: ReactionModel,
    params: SchemeParams,
    state: State,
    monitor: Monitor,
    series: DiagnosticsSeries,
    enforce_max_principle: bool,
    steps: usize,
    last_recorded_step: usize,
    warned_shell: bool,
}

impl Simulation {
    /// Validates the model, applies the Gaussian floor and records the
    /// initial diagnostics.
    pub fn new(
        initial: &InitialData,
        params: &SchemeParams,
        model: &ReactionModel,
    ) -> Result<Self, SchemeError> {
        params.validate()?;
        let report = validate_assumptions(model, initial.grid().dim());
        if !report.all_pass() {
            if !params.override_assumptions {
                return Err(SchemeError::AssumptionsViolated(report));
            }
            warn!("rate family fails the assumption checks, continuing on override: {report:?}");
        }
        let floored = gaussian_floor(initial, params.delta, model)?;
        let state = State::from_initial(&floored);
        let radii = params
            .localizers
            .unwrap_or_else(|| LocalizerRadii::defaults_for(state.grid()));
        let monitor = Monitor::new(&state, model, radii)?;
        let mut sim = Self {
            model: model.clone(),
            params: params.clone(),
            state,
            monitor,
            series: DiagnosticsSeries::default(),
            // the maximum principle is only expected under contact inhibition
            enforce_max_principle: report.passes_3,
            steps: 0,
            last_recorded_step: 0,
            warned_shell: false,
        };
        sim.push_record();
        Ok(sim)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn series(&self) -> &DiagnosticsSeries {
        &self.series
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn monitor(&self) -> &Monitor {
        &self.monitor
    }

    fn push_record(&mut self) {
        let rec = self.monitor.record(&self.state, &self.model);
        if !self.warned_shell && diagnostics::outer_shell_fraction(&self.state) > SHELL_WARNING {
            warn!(
                "more than {SHELL_WARNING:e} of the mass sits in the outer 10% of the box at t = {}",
                self.state.t
            );
            self.warned_shell = true;
        }
        self.series.records.push(rec);
        self.last_recorded_step = self.steps;
    }

    /// Takes one accepted step toward `target`, halving on rejection, and
    /// returns the step length. A step that reaches `target` lands on it exactly.
    pub fn step_toward(&mut self, target: f64) -> Result<f64, SchemeError> {
        let remaining = target - self.state.t;
        let mut dt = cfl_dt(&self.state, &self.params, &self.model).min(remaining);
        let floor = DIVERGENCE_FRACTION * self.params.t_end.abs().max(f64::MIN_POSITIVE);
        let stepped = loop {
            match step_with(
                &self.state,
                dt,
                &self.params,
                &self.model,
                self.enforce_max_principle,
            ) {
                Ok(s) => break s,
                Err(SchemeError::StepRejected { .. }) => {
                    dt *= 0.5;
                    if dt < floor {
                        return Err(SchemeError::Diverged {
                            t: self.state.t,
                            dt,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        };
        self.monitor.accumulate(&self.state, &self.model, dt);
        self.monitor.add_clamp(stepped.clamped);
        self.state = stepped.state;
        if dt >= remaining {
            self.state.t = target;
        }
        self.steps += 1;
        if self.params.diag_every > 0 && self.steps.is_multiple_of(self.params.diag_every) {
            self.push_record();
        }
        Ok(dt)
    }

    /// Steps until the state reaches time `target` exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<(), SchemeError> {
        while self.state.t < target {
            self.step_toward(target)?;
        }
        Ok(())
    }

    /// Runs to `t_end` and closes the series with a final record.
    pub fn finish(mut self) -> Result<(State, DiagnosticsSeries), SchemeError> {
        let t_end = self.params.t_end;
        self.advance_to(t_end)?;
        if self.last_recorded_step != self.steps {
            self.push_record();
        }
        Ok((self.state, self.series))
    }
}

/// Floors the initial data, steps to `t_end` and returns the final state with
/// the diagnostics series.
pub fn run(
    initial: &InitialData,
    params: &SchemeParams,
    model: &ReactionModel,
) -> Result<(State, DiagnosticsSeries), SchemeError> {
    Simulation::new(initial, params, model)?.finish()
}

/// Compares `n` with the subsolution `delta exp(-|x|^2/2 - c t)`.
///
/// Passes when `n >= subsolution - dx max|∇ subsolution|` in every cell;
/// also returns the smallest `n - subsolution`.
pub fn check_floor(state: &State, delta: f64, c_rate: f64) -> (bool, f64) {
    let grid = state.grid();
    let decay = (-c_rate * state.t).exp();
    // max of |x| exp(-|x|^2/2) is exp(-1/2) at |x| = 1
    let tol = grid.dx() * delta * (-0.5f64).exp() * decay;
    let mut worst = f64::INFINITY;
    for i in 0..grid.len() {
        let sub = delta * (-0.5 * grid.radius_sq(i)).exp() * decay;
        worst = worst.min(state.n[i] - sub);
    }
    (worst >= -tol, worst)
}
