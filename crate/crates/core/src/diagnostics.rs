//! Monitored quantities of the a priori estimates and their audit.
//!
//! Every quantity is a reduction over one [`State`]. Quantities involving a
//! division by the pressure are evaluated through power-of-pressure gradient
//! identities, so states with exact vacuum give finite values.

use std::fmt;

use crate::field::{Field, Grid, GridError};
use crate::model::ReactionModel;
use crate::scheme::State;
use crate::stencil::{gradient, laplacian, localizer};

/// Cells with a density below this contribute nothing to the entropy.
const ENTROPY_CUTOFF: f64 = 1e-300;

/// Maximum principle slack on `p <= P_H`.
pub const PRESSURE_SLACK: f64 = 1e-6;
/// Slack on the Gronwall mass bound.
pub const MASS_SLACK: f64 = 1e-3;
/// Allowed growth of bounded quantities over their reference value.
pub const BOUNDEDNESS_FACTOR: f64 = 2.0;
/// Fraction of the recorded time span treated as the initial transient.
const TRANSIENT_FRACTION: f64 = 0.1;

/// Radii of the two cutoff functions: `w_radius` weights the Laplacian
/// quantities, `moment_radius` the second moment and the entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizerRadii {
    pub w_radius: f64,
    pub moment_radius: f64,
}

impl LocalizerRadii {
    /// `0.6 L` and `0.8 L`, each pulled back to `L - 1` when the bridge would
    /// not fit inside the box.
    pub fn defaults_for(grid: &Grid) -> Self {
        let l = grid.half_width();
        let fit = |r: f64| r.min(l - 1.0).max(0.0);
        Self {
            w_radius: fit(0.6 * l),
            moment_radius: fit(0.8 * l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub mass_bound: f64,
    pub p_max: f64,
    pub second_moment: f64,
    pub entropy: f64,
    pub entropy_diss_cum: f64,
    pub w_minus_l2: f64,
    pub w_minus_l3_cum: f64,
    pub lap_l1: f64,
    pub energy: f64,
    pub energy_diss_cum: f64,
    pub clamp_total: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,mass,mass_bound,p_max,second_moment,entropy,entropy_diss_cum,w_minus_L2,w_minus_L3_cum,lap_L1,energy,energy_diss_cum,clamp_total";

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.mass,
            self.mass_bound,
            self.p_max,
            self.second_moment,
            self.entropy,
            self.entropy_diss_cum,
            self.w_minus_l2,
            self.w_minus_l3_cum,
            self.lap_l1,
            self.energy,
            self.energy_diss_cum,
            self.clamp_total,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsSeries {
    pub fn last(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }

    pub fn max_of(&self, f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
        self.records.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn pressure_of(state: &State, model: &ReactionModel) -> Field {
    state.n.map(|v| v.max(0.0).powf(model.gamma()))
}

/// Localized entropy `Σ n (ln n - 1) Φ dx^d` and the rate
/// `Σ p^{-1+1/gamma} |∇p|^2 Φ dx^d`, the latter computed as `|∇p^s|^2 / s^2`
/// with `s = (1 + 1/gamma)/2`.
pub fn entropy_and_dissipation(state: &State, model: &ReactionModel, phi_l: &Field) -> (f64, f64) {
    let p = pressure_of(state, model);
    let entropy = state
        .n
        .map(|n| if n < ENTROPY_CUTOFF { 0.0 } else { n * (n.ln() - 1.0) })
        .weighted_integral(phi_l);
    (entropy, entropy_dissipation_rate(&p, model, phi_l))
}

fn entropy_dissipation_rate(p: &Field, model: &ReactionModel, phi_l: &Field) -> f64 {
    let s = 0.5 * (1.0 + 1.0 / model.gamma());
    gradient(&p.map(|v| v.powf(s))).norm_sq().weighted_integral(phi_l) / (s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WDiagnostics {
    /// `Σ |w|_-^2 φ dx^d`
    pub w_minus_l2: f64,
    /// `Σ |w|_-^3 φ dx^d`, integrated in time by the caller.
    pub w_minus_l3_rate: f64,
    /// `Σ |Δp| φ dx^d`
    pub lap_l1: f64,
}

/// Negative part of `w = Δp + R` and the localized `L^1` norm of `Δp`.
pub fn w_diagnostics(state: &State, model: &ReactionModel, phi: &Field) -> WDiagnostics {
    w_from_pressure(state, &pressure_of(state, model), model, phi)
}

fn w_from_pressure(state: &State, p: &Field, model: &ReactionModel, phi: &Field) -> WDiagnostics {
    let lap = laplacian(p);
    let vol = p.grid().cell_volume();
    let mut out = WDiagnostics {
        w_minus_l2: 0.0,
        w_minus_l3_rate: 0.0,
        lap_l1: 0.0,
    };
    for i in 0..p.grid().len() {
        let w = lap[i] + model.total_rate(state.c1[i], p[i]);
        let wm = (-w).max(0.0);
        out.w_minus_l2 += wm * wm * phi[i];
        out.w_minus_l3_rate += wm * wm * wm * phi[i];
        out.lap_l1 += lap[i].abs() * phi[i];
    }
    out.w_minus_l2 *= vol;
    out.w_minus_l3_rate *= vol;
    out.lap_l1 *= vol;
    out
}

/// `Σ |x|^2 n Φ dx^d`
pub fn second_moment(state: &State, phi_l: &Field) -> f64 {
    let grid = *state.n.grid();
    Field::from_fn(grid, |x| x[0] * x[0] + x[1] * x[1])
        .zip_map(&state.n, |r2, n| r2 * n)
        .weighted_integral(phi_l)
}

/// Energy `Σ p^a |∇p|^2 / 2 dx^d` with `a = 2/gamma`, and the dissipation
/// rate `Σ A^2 dx^d` with `A = div(p^{(a+1)/2} ∇p) - p^{(a+1)/2} |∇p|^2 / (2p)`.
pub fn energy_diagnostics(state: &State, model: &ReactionModel) -> (f64, f64) {
    energy_from_pressure(&pressure_of(state, model), model)
}

fn energy_from_pressure(p: &Field, model: &ReactionModel) -> (f64, f64) {
    let a = 2.0 / model.gamma();
    let energy = gradient(p)
        .norm_sq()
        .zip_map(p, |g2, pv| 0.5 * pv.powf(a) * g2)
        .integral();
    // p^{(a+1)/2} ∇p = (2/(a+3)) ∇p^{(a+3)/2}
    // p^{(a+1)/2} |∇p|^2 / (2p) = |∇p^{(a+3)/4}|^2 / (2 ((a+3)/4)^2)
    let k_div = 0.5 * (a + 3.0);
    let k_sq = 0.25 * (a + 3.0);
    let div_term = laplacian(&p.map(|v| v.powf(k_div)));
    let sq_term = gradient(&p.map(|v| v.powf(k_sq))).norm_sq();
    let c_div = 1.0 / k_div;
    let c_sq = 1.0 / (2.0 * k_sq * k_sq);
    let dissipation = div_term
        .zip_map(&sq_term, |d, s| {
            let integrand = c_div * d - c_sq * s;
            integrand * integrand
        })
        .integral();
    (energy, dissipation)
}

/// Fraction of the mass held in the outer 10% shell of the box.
pub fn outer_shell_fraction(state: &State) -> f64 {
    let grid = *state.n.grid();
    let edge = 0.9 * grid.half_width();
    let total: f64 = state.n.values().iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let shell: f64 = (0..grid.len())
        .filter(|&i| grid.coords(i)[..grid.dim()].iter().any(|c| c.abs() > edge))
        .map(|i| state.n[i])
        .sum();
    shell / total
}

/// Running accumulator of the diagnostics along a run.
#[derive(Debug, Clone)]
pub struct Monitor {
    phi_w: Field,
    phi_moment: Field,
    mass0: f64,
    t0: f64,
    rate_bound: f64,
    entropy_diss_cum: f64,
    w_minus_l3_cum: f64,
    energy_diss_cum: f64,
    clamp_total: f64,
}

impl Monitor {
    pub fn new(
        initial: &State,
        model: &ReactionModel,
        radii: LocalizerRadii,
    ) -> Result<Self, GridError> {
        let grid = initial.n.grid();
        Ok(Self {
            phi_w: localizer(grid, radii.w_radius)?,
            phi_moment: localizer(grid, radii.moment_radius)?,
            mass0: initial.n.integral(),
            t0: initial.t,
            rate_bound: model.rate_bound(),
            entropy_diss_cum: 0.0,
            w_minus_l3_cum: 0.0,
            energy_diss_cum: 0.0,
            clamp_total: 0.0,
        })
    }

    pub fn phi_w(&self) -> &Field {
        &self.phi_w
    }

    pub fn phi_moment(&self) -> &Field {
        &self.phi_moment
    }

    /// Left-endpoint update of the time-integrated quantities over a step of
    /// length `dt` starting from `state`.
    pub fn accumulate(&mut self, state: &State, model: &ReactionModel, dt: f64) {
        let p = pressure_of(state, model);
        self.entropy_diss_cum += dt * entropy_dissipation_rate(&p, model, &self.phi_moment);
        self.w_minus_l3_cum += dt * w_from_pressure(state, &p, model, &self.phi_w).w_minus_l3_rate;
        self.energy_diss_cum += dt * energy_from_pressure(&p, model).1;
    }

    pub fn add_clamp(&mut self, amount: f64) {
        self.clamp_total += amount;
    }

    pub fn clamp_total(&self) -> f64 {
        self.clamp_total
    }

    pub fn record(&self, state: &State, model: &ReactionModel) -> DiagnosticsRecord {
        let p = pressure_of(state, model);
        let (entropy, _) = entropy_and_dissipation(state, model, &self.phi_moment);
        let w = w_from_pressure(state, &p, model, &self.phi_w);
        let (energy, _) = energy_from_pressure(&p, model);
        DiagnosticsRecord {
            t: state.t,
            mass: state.n.integral(),
            mass_bound: self.mass0 * ((state.t - self.t0) * self.rate_bound).exp(),
            p_max: p.max(),
            second_moment: second_moment(state, &self.phi_moment),
            entropy,
            entropy_diss_cum: self.entropy_diss_cum,
            w_minus_l2: w.w_minus_l2,
            w_minus_l3_cum: self.w_minus_l3_cum,
            lap_l1: w.lap_l1,
            energy,
            energy_diss_cum: self.energy_diss_cum,
            clamp_total: self.clamp_total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundType {
    PointwiseBound,
    UniformInTime,
    CumulativeFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub quantity: &'static str,
    pub bound_type: BoundType,
    pub observed_max: f64,
    pub limit_used: f64,
    pub pass: bool,
    pub note: &'static str,
}

impl AuditEntry {
    fn new(
        quantity: &'static str,
        bound_type: BoundType,
        observed_max: f64,
        limit_used: f64,
        note: &'static str,
    ) -> Self {
        Self {
            quantity,
            bound_type,
            observed_max,
            limit_used,
            pass: observed_max <= limit_used,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, quantity: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:<17} {:>24} {:>24}  result", "quantity", "bound", "observed", "limit")?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<18} {:<17} {:>24.16e} {:>24.16e}  {}{}",
                e.quantity,
                format!("{:?}", e.bound_type),
                e.observed_max,
                e.limit_used,
                if e.pass { "PASS" } else { "FAIL" },
                if e.note.is_empty() { String::new() } else { format!("  ({})", e.note) },
            )?;
        }
        write!(f, "overall: {}", if self.all_pass() { "PASS" } else { "FAIL" })
    }
}

fn transient_max(series: &DiagnosticsSeries, f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    let t_first = series.records[0].t;
    let t_last = series.records[series.records.len() - 1].t;
    let cutoff = t_first + TRANSIENT_FRACTION * (t_last - t_first);
    series
        .records
        .iter()
        .filter(|r| r.t <= cutoff)
        .map(f)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks the recorded series against the bounds of the a priori estimates.
///
/// `refinement` optionally holds the same run on other grids, coarsest first;
/// cumulative quantities are then required to stay within
/// [`BOUNDEDNESS_FACTOR`] times the coarsest value.
///
/// # Panics
///
/// Panics if `series` is empty.
pub fn audit(
    series: &DiagnosticsSeries,
    model: &ReactionModel,
    refinement: &[DiagnosticsSeries],
) -> AuditReport {
    assert!(!series.records.is_empty(), "audit needs at least one record");
    let ph = model.homeostatic_pressure();
    let mut entries = vec![
        AuditEntry::new(
            "p_max",
            BoundType::PointwiseBound,
            series.max_of(|r| r.p_max),
            ph * (1.0 + PRESSURE_SLACK),
            "",
        ),
        AuditEntry::new(
            "mass",
            BoundType::PointwiseBound,
            series.max_of(|r| {
                if r.mass_bound > 0.0 {
                    r.mass / r.mass_bound
                } else if r.mass > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }),
            1.0 + MASS_SLACK,
            "ratio to Gronwall bound",
        ),
    ];

    type Getter = fn(&DiagnosticsRecord) -> f64;
    let cumulative: [(&'static str, Getter); 3] = [
        ("entropy_diss_cum", |r| r.entropy_diss_cum),
        ("w_minus_L3_cum", |r| r.w_minus_l3_cum),
        ("energy_diss_cum", |r| r.energy_diss_cum),
    ];
    for (name, get) in cumulative {
        let own = series.max_of(get);
        let (observed, limit, note) = if refinement.is_empty() {
            (own, f64::INFINITY, "finite")
        } else {
            let coarse = refinement[0].max_of(get);
            let observed = refinement.iter().map(|s| s.max_of(get)).fold(own, f64::max);
            (observed, BOUNDEDNESS_FACTOR * coarse, "refinement stability vs coarsest grid")
        };
        let entry = AuditEntry::new(name, BoundType::CumulativeFinite, observed, limit, note);
        entries.push(AuditEntry {
            pass: entry.pass && observed.is_finite(),
            ..entry
        });
    }

    let uniform: [(&'static str, Getter, &'static str); 3] = [
        ("w_minus_L2", |r| r.w_minus_l2, "2x initial transient; operational criterion near the free boundary"),
        ("lap_L1", |r| r.lap_l1, "2x initial transient"),
        ("energy", |r| r.energy, "2x initial transient"),
    ];
    for (name, get, note) in uniform {
        entries.push(AuditEntry::new(
            name,
            BoundType::UniformInTime,
            series.max_of(get),
            BOUNDEDNESS_FACTOR * transient_max(series, get),
            note,
        ));
    }
    AuditReport { entries }
}
