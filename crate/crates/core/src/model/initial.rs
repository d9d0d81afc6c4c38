//! Initial data, the Barenblatt source solution and the Gaussian floor.

use statrs::function::gamma::gamma as gamma_fn;

use super::{ModelError, ReactionModel};
use crate::field::{Field, Grid};

/// Relative slack allowed when checking `p0 <= P_H` on constructed data.
const HOMEOSTATIC_SLACK: f64 = 1e-12;

/// Species densities at the start time.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub n1: Field,
    pub n2: Field,
    /// Start time of the run.
    pub t0: f64,
}

impl InitialData {
    /// Validates `n1, n2 >= 0` and `(n1 + n2)^gamma <= P_H`.
    pub fn new(n1: Field, n2: Field, t0: f64, model: &ReactionModel) -> Result<Self, ModelError> {
        if n1.grid() != n2.grid() {
            return Err(ModelError::GridMismatch);
        }
        n1.check_nonnegative("n1")?;
        n2.check_nonnegative("n2")?;
        let data = Self { n1, n2, t0 };
        let p_max = data.total().max().powf(model.gamma());
        let ph = model.homeostatic_pressure();
        if p_max > ph * (1.0 + HOMEOSTATIC_SLACK) {
            return Err(ModelError::InitialPressureTooHigh {
                p_max,
                homeostatic_pressure: ph,
            });
        }
        Ok(data)
    }

    pub fn grid(&self) -> &Grid {
        self.n1.grid()
    }

    pub fn total(&self) -> Field {
        self.n1.zip_map(&self.n2, |a, b| a + b)
    }

    /// Share of the total mass held by species 1, or 1/2 when there is no mass.
    pub fn global_fraction(&self) -> f64 {
        let m1: f64 = self.n1.values().iter().sum();
        let m2: f64 = self.n2.values().iter().sum();
        if m1 + m2 > 0.0 {
            m1 / (m1 + m2)
        } else {
            0.5
        }
    }
}

/// Adds `delta exp(-|x|^2/2)` to the total density.
///
/// The added density is split by the local species fractions; in vacuum cells
/// it is split by the global mass fractions (half and half when both species
/// are absent). Fails when `(max n0 + delta)^gamma > P_H`.
pub fn gaussian_floor(
    data: &InitialData,
    delta: f64,
    model: &ReactionModel,
) -> Result<InitialData, ModelError> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(ModelError::BadDelta(delta));
    }
    if delta == 0.0 {
        return Ok(data.clone());
    }
    let n_max = data.total().max();
    let ph = model.homeostatic_pressure();
    if (n_max + delta).powf(model.gamma()) > ph {
        return Err(ModelError::FloorBreaksHomeostatic {
            n_max,
            delta,
            homeostatic_pressure: ph,
        });
    }
    let grid = *data.grid();
    let global = data.global_fraction();
    let mut n1 = data.n1.clone();
    let mut n2 = data.n2.clone();
    for i in 0..grid.len() {
        let add = delta * (-0.5 * grid.radius_sq(i)).exp();
        let total = data.n1[i] + data.n2[i];
        let share = if total > 0.0 {
            data.n1[i] / total
        } else {
            global
        };
        n1[i] += share * add;
        n2[i] += (1.0 - share) * add;
    }
    Ok(InitialData {
        n1,
        n2,
        t0: data.t0,
    })
}

/// Source-type self-similar solution of `∂t n = div(n ∇n^gamma)` in `d`
/// dimensions with total mass `mass`.
///
/// With `m = gamma + 1` and `tau = gamma t / (gamma + 1)` the density is
/// `tau^-a (C - k |x|^2 tau^-2b)_+^{1/(m-1)}` with `a = d/(d(m-1)+2)`,
/// `b = a/d` and `k = a(m-1)/(2md)`; `C` is fixed by the mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    gamma: f64,
    dim: usize,
    mass: f64,
    alpha: f64,
    beta: f64,
    kappa: f64,
    level: f64,
}

impl Barenblatt {
    pub fn new(gamma: f64, dim: usize, mass: f64) -> Result<Self, ModelError> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(ModelError::BadGamma(gamma));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ModelError::BadBarenblattArguments { t: f64::NAN, mass });
        }
        let d = dim as f64;
        let m = gamma + 1.0;
        let alpha = d / (d * (m - 1.0) + 2.0);
        let beta = alpha / d;
        let kappa = alpha * (m - 1.0) / (2.0 * m * d);
        // mass = C^{q + d/2} k^{-d/2} pi^{d/2} Γ(q+1)/Γ(q+1+d/2), q = 1/(m-1)
        let q = 1.0 / (m - 1.0);
        let ball = std::f64::consts::PI.powf(d / 2.0) * gamma_fn(q + 1.0) / gamma_fn(q + 1.0 + d / 2.0);
        let level = (mass * kappa.powf(d / 2.0) / ball).powf(1.0 / (q + d / 2.0));
        Ok(Self {
            gamma,
            dim,
            mass,
            alpha,
            beta,
            kappa,
            level,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Porous-medium time `gamma t / (gamma + 1)`.
    pub fn tau(&self, t: f64) -> f64 {
        self.gamma / (self.gamma + 1.0) * t
    }

    pub fn support_radius(&self, t: f64) -> f64 {
        (self.level / self.kappa).sqrt() * self.tau(t).powf(self.beta)
    }

    /// Exact pressure `n^gamma`, which is affine in `|x|^2` on the support.
    pub fn pressure_at(&self, r2: f64, t: f64) -> f64 {
        let tau = self.tau(t);
        let inner = self.level - self.kappa * r2 * tau.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            0.0
        } else {
            tau.powf(-self.alpha * self.gamma) * inner
        }
    }

    pub fn density_at(&self, r2: f64, t: f64) -> f64 {
        let tau = self.tau(t);
        let inner = self.level - self.kappa * r2 * tau.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            0.0
        } else {
            tau.powf(-self.alpha) * inner.powf(1.0 / self.gamma)
        }
    }

    /// Exact `∇p` at `x`.
    pub fn pressure_gradient_at(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if self.pressure_at(r2, t) <= 0.0 {
            return [0.0; 2];
        }
        let tau = self.tau(t);
        let s = -2.0 * self.kappa * tau.powf(-self.alpha * self.gamma - 2.0 * self.beta);
        [s * x[0], s * x[1]]
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Field {
        Field::from_fn(*grid, |x| self.density_at(x[0] * x[0] + x[1] * x[1], t))
    }
}

/// Barenblatt density sampled at cell centers.
pub fn barenblatt(grid: &Grid, gamma: f64, t: f64, mass: f64) -> Result<Field, ModelError> {
    if !(t > 0.0) || !(mass > 0.0) {
        return Err(ModelError::BadBarenblattArguments { t, mass });
    }
    Ok(Barenblatt::new(gamma, grid.dim(), mass)?.sample(grid, t))
}
