//! Growth/death rate families and the checks that gate them.

use super::ModelError;

/// Number of pressure samples used by the validators and the rate bound.
pub const PRESSURE_SAMPLES: usize = 10_000;

/// Ratio above which the sampled cancellation supremum is treated as divergent
/// when the number of samples doubles.
const CANCELLATION_GROWTH_LIMIT: f64 = 1.01;

/// Values of the four rate functions at one pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub f1: f64,
    pub f2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Rates {
    /// Total proliferation rate of species 1 cells.
    pub fn f(&self) -> f64 {
        self.f1 + self.f2
    }

    /// Total proliferation rate of species 2 cells.
    pub fn g(&self) -> f64 {
        self.g1 + self.g2
    }
}

/// Piecewise-linear rate table indexed by pressure, constant beyond its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pressures: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl RateTable {
    pub fn new(
        pressures: Vec<f64>,
        f1: Vec<f64>,
        f2: Vec<f64>,
        g1: Vec<f64>,
        g2: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = pressures.len();
        if n == 0 || [&f1, &f2, &g1, &g2].iter().any(|c| c.len() != n) {
            return Err(ModelError::BadRateTable(
                "all columns must be non-empty and of equal length".into(),
            ));
        }
        if pressures.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::BadRateTable(
                "pressures must be strictly increasing".into(),
            ));
        }
        if [&pressures, &f1, &f2, &g1, &g2]
            .iter()
            .any(|c| c.iter().any(|v| !v.is_finite()))
        {
            return Err(ModelError::BadRateTable("entries must be finite".into()));
        }
        Ok(Self {
            pressures,
            f1,
            f2,
            g1,
            g2,
        })
    }

    fn eval(&self, p: f64) -> Rates {
        let ps = &self.pressures;
        let last = ps.len() - 1;
        let (k, w) = if p <= ps[0] {
            (0, 0.0)
        } else if p >= ps[last] {
            (last, 0.0)
        } else {
            let k = ps.partition_point(|&q| q <= p) - 1;
            (k, (p - ps[k]) / (ps[k + 1] - ps[k]))
        };
        let lerp = |col: &[f64]| {
            if w == 0.0 {
                col[k]
            } else {
                col[k] + w * (col[k + 1] - col[k])
            }
        };
        Rates {
            f1: lerp(&self.f1),
            f2: lerp(&self.f2),
            g1: lerp(&self.g1),
            g2: lerp(&self.g2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactionFamily {
    /// `F = G = r (P_H - p)`, split between the species by `theta` (for `F`)
    /// and `eta` (for `G`).
    LinearSharedRate { rate: f64, theta: f64, eta: f64 },
    /// `F = r (P_H - p)` and `G = F - kappa p^{1/(2 gamma)} (P_H - p) / P_H`.
    LinearSplitRate {
        rate: f64,
        theta: f64,
        eta: f64,
        kappa: f64,
    },
    Custom(RateTable),
}

/// Pressure law exponent, homeostatic pressure and rate family.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionModel {
    gamma: f64,
    homeostatic_pressure: f64,
    family: ReactionFamily,
    rate_bound: f64,
}

impl ReactionModel {
    pub fn new(
        gamma: f64,
        homeostatic_pressure: f64,
        family: ReactionFamily,
    ) -> Result<Self, ModelError> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(ModelError::BadGamma(gamma));
        }
        if !(homeostatic_pressure > 0.0 && homeostatic_pressure.is_finite()) {
            return Err(ModelError::BadHomeostaticPressure(homeostatic_pressure));
        }
        match &family {
            ReactionFamily::LinearSharedRate { rate, theta, eta }
            | ReactionFamily::LinearSplitRate {
                rate, theta, eta, ..
            } => {
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(ModelError::BadParameter("growth rate", *rate));
                }
                for (name, v) in [("theta", *theta), ("eta", *eta)] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(ModelError::BadParameter(name, v));
                    }
                }
                if let ReactionFamily::LinearSplitRate { kappa, .. } = &family {
                    if !(*kappa >= 0.0 && kappa.is_finite()) {
                        return Err(ModelError::BadParameter("kappa", *kappa));
                    }
                }
            }
            ReactionFamily::Custom(_) => {}
        }
        let mut model = Self {
            gamma,
            homeostatic_pressure,
            family,
            rate_bound: 0.0,
        };
        model.rate_bound = model.sampled_rate_bound();
        Ok(model)
    }

    /// The default model: `gamma = 2`, `P_H = 1`, shared linear rates with `r = 1`.
    pub fn default_shared() -> Self {
        Self::new(
            2.0,
            1.0,
            ReactionFamily::LinearSharedRate {
                rate: 1.0,
                theta: 0.5,
                eta: 0.5,
            },
        )
        .expect("default parameters are valid")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn homeostatic_pressure(&self) -> f64 {
        self.homeostatic_pressure
    }

    /// Density at which the pressure equals `P_H`.
    pub fn homeostatic_density(&self) -> f64 {
        self.homeostatic_pressure.powf(1.0 / self.gamma)
    }

    pub fn family(&self) -> &ReactionFamily {
        &self.family
    }

    pub fn rates(&self, p: f64) -> Rates {
        let ph = self.homeostatic_pressure;
        match &self.family {
            ReactionFamily::LinearSharedRate { rate, theta, eta } => {
                let f = rate * (ph - p);
                Rates {
                    f1: theta * f,
                    f2: (1.0 - theta) * f,
                    g1: (1.0 - eta) * f,
                    g2: eta * f,
                }
            }
            ReactionFamily::LinearSplitRate {
                rate,
                theta,
                eta,
                kappa,
            } => {
                let f = rate * (ph - p);
                let g = f - kappa * p.max(0.0).powf(0.5 / self.gamma) * (ph - p) / ph;
                Rates {
                    f1: theta * f,
                    f2: (1.0 - theta) * f,
                    g1: (1.0 - eta) * g,
                    g2: eta * g,
                }
            }
            ReactionFamily::Custom(table) => table.eval(p),
        }
    }

    /// Net growth rate `R = c1 F(p) + (1 - c1) G(p)`.
    pub fn total_rate(&self, c1: f64, p: f64) -> f64 {
        let r = self.rates(p);
        c1 * r.f() + (1.0 - c1) * r.g()
    }

    /// `max |c1 F(p) + (1 - c1) G(p)|` over `c1 in [0,1]`, `p in [0, P_H]`,
    /// evaluated on the sample grid at construction.
    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    fn sampled_rate_bound(&self) -> f64 {
        // linear in c1, so the extremes sit at c1 = 0 or 1
        (0..=PRESSURE_SAMPLES)
            .map(|k| {
                let p = self.homeostatic_pressure * k as f64 / PRESSURE_SAMPLES as f64;
                let r = self.rates(p);
                r.f().abs().max(r.g().abs())
            })
            .fold(0.0, f64::max)
    }

    /// `true` when `F ≡ G` for every pressure, so `R` does not depend on `c1`.
    pub fn is_shared(&self) -> bool {
        matches!(self.family, ReactionFamily::LinearSharedRate { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Contact inhibition: `F, G <= 0` for every sampled `p >= P_H`.
    pub passes_3: bool,
    /// `gamma > 2 - 4/d`.
    pub passes_7_gamma: bool,
    /// The sampled cancellation supremum stays bounded under refinement.
    pub passes_7_cancellation: bool,
    pub estimated_c_h: f64,
    pub r_inf_norm: f64,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.passes_3 && self.passes_7_gamma && self.passes_7_cancellation
    }
}

fn cancellation_sup(model: &ReactionModel, samples: usize) -> f64 {
    if model.is_shared() {
        // F and G are the same function; sampling would only see split rounding
        return 0.0;
    }
    let ph = model.homeostatic_pressure();
    let top = (2.0 * ph).max(1.0);
    let h = top / samples as f64;
    (1..=samples)
        .map(|k| k as f64 * h)
        .take_while(|&p| p <= ph)
        .map(|p| {
            let r = model.rates(p);
            (r.f() - r.g()).powi(2) / p.powf(1.0 / model.gamma())
        })
        .fold(0.0, f64::max)
}

/// Samples the rate family and checks the structural assumptions it must satisfy.
pub fn validate_assumptions(model: &ReactionModel, dim: usize) -> AssumptionReport {
    let ph = model.homeostatic_pressure();
    let top = (2.0 * ph).max(1.0);
    let passes_3 = (0..=PRESSURE_SAMPLES)
        .map(|k| top * k as f64 / PRESSURE_SAMPLES as f64)
        .chain(std::iter::once(ph))
        .filter(|&p| p >= ph)
        .all(|p| {
            let r = model.rates(p);
            r.f() <= 0.0 && r.g() <= 0.0
        });
    let passes_7_gamma = model.gamma() > 2.0 - 4.0 / dim as f64;
    let coarse = cancellation_sup(model, PRESSURE_SAMPLES);
    let fine = cancellation_sup(model, 2 * PRESSURE_SAMPLES);
    let grows = fine > CANCELLATION_GROWTH_LIMIT * coarse;
    let passes_7_cancellation = fine.is_finite() && !grows;
    AssumptionReport {
        passes_3,
        passes_7_gamma,
        passes_7_cancellation,
        estimated_c_h: fine,
        r_inf_norm: model.rate_bound(),
    }
}

/// Decay rate `c` making `delta exp(-|x|^2/2 - c t)` a subsolution of the
/// total-density equation.
///
/// The constraint reduces to `c >= gamma d delta^gamma + ||R||_inf`, with the
/// worst case at `x = 0`, `t = 0`.
pub fn subsolution_rate(model: &ReactionModel, delta: f64, dim: usize) -> f64 {
    let gamma = model.gamma();
    gamma * dim as f64 * delta.powf(gamma) + model.rate_bound()
}
