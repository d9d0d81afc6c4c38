//! Constitutive content of the model: the pressure law, growth rate families
//! with their structural checks, and initial-data constructors.

mod initial;
mod reaction;

pub use initial::{barenblatt, gaussian_floor, Barenblatt, InitialData};
pub use reaction::{
    subsolution_rate, validate_assumptions, AssumptionReport, RateTable, Rates, ReactionFamily,
    ReactionModel, PRESSURE_SAMPLES,
};

use thiserror::Error;

use crate::field::{Field, GridError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("pressure exponent must satisfy gamma > 1, got {0}")]
    BadGamma(f64),
    #[error("homeostatic pressure must be positive, got {0}")]
    BadHomeostaticPressure(f64),
    #[error("invalid {0}: {1}")]
    BadParameter(&'static str, f64),
    #[error("invalid rate table: {0}")]
    BadRateTable(String),
    #[error("negative density {value} at cell {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("Barenblatt profile needs t > 0 and mass > 0 (t = {t}, mass = {mass})")]
    BadBarenblattArguments { t: f64, mass: f64 },
    #[error("floor delta must be finite and >= 0, got {0}")]
    BadDelta(f64),
    #[error("floor pushes the initial pressure above P_H: ({n_max} + {delta})^gamma > {homeostatic_pressure}")]
    FloorBreaksHomeostatic {
        n_max: f64,
        delta: f64,
        homeostatic_pressure: f64,
    },
    #[error("initial pressure {p_max} exceeds the homeostatic pressure {homeostatic_pressure}")]
    InitialPressureTooHigh { p_max: f64, homeostatic_pressure: f64 },
    #[error("species densities live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Pointwise pressure law `p = n^gamma`.
pub fn pressure(n: &Field, gamma: f64) -> Result<Field, ModelError> {
    if !(gamma > 1.0) {
        return Err(ModelError::BadGamma(gamma));
    }
    if let Some((index, &value)) = n.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(ModelError::NegativeDensity { index, value });
    }
    Ok(n.map(|v| v.powf(gamma)))
}
