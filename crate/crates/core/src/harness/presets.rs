//! Built-in initial data.
//!
//! | preset                 | keys (default)                                                        |
//! |------------------------|-----------------------------------------------------------------------|
//! | `barenblatt`           | `mass` (1), `t0` (0.5); species 1 only                                |
//! | `gaussian_bumps`       | `amplitude1` (0.4), `amplitude2` (0.3), `width` (0.6), `separation` (1.5) |
//! | `two_bumps_segregated` | `amplitude` (0.5), `width` (0.8), `separation` (2.5)                   |
//! | `homeostatic_plateau`  | `fraction` (0.5)                                                      |
//!
//! Bumps are centered at `(±separation/2, 0)`, species 1 on the left.
//! Gaussian bumps have standard deviation `width`; segregated bumps are
//! `amplitude (1 - r^2/width^2)_+^2` and must not overlap.

use super::config::{ConfigError, PresetKeys};
use crate::field::{Field, Grid};
use crate::model::{barenblatt, InitialData, ModelError, ReactionModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Barenblatt {
        mass: f64,
        t0: f64,
    },
    GaussianBumps {
        amplitude1: f64,
        amplitude2: f64,
        width: f64,
        separation: f64,
    },
    TwoBumpsSegregated {
        amplitude: f64,
        width: f64,
        separation: f64,
    },
    /// `n = P_H^{1/gamma}` everywhere, split by `fraction`.
    HomeostaticPlateau {
        fraction: f64,
    },
}

fn invalid(msg: String) -> ConfigError {
    ConfigError::Invalid(msg)
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Barenblatt { .. } => "barenblatt",
            Preset::GaussianBumps { .. } => "gaussian_bumps",
            Preset::TwoBumpsSegregated { .. } => "two_bumps_segregated",
            Preset::HomeostaticPlateau { .. } => "homeostatic_plateau",
        }
    }

    pub(crate) fn read(name: &str, grid: &Grid, keys: &mut PresetKeys) -> Result<Self, ConfigError> {
        let l = grid.half_width();
        let preset = match name {
            "barenblatt" => Preset::Barenblatt {
                mass: keys.real("mass", 1.0)?,
                t0: keys.real("t0", 0.5)?,
            },
            "gaussian_bumps" => Preset::GaussianBumps {
                amplitude1: keys.real("amplitude1", 0.4)?,
                amplitude2: keys.real("amplitude2", 0.3)?,
                width: keys.real("width", 0.6)?,
                separation: keys.real("separation", 1.5)?,
            },
            "two_bumps_segregated" => Preset::TwoBumpsSegregated {
                amplitude: keys.real("amplitude", 0.5)?,
                width: keys.real("width", 0.8)?,
                separation: keys.real("separation", 2.5)?,
            },
            "homeostatic_plateau" => Preset::HomeostaticPlateau {
                fraction: keys.real("fraction", 0.5)?,
            },
            other => {
                return Err(invalid(format!(
                    "unknown preset `{other}` (expected barenblatt, gaussian_bumps, two_bumps_segregated or homeostatic_plateau)"
                )))
            }
        };
        preset.check_ranges(l)?;
        Ok(preset)
    }

    fn check_ranges(&self, l: f64) -> Result<(), ConfigError> {
        match *self {
            Preset::Barenblatt { mass, t0 } => {
                if !(mass > 0.0) || !(t0 > 0.0) {
                    return Err(invalid(format!(
                        "barenblatt needs mass > 0 and t0 > 0 (mass = {mass}, t0 = {t0})"
                    )));
                }
            }
            Preset::GaussianBumps {
                amplitude1,
                amplitude2,
                width,
                separation,
            } => {
                if !(amplitude1 >= 0.0 && amplitude2 >= 0.0) {
                    return Err(invalid("gaussian_bumps amplitudes must be >= 0".into()));
                }
                if !(width > 0.0 && width <= l / 4.0) {
                    return Err(invalid(format!(
                        "gaussian_bumps width must lie in (0, {}], got {width}",
                        l / 4.0
                    )));
                }
                if !(separation.abs() <= l) {
                    return Err(invalid(format!(
                        "gaussian_bumps separation must satisfy |separation| <= {l}, got {separation}"
                    )));
                }
            }
            Preset::TwoBumpsSegregated {
                amplitude,
                width,
                separation,
            } => {
                if !(amplitude >= 0.0) || !(width > 0.0) {
                    return Err(invalid(
                        "two_bumps_segregated needs amplitude >= 0 and width > 0".into(),
                    ));
                }
                if !(separation > 2.0 * width) {
                    return Err(invalid(format!(
                        "two_bumps_segregated supports overlap: separation {separation} <= 2 * width {width}"
                    )));
                }
                if separation / 2.0 + width > 0.9 * l {
                    return Err(invalid(format!(
                        "two_bumps_segregated supports reach past 0.9 of the half width {l}"
                    )));
                }
            }
            Preset::HomeostaticPlateau { fraction } => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(invalid(format!(
                        "homeostatic_plateau fraction must lie in [0, 1], got {fraction}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn start_time(&self) -> f64 {
        match *self {
            Preset::Barenblatt { t0, .. } => t0,
            _ => 0.0,
        }
    }

    /// Samples the preset on `grid`.
    pub fn build(&self, grid: &Grid, model: &ReactionModel) -> Result<InitialData, ModelError> {
        let g = *grid;
        let (n1, n2) = match *self {
            Preset::Barenblatt { mass, t0 } => {
                (barenblatt(grid, model.gamma(), t0, mass)?, Field::zeros(g))
            }
            Preset::GaussianBumps {
                amplitude1,
                amplitude2,
                width,
                separation,
            } => {
                let bump = |a: f64, c: f64| {
                    Field::from_fn(g, move |x| {
                        let r2 = (x[0] - c).powi(2) + x[1] * x[1];
                        a * (-0.5 * r2 / (width * width)).exp()
                    })
                };
                (
                    bump(amplitude1, -0.5 * separation),
                    bump(amplitude2, 0.5 * separation),
                )
            }
            Preset::TwoBumpsSegregated {
                amplitude,
                width,
                separation,
            } => {
                let bump = |c: f64| {
                    Field::from_fn(g, move |x| {
                        let r2 = (x[0] - c).powi(2) + x[1] * x[1];
                        let s = (1.0 - r2 / (width * width)).max(0.0);
                        amplitude * s * s
                    })
                };
                (bump(-0.5 * separation), bump(0.5 * separation))
            }
            Preset::HomeostaticPlateau { fraction } => {
                let n = model.homeostatic_density();
                (
                    Field::constant(g, fraction * n),
                    Field::constant(g, (1.0 - fraction) * n),
                )
            }
        };
        InitialData::new(n1, n2, self.start_time(), model)
    }
}
