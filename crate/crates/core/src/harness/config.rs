//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [grid]
//! dim = 1
//! half_width = 6
//! cells_per_axis = 256
//!
//! [initial]
//! preset = barenblatt
//! mass = 1.0
//! ```
//!
//! Sections are `[grid]`, `[model]`, `[scheme]`, `[initial]` and `[output]`.
//! Every key is optional; each default that gets applied is listed in
//! [`RunConfig::defaults_applied`]. Unknown sections or keys, repeated keys
//! and malformed values are errors carrying the 1-based line number.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use thiserror::Error;

use super::presets::Preset;
use crate::diagnostics::LocalizerRadii;
use crate::field::{Grid, GridError};
use crate::model::{Barenblatt, ModelError, RateTable, ReactionFamily, ReactionModel};
use crate::scheme::{SchemeError, SchemeParams};

const SECTIONS: [&str; 5] = ["grid", "model", "scheme", "initial", "output"];

/// Largest share of the half width the Barenblatt support may reach at `t_end`.
pub const SUPPORT_FILL: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: key `{key}` repeated in [{section}]")]
    DuplicateKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub cells_per_axis: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, GridError> {
        Grid::new(self.dim, self.half_width, self.cells_per_axis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Preset(Preset),
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Steps between snapshots; 0 writes only the final one.
    pub snapshot_every: usize,
    pub emit_plots: bool,
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ReactionModel,
    pub scheme: SchemeParams,
    pub initial: InitialSource,
    pub output: OutputConfig,
    /// `section.key = value` for every default that was filled in.
    pub defaults_applied: Vec<String>,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        self.grid.build().expect("validated at parse time")
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Reader {
    entries: BTreeMap<(String, String), Entry>,
    used: BTreeSet<(String, String)>,
    defaults: Vec<String>,
}

fn strip_comment(line: &str) -> &str {
    let trimmed = line.trim_start();
    if trimmed.starts_with('#') || trimmed.starts_with(';') {
        return "";
    }
    match line.find(" #").or_else(|| line.find("\t#")) {
        Some(i) => &line[..i],
        None => line,
    }
}

impl Reader {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "section header must end with `]`".into(),
                })?;
                let name = name.trim().to_ascii_lowercase();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(ConfigError::UnknownSection { line, name });
                }
                section = Some(name);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("malformed key `{key}`"),
                });
            }
            let sec = section.clone().ok_or_else(|| ConfigError::Syntax {
                line,
                message: "key outside of any section".into(),
            })?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value)
                .to_string();
            if entries.contains_key(&(sec.clone(), key.clone())) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    section: sec,
                    key,
                });
            }
            entries.insert((sec, key), Entry { line, value });
        }
        Ok(Self {
            entries,
            used: BTreeSet::new(),
            defaults: Vec::new(),
        })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let k = (section.to_string(), key.to_string());
        let e = self.entries.get(&k)?;
        let out = (e.line, e.value.clone());
        self.used.insert(k);
        Some(out)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.entries
            .contains_key(&(section.to_string(), key.to_string()))
    }

    fn typed<T: std::fmt::Display>(
        &mut self,
        section: &str,
        key: &str,
        default: T,
        expected: &'static str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, ConfigError> {
        match self.take(section, key) {
            Some((line, value)) => parse(&value).ok_or(ConfigError::BadValue {
                line,
                key: format!("{section}.{key}"),
                value,
                expected,
            }),
            None => {
                self.defaults.push(format!("{section}.{key} = {default}"));
                Ok(default)
            }
        }
    }

    fn real(&mut self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.typed(section, key, default, "a finite real number", parse_real)
    }

    fn integer(&mut self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.typed(section, key, default, "a non-negative integer", |s| s.parse().ok())
    }

    fn boolean(&mut self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        self.typed(section, key, default, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn text(&mut self, section: &str, key: &str, default: &str) -> String {
        match self.take(section, key) {
            Some((_, v)) => v,
            None => {
                self.defaults.push(format!("{section}.{key} = {default}"));
                default.to_string()
            }
        }
    }

    fn optional_real(&mut self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(section, key) {
            Some((line, value)) => parse_real(&value).map(Some).ok_or(ConfigError::BadValue {
                line,
                key: format!("{section}.{key}"),
                value,
                expected: "a finite real number",
            }),
            None => Ok(None),
        }
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (line, value) = self.take(section, key).ok_or_else(|| {
            ConfigError::Invalid(format!("custom family needs `{section}.{key}`"))
        })?;
        value
            .split(',')
            .map(|s| parse_real(s.trim()))
            .collect::<Option<Vec<_>>>()
            .ok_or(ConfigError::BadValue {
                line,
                key: format!("{section}.{key}"),
                value,
                expected: "a comma-separated list of reals",
            })
    }

    fn finish(self) -> Result<Vec<String>, ConfigError> {
        if let Some(((section, key), e)) = self
            .entries
            .iter()
            .find(|(k, _)| !self.used.contains(*k))
        {
            return Err(ConfigError::UnknownKey {
                line: e.line,
                section: section.clone(),
                key: key.clone(),
            });
        }
        Ok(self.defaults)
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_family(r: &mut Reader) -> Result<ReactionFamily, ConfigError> {
    let name = r.text("model", "family", "linear_shared");
    match name.as_str() {
        "linear_shared" | "linear_split" => {
            let rate = r.real("model", "growth_rate", 1.0)?;
            let theta = r.real("model", "theta", 0.5)?;
            let eta = r.real("model", "eta", 0.5)?;
            if name == "linear_shared" {
                Ok(ReactionFamily::LinearSharedRate { rate, theta, eta })
            } else {
                // contact inhibition above P_H needs kappa p^{1/(2 gamma)} <= r P_H on the sampled range
                let kappa = r.real("model", "kappa", 0.5)?;
                Ok(ReactionFamily::LinearSplitRate {
                    rate,
                    theta,
                    eta,
                    kappa,
                })
            }
        }
        "custom" => {
            let p = r.list("model", "custom_p")?;
            let f1 = r.list("model", "custom_f1")?;
            let f2 = r.list("model", "custom_f2")?;
            let g1 = r.list("model", "custom_g1")?;
            let g2 = r.list("model", "custom_g2")?;
            Ok(ReactionFamily::Custom(RateTable::new(p, f1, f2, g1, g2)?))
        }
        other => Err(ConfigError::Invalid(format!(
            "unknown rate family `{other}` (expected linear_shared, linear_split or custom)"
        ))),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut r = Reader::parse(text)?;

    let grid_cfg = GridConfig {
        dim: r.integer("grid", "dim", 1)?,
        half_width: r.real("grid", "half_width", 6.0)?,
        cells_per_axis: r.integer("grid", "cells_per_axis", 256)?,
    };
    let grid = grid_cfg.build()?;

    let source = if r.has("initial", "snapshot") {
        if r.has("initial", "preset") {
            return Err(ConfigError::Invalid(
                "[initial] takes either `preset` or `snapshot`, not both".into(),
            ));
        }
        let (_, path) = r.take("initial", "snapshot").expect("checked above");
        InitialSource::Snapshot(PathBuf::from(path))
    } else {
        let name = r.text("initial", "preset", "gaussian_bumps");
        InitialSource::Preset(Preset::read(&name, &grid, &mut PresetKeys(&mut r))?)
    };

    // data that must stay reaction-free or floor-free gets matching defaults
    let (rate_default_zero, delta_default) = match &source {
        InitialSource::Preset(Preset::Barenblatt { .. }) => (true, 0.0),
        InitialSource::Preset(Preset::HomeostaticPlateau { .. }) => (false, 0.0),
        InitialSource::Snapshot(_) => (false, 0.0),
        _ => (false, SchemeParams::default().delta),
    };

    let gamma = r.real("model", "gamma", 2.0)?;
    let ph = r.real("model", "p_h", 1.0)?;
    let family = if rate_default_zero && !r.has("model", "family") && !r.has("model", "growth_rate")
    {
        r.defaults.push("model.growth_rate = 0 (barenblatt preset)".into());
        let theta = r.real("model", "theta", 0.5)?;
        let eta = r.real("model", "eta", 0.5)?;
        ReactionFamily::LinearSharedRate {
            rate: 0.0,
            theta,
            eta,
        }
    } else {
        parse_family(&mut r)?
    };
    let model = ReactionModel::new(gamma, ph, family)?;
    let override_assumptions = r.boolean("model", "override_assumptions", false)?;

    let base = SchemeParams::default();
    let w_radius = r.optional_real("scheme", "w_radius")?;
    let moment_radius = r.optional_real("scheme", "moment_radius")?;
    let localizers = if w_radius.is_some() || moment_radius.is_some() {
        let d = LocalizerRadii::defaults_for(&grid);
        Some(LocalizerRadii {
            w_radius: w_radius.unwrap_or(d.w_radius),
            moment_radius: moment_radius.unwrap_or(d.moment_radius),
        })
    } else {
        None
    };
    let scheme = SchemeParams {
        epsilon: r.real("scheme", "epsilon", base.epsilon)?,
        delta: r.real("scheme", "delta", delta_default)?,
        cfl_safety: r.real("scheme", "cfl_safety", base.cfl_safety)?,
        t_end: r.real("scheme", "t_end", base.t_end)?,
        diag_every: r.integer("scheme", "diag_every", base.diag_every)?,
        override_assumptions,
        localizers,
    };
    scheme.validate()?;
    if let Some(radii) = scheme.localizers {
        for radius in [radii.w_radius, radii.moment_radius] {
            if !(radius >= 0.0) || radius + 1.0 > grid.half_width() {
                return Err(GridError::LocalizerExceedsBox {
                    radius,
                    half_width: grid.half_width(),
                }
                .into());
            }
        }
    }

    let output = OutputConfig {
        directory: PathBuf::from(r.text("output", "directory", "out")),
        snapshot_every: r.integer("output", "snapshot_every", 0)?,
        emit_plots: r.boolean("output", "emit_plots", false)?,
    };

    if let InitialSource::Preset(preset) = &source {
        check_preset(preset, &grid, &model, &scheme)?;
    }

    let defaults_applied = r.finish()?;
    Ok(RunConfig {
        grid: grid_cfg,
        model,
        scheme,
        initial: source,
        output,
        defaults_applied,
    })
}

fn check_preset(
    preset: &Preset,
    grid: &Grid,
    model: &ReactionModel,
    scheme: &SchemeParams,
) -> Result<(), ConfigError> {
    let t0 = preset.start_time();
    if scheme.t_end < t0 {
        return Err(ConfigError::Invalid(format!(
            "t_end = {} lies before the preset start time {t0}",
            scheme.t_end
        )));
    }
    match preset {
        Preset::Barenblatt { mass, .. } => {
            let profile = Barenblatt::new(model.gamma(), grid.dim(), *mass)?;
            let radius = profile.support_radius(scheme.t_end);
            if radius > SUPPORT_FILL * grid.half_width() {
                return Err(ConfigError::Invalid(format!(
                    "Barenblatt support radius {radius:.4} at t_end exceeds {SUPPORT_FILL} of the half width {}",
                    grid.half_width()
                )));
            }
        }
        Preset::HomeostaticPlateau { .. } if scheme.delta != 0.0 => {
            return Err(ConfigError::Invalid(
                "homeostatic_plateau needs delta = 0; any floor lifts the pressure above P_H".into(),
            ));
        }
        _ => {}
    }
    let data = preset.build(grid, model)?;
    crate::model::gaussian_floor(&data, scheme.delta, model)?;
    Ok(())
}

/// Key access handed to the preset reader; keeps the `[initial]` section
/// bookkeeping in one place.
pub struct PresetKeys<'a>(&'a mut Reader);

impl PresetKeys<'_> {
    pub fn real(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.0.real("initial", key, default)
    }
}
