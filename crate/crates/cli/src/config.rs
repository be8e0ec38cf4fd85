//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, dotted keys address a
//! section (`optics.verdet = -32.0`). Lists are comma-separated. Command-line
//! overrides replace file values; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ddmagsim_core::experiments::{defaults, join_values};
use ddmagsim_core::SimConfig;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}`: {reason}")]
    Invariant { key: String, reason: String },
    #[error("`{key}` is set twice (lines {first} and {second})")]
    Duplicate {
        key: String,
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    FidelityVsSeparation,
    SignalVsDetuning,
    RotationVsLength,
    Heatmap,
    SingleRun,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::FidelityVsSeparation,
        Experiment::SignalVsDetuning,
        Experiment::RotationVsLength,
        Experiment::Heatmap,
        Experiment::SingleRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FidelityVsSeparation => "fidelity-vs-separation",
            Experiment::SignalVsDetuning => "signal-vs-detuning",
            Experiment::RotationVsLength => "rotation-vs-length",
            Experiment::Heatmap => "heatmap",
            Experiment::SingleRun => "single-run",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

/// Sweep grids; `None` means the experiment's default grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSettings {
    pub separations: Option<Vec<f64>>,
    pub placement_fractions: Option<Vec<f64>>,
    pub detuning_fractions: Option<Vec<f64>>,
    pub lengths: Option<Vec<f64>>,
    pub cycles: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub sim: SimConfig,
    pub sweep: SweepSettings,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::SingleRun,
            sim: SimConfig::default(),
            sweep: SweepSettings::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn output_path(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.experiment)))
    }

    pub fn separations(&self) -> Vec<f64> {
        self.sweep
            .separations
            .clone()
            .unwrap_or_else(defaults::separations)
    }

    pub fn placement_fractions(&self) -> Vec<f64> {
        self.sweep
            .placement_fractions
            .clone()
            .unwrap_or_else(|| match self.experiment {
                Experiment::RotationVsLength => defaults::length_placements(),
                Experiment::Heatmap => defaults::heatmap_placements(),
                _ => defaults::fidelity_placements(),
            })
    }

    pub fn detuning_fractions(&self) -> Vec<f64> {
        self.sweep
            .detuning_fractions
            .clone()
            .unwrap_or_else(|| match self.experiment {
                Experiment::Heatmap => defaults::heatmap_detunings(),
                _ => defaults::signal_detunings(),
            })
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.sweep.lengths.clone().unwrap_or_else(defaults::lengths)
    }

    pub fn cycles(&self) -> u32 {
        self.sweep.cycles.unwrap_or(defaults::CYCLES)
    }

    /// Every setting that shapes the output, as `key: value` pairs.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut out = vec![("experiment".to_owned(), self.experiment.name().to_owned())];
        out.extend(self.sim.metadata());
        let lists: [(&str, Vec<f64>); 4] = [
            ("sweep.separations", self.separations()),
            ("sweep.placement_fractions", self.placement_fractions()),
            ("sweep.detuning_fractions", self.detuning_fractions()),
            ("sweep.lengths", self.lengths()),
        ];
        for (k, v) in lists {
            out.push((k.to_owned(), join_values(&v)));
        }
        out.push(("sweep.cycles".to_owned(), self.cycles().to_string()));
        out
    }
}

/// Keys accepted in files and `--set`.
pub const KEYS: &[&str] = &[
    "experiment",
    "master_seed",
    "realizations",
    "output",
    "fiber.length",
    "fiber.placement_error_fraction",
    "fiber.dd_enabled",
    "fiber.integration_step",
    "optics.verdet",
    "optics.refractive_index",
    "optics.waveplate_separation",
    "field.amplitude",
    "field.detuning_fraction",
    "field.phase_offset",
    "noise.coherence_length",
    "noise.total_phase_std",
    "noise.wavelength",
    "sweep.separations",
    "sweep.placement_fractions",
    "sweep.detuning_fractions",
    "sweep.lengths",
    "sweep.cycles",
];

fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parses `key=value` from a command-line override.
pub fn parse_override(text: &str) -> Result<(String, String), ConfigError> {
    match split_assignment(text) {
        Some((k, v)) if !k.is_empty() => Ok((k.to_owned(), v.to_owned())),
        _ => Err(ConfigError::Syntax {
            line: 0,
            message: format!("override `{text}` is not of the form key=value"),
        }),
    }
}

pub fn parse_config(
    file_contents: &str,
    cli_overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in file_contents.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(text).ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, found `{text}`"),
        })?;
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key".to_owned(),
            });
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(ConfigError::Duplicate {
                key: key.to_owned(),
                first: *first,
                second: line,
            });
        }
        entries.insert(key.to_owned(), (line, value.to_owned()));
    }
    for (k, v) in cli_overrides {
        entries.insert(k.clone(), (0, v.clone()));
    }

    let mut cfg = RunConfig::default();
    for (key, (_, value)) in &entries {
        apply(&mut cfg, key, value)?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let sim = &mut cfg.sim;
    match key {
        "experiment" => {
            cfg.experiment = value.parse().map_err(|reason| ConfigError::Invariant {
                key: key.to_owned(),
                reason,
            })?
        }
        "master_seed" => sim.master_seed = parse(key, value, "an unsigned 64-bit integer")?,
        "realizations" => sim.realizations = parse(key, value, "a positive integer")?,
        "output" => cfg.output = Some(PathBuf::from(value)),
        "fiber.length" => sim.fiber_length = number(key, value)?,
        "fiber.placement_error_fraction" => sim.placement_error_fraction = number(key, value)?,
        "fiber.dd_enabled" => sim.dd_enabled = parse(key, value, "true or false")?,
        "fiber.integration_step" => {
            sim.integration_step = if value == "auto" {
                None
            } else {
                Some(number(key, value)?)
            }
        }
        "optics.verdet" => sim.optics.verdet = number(key, value)?,
        "optics.refractive_index" => sim.optics.refractive_index = number(key, value)?,
        "optics.waveplate_separation" => sim.optics.waveplate_separation = number(key, value)?,
        "field.amplitude" => sim.field.amplitude = number(key, value)?,
        "field.detuning_fraction" => sim.field.detuning_fraction = number(key, value)?,
        "field.phase_offset" => sim.field.phase_offset = number(key, value)?,
        "noise.coherence_length" => sim.noise.coherence_length = number(key, value)?,
        "noise.total_phase_std" => sim.noise.total_phase_std = number(key, value)?,
        "noise.wavelength" => sim.noise.wavelength = number(key, value)?,
        "sweep.separations" => cfg.sweep.separations = Some(list(key, value)?),
        "sweep.placement_fractions" => cfg.sweep.placement_fractions = Some(list(key, value)?),
        "sweep.detuning_fractions" => cfg.sweep.detuning_fractions = Some(list(key, value)?),
        "sweep.lengths" => cfg.sweep.lengths = Some(list(key, value)?),
        "sweep.cycles" => cfg.sweep.cycles = Some(parse(key, value, "a positive integer")?),
        _ => return Err(ConfigError::UnknownKey(key.to_owned())),
    }
    Ok(())
}

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_owned(),
        value: value.to_owned(),
        expected,
    })
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value, "a number")?;
    if !v.is_finite() {
        return Err(ConfigError::InvalidValue {
            key: key.to_owned(),
            value: value.to_owned(),
            expected: "a finite number",
        });
    }
    Ok(v)
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

fn check(ok: bool, key: &str, reason: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invariant {
            key: key.to_owned(),
            reason: reason.into(),
        })
    }
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let s = &cfg.sim;
    check(s.realizations >= 1, "realizations", "must be at least 1")?;
    check(s.fiber_length > 0.0, "fiber.length", "must be positive")?;
    check(
        (0.0..0.5).contains(&s.placement_error_fraction),
        "fiber.placement_error_fraction",
        "must lie in [0, 0.5)",
    )?;
    check(
        s.optics.refractive_index >= 1.0,
        "optics.refractive_index",
        "must be at least 1",
    )?;
    check(
        s.optics.waveplate_separation > 0.0,
        "optics.waveplate_separation",
        "must be positive",
    )?;
    if let Some(step) = s.integration_step {
        check(
            step > 0.0 && step <= s.optics.waveplate_separation / 20.0,
            "fiber.integration_step",
            format!(
                "must lie in (0, waveplate_separation / 20 = {}]",
                s.optics.waveplate_separation / 20.0
            ),
        )?;
    }
    check(
        s.field.amplitude >= 0.0,
        "field.amplitude",
        "must be non-negative",
    )?;
    check(
        s.field.detuning_fraction > -1.0,
        "field.detuning_fraction",
        "must exceed -1",
    )?;
    check(
        s.noise.coherence_length > 0.0,
        "noise.coherence_length",
        "must be positive",
    )?;
    check(
        s.noise.total_phase_std >= 0.0,
        "noise.total_phase_std",
        "must be non-negative",
    )?;
    check(
        s.noise.wavelength > 0.0,
        "noise.wavelength",
        "must be positive",
    )?;

    let sw = &cfg.sweep;
    if let Some(v) = &sw.separations {
        check(!v.is_empty(), "sweep.separations", "must not be empty")?;
        check(
            v.iter().all(|&y| y > 0.0),
            "sweep.separations",
            "values must be positive",
        )?;
    }
    if let Some(v) = &sw.placement_fractions {
        check(
            !v.is_empty(),
            "sweep.placement_fractions",
            "must not be empty",
        )?;
        check(
            v.iter().all(|f| (0.0..0.5).contains(f)),
            "sweep.placement_fractions",
            "values must lie in [0, 0.5)",
        )?;
    }
    if let Some(v) = &sw.detuning_fractions {
        check(
            !v.is_empty(),
            "sweep.detuning_fractions",
            "must not be empty",
        )?;
        check(
            v.iter().all(|&d| d > -1.0),
            "sweep.detuning_fractions",
            "values must exceed -1",
        )?;
    }
    if let Some(v) = &sw.lengths {
        check(!v.is_empty(), "sweep.lengths", "must not be empty")?;
        check(
            v.iter().all(|&l| l >= 0.0),
            "sweep.lengths",
            "values must be non-negative",
        )?;
    }
    if let Some(m) = sw.cycles {
        check(m >= 1, "sweep.cycles", "must be at least 1")?;
    }
    // Anything the per-key checks missed.
    s.validate().map_err(|e| ConfigError::Invariant {
        key: "config".to_owned(),
        reason: e.to_string(),
    })
}
