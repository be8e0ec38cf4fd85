//! Experiment dispatch and provenance stamping.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use ddmagsim_core::experiments::{
    single_run, sweep_fidelity_vs_separation, sweep_heatmap, sweep_rotation_vs_length,
    sweep_signal_vs_detuning,
};
use ddmagsim_core::parallel::with_thread_count;
use ddmagsim_core::SweepResult;
use thiserror::Error;

use crate::config::{parse_config, parse_override, ConfigError, Experiment, RunConfig};
use crate::csv::{write_csv, CsvError};

pub const THREADS_ENV: &str = "DDMAGSIM_THREADS";

/// Build revision, `version+g<commit>` when built from a git checkout.
pub const REVISION: &str = env!("DDMAGSIM_BUILD_REVISION");

#[derive(Debug, Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {}: {source}", path.display())]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{THREADS_ENV}: {0}")]
    Threads(String),
    #[error("simulation failed: {0}")]
    Sim(#[from] ddmagsim_core::Error),
    #[error(transparent)]
    Csv(#[from] CsvError),
}

/// Command-line inputs after argument parsing.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub experiment: String,
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
}

impl Invocation {
    /// Flag values become overrides on top of `--set`, which sit on top of the file.
    pub fn resolve(&self) -> Result<RunConfig, AppError> {
        let contents = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|source| AppError::ReadConfig {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let mut overrides = self
            .overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>, _>>()?;
        overrides.push(("experiment".into(), self.experiment.clone()));
        if let Some(seed) = self.seed {
            overrides.push(("master_seed".into(), seed.to_string()));
        }
        if let Some(n) = self.realizations {
            overrides.push(("realizations".into(), n.to_string()));
        }
        if let Some(out) = &self.out {
            overrides.push(("output".into(), out.display().to_string()));
        }
        Ok(parse_config(&contents, &overrides)?)
    }
}

/// Worker count from the environment; unset or 0 means one per core.
pub fn threads_from_env(value: Option<&str>) -> Result<usize, AppError> {
    match value.map(str::trim) {
        None | Some("") => Ok(0),
        Some(v) => v
            .parse()
            .map_err(|_| AppError::Threads(format!("expected a non-negative integer, got `{v}`"))),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<SweepResult, AppError> {
    let sim = &cfg.sim;
    let result = match cfg.experiment {
        Experiment::FidelityVsSeparation => {
            sweep_fidelity_vs_separation(sim, &cfg.separations(), &cfg.placement_fractions())
        }
        Experiment::SignalVsDetuning => {
            sweep_signal_vs_detuning(sim, &cfg.detuning_fractions(), cfg.cycles())
        }
        Experiment::RotationVsLength => {
            sweep_rotation_vs_length(sim, &cfg.lengths(), &cfg.placement_fractions())
        }
        Experiment::Heatmap => {
            sweep_heatmap(sim, &cfg.placement_fractions(), &cfg.detuning_fractions())
        }
        Experiment::SingleRun => single_run(sim),
    }?;
    Ok(result)
}

/// Puts experiment, revision and timestamp ahead of the sweep's own metadata.
pub fn stamp_provenance(result: &mut SweepResult, cfg: &RunConfig, timestamp: &str) {
    let mut metadata = vec![
        ("experiment".to_owned(), cfg.experiment.name().to_owned()),
        ("revision".to_owned(), REVISION.to_owned()),
        ("timestamp".to_owned(), timestamp.to_owned()),
    ];
    metadata.extend(
        result
            .metadata
            .drain(..)
            .filter(|(k, _)| !matches!(k.as_str(), "experiment" | "revision" | "timestamp")),
    );
    result.metadata = metadata;
}

/// Resolves, runs and writes one experiment. Returns the output path and row count.
pub fn run(inv: &Invocation, threads: usize) -> Result<(PathBuf, usize), AppError> {
    let cfg = inv.resolve()?;
    let mut result = with_thread_count(threads, || execute(&cfg))??;
    let timestamp = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
    stamp_provenance(&mut result, &cfg, &timestamp);
    let path = cfg.output_path();
    write(&result, &path)?;
    Ok((path, result.rows.len()))
}

fn write(result: &SweepResult, path: &Path) -> Result<(), AppError> {
    Ok(write_csv(result, path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_env() {
        assert_eq!(threads_from_env(None).unwrap(), 0);
        assert_eq!(threads_from_env(Some("")).unwrap(), 0);
        assert_eq!(threads_from_env(Some(" 3 ")).unwrap(), 3);
        assert!(threads_from_env(Some("-1")).is_err());
        assert!(threads_from_env(Some("many")).is_err());
    }

    #[test]
    fn flags_override_set_and_file() {
        let inv = Invocation {
            experiment: "heatmap".into(),
            overrides: vec!["master_seed=5".into(), "fiber.length = 20".into()],
            seed: Some(9),
            realizations: Some(3),
            ..Invocation::default()
        };
        let cfg = inv.resolve().unwrap();
        assert_eq!(cfg.experiment, Experiment::Heatmap);
        assert_eq!(cfg.sim.master_seed, 9);
        assert_eq!(cfg.sim.realizations, 3);
        assert_eq!(cfg.sim.fiber_length, 20.0);
        assert_eq!(cfg.output_path(), PathBuf::from("heatmap.csv"));
    }

    #[test]
    fn provenance_leads_metadata() {
        let cfg = RunConfig::default();
        let mut r = SweepResult::new("x", vec![]);
        r.set_metadata("master_seed", "1");
        r.set_metadata("timestamp", "stale");
        stamp_provenance(&mut r, &cfg, "2026-01-01T00:00:00Z");
        let keys: Vec<&str> = r.metadata.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["experiment", "revision", "timestamp", "master_seed"]);
        assert_eq!(r.metadata_value("timestamp"), Some("2026-01-01T00:00:00Z"));
    }

    #[test]
    fn missing_config_file_is_reported() {
        let inv = Invocation {
            experiment: "single-run".into(),
            config: Some(PathBuf::from("/no/such/file.cfg")),
            ..Invocation::default()
        };
        let err = inv.resolve().unwrap_err();
        assert!(err.to_string().contains("/no/such/file.cfg"));
    }
}
