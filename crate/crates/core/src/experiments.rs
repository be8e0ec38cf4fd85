//! Parameter sweeps that regenerate each figure as a table.
//!
//! Each sweep point is an independent ensemble keyed by the shared master
//! seed, so neighbouring points see the same noise draws (common random
//! numbers) and a sweep is reproducible regardless of scheduling. Rows are
//! always assembled in input order.

use std::fmt::Write as _;

use crate::engine::{
    build_lattice, default_integration_step, propagate, run_ensemble_with, EnsembleRun, FiberSpec,
};
use crate::error::{invalid, Result};
use crate::field::{cycles_in_transit, FieldSpec, OpticsSpec};
use crate::metrics::{detuning_envelope, signal_strength};
use crate::noise::{sample_profile, NoiseSpec};
use crate::parallel::{map_indexed, Execution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub label: String,
    pub unit: String,
}

impl Column {
    pub fn new(label: &str, unit: &str) -> Self {
        Self {
            label: label.to_owned(),
            unit: unit.to_owned(),
        }
    }
}

/// Tabular sweep output: named columns, numeric rows, and a provenance block.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Self {
            name: name.to_owned(),
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid(format!(
                "row has {} values but {} columns are declared",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set_metadata(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.to_owned(), value)),
        }
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }

    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let i = self.column_index(label)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Rows whose `label` column equals `value` exactly.
    pub fn rows_where(&self, label: &str, value: f64) -> Vec<&[f64]> {
        match self.column_index(label) {
            Some(i) => self
                .rows
                .iter()
                .filter(|r| r[i] == value)
                .map(Vec::as_slice)
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Every physical and run parameter a sweep starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub fiber_length: f64,
    pub placement_error_fraction: f64,
    pub dd_enabled: bool,
    /// Trajectory sub-step; `None` picks `min(y, L_c) / 50`.
    pub integration_step: Option<f64>,
    pub optics: OpticsSpec,
    pub field: FieldSpec,
    pub noise: NoiseSpec,
    pub realizations: usize,
    pub master_seed: u64,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            fiber_length: 500.0,
            placement_error_fraction: 0.0,
            dd_enabled: true,
            integration_step: None,
            optics: OpticsSpec {
                verdet: -32.0,
                refractive_index: 1.45,
                waveplate_separation: 0.1,
            },
            field: FieldSpec {
                amplitude: 10e-6,
                detuning_fraction: 0.0,
                phase_offset: 0.0,
            },
            noise: NoiseSpec {
                coherence_length: 3.0,
                total_phase_std: 100.0,
                wavelength: 1064e-9,
                seed: 0,
            },
            realizations: 1000,
            master_seed: 1,
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.fiber_spec()?;
        self.field.validate()?;
        self.noise.validate()?;
        if self.realizations == 0 {
            return Err(invalid("realizations must be at least 1"));
        }
        Ok(())
    }

    pub fn fiber_spec(&self) -> Result<FiberSpec> {
        let spec = FiberSpec {
            length: self.fiber_length,
            optics: self.optics,
            placement_error_fraction: self.placement_error_fraction,
            dd_enabled: self.dd_enabled,
            integration_step: self.integration_step.unwrap_or_else(|| {
                default_integration_step(&self.optics, self.noise.coherence_length)
            }),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_separation(&self, y: f64) -> Self {
        Self {
            optics: self.optics.with_separation(y),
            ..self.clone()
        }
    }

    pub fn with_placement(&self, fraction: f64) -> Self {
        Self {
            placement_error_fraction: fraction,
            ..self.clone()
        }
    }

    pub fn with_length(&self, length: f64) -> Self {
        Self {
            fiber_length: length,
            ..self.clone()
        }
    }

    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self {
            field: self.field.with_detuning(detuning),
            ..self.clone()
        }
    }

    pub fn noiseless(&self) -> Self {
        Self {
            noise: self.noise.silent(),
            ..self.clone()
        }
    }

    pub fn run(&self) -> Result<EnsembleRun> {
        let fiber = self.fiber_spec()?;
        run_ensemble_with(
            self.execution,
            &fiber,
            &self.field,
            &self.noise,
            self.realizations,
            self.master_seed,
        )
    }

    /// Toggled azimuth of a single noiseless pass with waveplates on site.
    pub fn ideal_rotation(&self) -> Result<f64> {
        let fiber = self.fiber_spec()?.without_placement_error();
        let profile = sample_profile(&self.noise.silent(), fiber.length)?;
        let lattice = build_lattice(&fiber, 0);
        Ok(propagate(&fiber, &self.field, &profile, &lattice, false)?.toggled_azimuth)
    }

    /// Mean toggled azimuth; a single pass when nothing is random.
    pub fn mean_rotation(&self) -> Result<(f64, f64)> {
        if self.placement_error_fraction == 0.0 || !self.dd_enabled {
            Ok((self.ideal_rotation()?, 0.0))
        } else {
            let run = self.run()?;
            Ok((run.mean_toggled_azimuth, run.toggled_azimuth_stderr))
        }
    }

    /// Parameters under their config keys, enough to reconstruct the run.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let step = match self.integration_step {
            Some(s) => s.to_string(),
            None => "auto".to_owned(),
        };
        vec![
            ("master_seed".into(), self.master_seed.to_string()),
            ("realizations".into(), self.realizations.to_string()),
            ("fiber.length".into(), self.fiber_length.to_string()),
            (
                "fiber.placement_error_fraction".into(),
                self.placement_error_fraction.to_string(),
            ),
            ("fiber.dd_enabled".into(), self.dd_enabled.to_string()),
            ("fiber.integration_step".into(), step),
            ("optics.verdet".into(), self.optics.verdet.to_string()),
            (
                "optics.refractive_index".into(),
                self.optics.refractive_index.to_string(),
            ),
            (
                "optics.waveplate_separation".into(),
                self.optics.waveplate_separation.to_string(),
            ),
            ("field.amplitude".into(), self.field.amplitude.to_string()),
            (
                "field.detuning_fraction".into(),
                self.field.detuning_fraction.to_string(),
            ),
            (
                "field.phase_offset".into(),
                self.field.phase_offset.to_string(),
            ),
            (
                "noise.coherence_length".into(),
                self.noise.coherence_length.to_string(),
            ),
            (
                "noise.total_phase_std".into(),
                self.noise.total_phase_std.to_string(),
            ),
            ("noise.wavelength".into(), self.noise.wavelength.to_string()),
        ]
    }

    fn stamp(&self, result: &mut SweepResult) {
        for (k, v) in self.metadata() {
            result.set_metadata(&k, v);
        }
    }
}

pub fn join_values(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v}");
    }
    out
}

fn require_non_empty(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(format!("{name} must not be empty")));
    }
    Ok(())
}

/// `n` points from `a` to `b` inclusive, evenly spaced in log.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| match i {
                0 => a,
                i if i == n - 1 => b,
                i => (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect(),
    }
}

/// `2 half + 1` points on `[-max, max]` with an exact zero in the middle.
pub fn symmetric_grid(max: f64, half: usize) -> Vec<f64> {
    let h = half as i64;
    (-h..=h).map(|k| k as f64 / half as f64 * max).collect()
}

/// `n` evenly spaced points on `[a, b]`.
pub fn lin_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * (i as f64 / (n - 1) as f64))
            .collect(),
    }
}

pub mod defaults {
    use super::{lin_space, log_space, symmetric_grid};

    /// Waveplate separations for the fidelity sweep: 0.02 to 3 m, log-spaced.
    pub fn separations() -> Vec<f64> {
        log_space(0.02, 3.0, 25)
    }

    pub fn fidelity_placements() -> Vec<f64> {
        vec![0.04, 0.08, 0.12]
    }

    pub fn length_placements() -> Vec<f64> {
        vec![0.0, 0.04, 0.08, 0.12]
    }

    pub fn lengths() -> Vec<f64> {
        lin_space(50.0, 500.0, 10)
    }

    pub const CYCLES: u32 = 600;

    /// 501 detunings on `[-0.05, 0.05]`, including zero and both ends.
    pub fn signal_detunings() -> Vec<f64> {
        symmetric_grid(0.05, 250)
    }

    pub fn heatmap_placements() -> Vec<f64> {
        lin_space(0.0, 0.12, 7)
    }

    /// Resolves the main lobe of a 500 m, 0.1 m-pitch fiber (m = 2500).
    pub fn heatmap_detunings() -> Vec<f64> {
        symmetric_grid(6e-4, 24)
    }
}

/// Ensemble fidelity against waveplate separation, one curve per placement
/// error, plus the undecoupled baseline (`dd_enabled = 0`) repeated at every
/// separation.
pub fn sweep_fidelity_vs_separation(
    base: &SimConfig,
    separations: &[f64],
    placement_fractions: &[f64],
) -> Result<SweepResult> {
    require_non_empty("separations", separations)?;
    require_non_empty("placement_fractions", placement_fractions)?;
    let mut result = SweepResult::new(
        "fidelity-vs-separation",
        vec![
            Column::new("separation", "m"),
            Column::new("placement_fraction", "1"),
            Column::new("dd_enabled", "bool"),
            Column::new("fidelity", "1"),
            Column::new("fidelity_stderr", "1"),
        ],
    );
    let baseline = SimConfig {
        dd_enabled: false,
        placement_error_fraction: 0.0,
        ..base.clone()
    }
    .run()?;
    for &y in separations {
        for &f in placement_fractions {
            let cfg = SimConfig {
                dd_enabled: true,
                ..base.with_separation(y).with_placement(f)
            };
            let run = cfg.run()?;
            result.push_row(vec![y, f, 1.0, run.fidelity, run.fidelity_stderr])?;
        }
        result.push_row(vec![
            y,
            0.0,
            0.0,
            baseline.fidelity,
            baseline.fidelity_stderr,
        ])?;
    }
    base.stamp(&mut result);
    result.set_metadata("sweep.separations", join_values(separations));
    result.set_metadata(
        "sweep.placement_fractions",
        join_values(placement_fractions),
    );
    Ok(result)
}

/// Noiseless signal ratio `theta(d) / theta(0)` for a fiber holding `cycles`
/// field periods (`L = 2 m y`), with the `1 / (2 pi m d)` envelope alongside.
pub fn sweep_signal_vs_detuning(
    base: &SimConfig,
    detuning_fractions: &[f64],
    cycles: u32,
) -> Result<SweepResult> {
    require_non_empty("detuning_fractions", detuning_fractions)?;
    if cycles == 0 {
        return Err(invalid("cycle count must be at least 1"));
    }
    let cfg = SimConfig {
        dd_enabled: true,
        ..base
            .noiseless()
            .with_length(2.0 * f64::from(cycles) * base.optics.waveplate_separation)
    };
    cfg.validate()?;
    let theta_max = cfg.with_detuning(0.0).mean_rotation()?.0;

    let thetas = map_indexed(cfg.execution, detuning_fractions.len(), |i| {
        let mut point = cfg.with_detuning(detuning_fractions[i]);
        // The outer map is already parallel.
        point.execution = Execution::Sequential;
        point.mean_rotation().map(|(theta, _)| theta)
    });

    let mut result = SweepResult::new(
        "signal-vs-detuning",
        vec![
            Column::new("detuning_fraction", "1"),
            Column::new("ratio", "1"),
            Column::new("envelope", "1"),
        ],
    );
    for (&d, theta) in detuning_fractions.iter().zip(thetas) {
        let strength = signal_strength(theta?, theta_max)?;
        let envelope = if d == 0.0 {
            1.0
        } else {
            detuning_envelope(d, cycles)?
        };
        result.push_row(vec![d, strength.ratio, envelope])?;
    }
    cfg.stamp(&mut result);
    result.set_metadata("sweep.cycles", cycles.to_string());
    result.set_metadata("sweep.detuning_fractions", join_values(detuning_fractions));
    result.set_metadata("result.theta_max", theta_max.to_string());
    Ok(result)
}

/// Mean toggled rotation against fiber length for each placement error, with
/// the noiseless on-site value as `ideal_rotation`.
pub fn sweep_rotation_vs_length(
    base: &SimConfig,
    lengths: &[f64],
    placement_fractions: &[f64],
) -> Result<SweepResult> {
    require_non_empty("lengths", lengths)?;
    require_non_empty("placement_fractions", placement_fractions)?;
    let mut result = SweepResult::new(
        "rotation-vs-length",
        vec![
            Column::new("length", "m"),
            Column::new("placement_fraction", "1"),
            Column::new("mean_toggled_azimuth", "rad"),
            Column::new("stderr", "rad"),
            Column::new("ideal_rotation", "rad"),
        ],
    );
    for &length in lengths {
        if length == 0.0 {
            for &f in placement_fractions {
                result.push_row(vec![0.0, f, 0.0, 0.0, 0.0])?;
            }
            continue;
        }
        let at_length = SimConfig {
            dd_enabled: true,
            ..base.with_length(length)
        };
        let ideal = at_length.ideal_rotation()?;
        for &f in placement_fractions {
            let run = at_length.with_placement(f).run()?;
            result.push_row(vec![
                length,
                f,
                run.mean_toggled_azimuth,
                run.toggled_azimuth_stderr,
                ideal,
            ])?;
        }
    }
    base.stamp(&mut result);
    result.set_metadata("sweep.lengths", join_values(lengths));
    result.set_metadata(
        "sweep.placement_fractions",
        join_values(placement_fractions),
    );
    Ok(result)
}

/// Mean toggled rotation over a (placement error, detuning) grid, normalized
/// to the on-site, on-resonance value.
pub fn sweep_heatmap(
    base: &SimConfig,
    placement_fractions: &[f64],
    detuning_fractions: &[f64],
) -> Result<SweepResult> {
    require_non_empty("placement_fractions", placement_fractions)?;
    require_non_empty("detuning_fractions", detuning_fractions)?;
    let base = SimConfig {
        dd_enabled: true,
        ..base.clone()
    };
    let reference = base
        .with_placement(0.0)
        .with_detuning(0.0)
        .run()?
        .mean_toggled_azimuth;
    if reference == 0.0 {
        return Err(crate::Error::DegenerateRatio);
    }
    let mut result = SweepResult::new(
        "heatmap",
        vec![
            Column::new("placement_fraction", "1"),
            Column::new("detuning_fraction", "1"),
            Column::new("normalized_rotation", "1"),
            Column::new("normalized_stderr", "1"),
        ],
    );
    for &f in placement_fractions {
        for &d in detuning_fractions {
            let run = base.with_placement(f).with_detuning(d).run()?;
            result.push_row(vec![
                f,
                d,
                run.mean_toggled_azimuth / reference,
                run.toggled_azimuth_stderr / reference.abs(),
            ])?;
        }
    }
    base.stamp(&mut result);
    result.set_metadata(
        "sweep.placement_fractions",
        join_values(placement_fractions),
    );
    result.set_metadata("sweep.detuning_fractions", join_values(detuning_fractions));
    result.set_metadata("result.reference_rotation", reference.to_string());
    Ok(result)
}

/// One ensemble at the base configuration.
pub fn single_run(base: &SimConfig) -> Result<SweepResult> {
    let run = base.run()?;
    let [rx, ry, rz] = run.ensemble.mean()?;
    let mut result = SweepResult::new(
        "single-run",
        vec![
            Column::new("realizations", "count"),
            Column::new("fidelity", "1"),
            Column::new("fidelity_stderr", "1"),
            Column::new("mean_toggled_azimuth", "rad"),
            Column::new("toggled_stderr", "rad"),
            Column::new("desired_toggled_azimuth", "rad"),
            Column::new("r_avg_x", "1"),
            Column::new("r_avg_y", "1"),
            Column::new("r_avg_z", "1"),
        ],
    );
    result.push_row(vec![
        base.realizations as f64,
        run.fidelity,
        run.fidelity_stderr,
        run.mean_toggled_azimuth,
        run.toggled_azimuth_stderr,
        run.desired_toggled_azimuth,
        rx,
        ry,
        rz,
    ])?;
    base.stamp(&mut result);
    result.set_metadata(
        "result.cycles_in_transit",
        cycles_in_transit(&base.optics, base.fiber_length).to_string(),
    );
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            fiber_length: 50.0,
            noise: NoiseSpec {
                total_phase_std: 100.0 * (50.0f64 / 500.0).sqrt(),
                ..SimConfig::default().noise
            },
            realizations: 100,
            ..SimConfig::default()
        }
    }

    #[test]
    fn grids() {
        let s = defaults::separations();
        assert_eq!(s.len(), 25);
        assert_eq!(s[0], 0.02);
        assert_eq!(s[24], 3.0);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        let d = defaults::signal_detunings();
        assert_eq!(d.len(), 501);
        assert_eq!(d[250], 0.0);
        assert_eq!(d[500], 0.05);
        assert_eq!(d[0], -0.05);
        assert_eq!(
            defaults::lengths(),
            (1..=10).map(|k| 50.0 * k as f64).collect::<Vec<_>>()
        );
    }

    #[test]
    fn row_length_checked() {
        let mut r = SweepResult::new("x", vec![Column::new("a", "1")]);
        assert!(r.push_row(vec![1.0, 2.0]).is_err());
        r.push_row(vec![1.0]).unwrap();
        r.set_metadata("k", "1");
        r.set_metadata("k", "2");
        assert_eq!(r.metadata_value("k"), Some("2"));
        assert_eq!(r.metadata.len(), 1);
    }

    #[test]
    fn detuning_peak_is_one() {
        let r = sweep_signal_vs_detuning(&small(), &[-0.01, 0.0, 0.01], 50).unwrap();
        assert_eq!(r.rows[1][1], 1.0);
        assert_eq!(r.rows[1][2], 1.0);
        assert!(r.rows[0][1].abs() <= r.rows[0][2] + 0.01);
    }

    #[test]
    fn zero_length_rotates_nothing() {
        let r = sweep_rotation_vs_length(&small(), &[0.0, 10.0, 20.0], &[0.0]).unwrap();
        assert_eq!(r.rows[0][2], 0.0);
        let ideal = r.column("ideal_rotation").unwrap();
        assert!((ideal[2] / ideal[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn heatmap_reference_cell_is_one() {
        let mut cfg = small();
        cfg.realizations = 20;
        let r = sweep_heatmap(&cfg, &[0.0, 0.1], &[0.0, 1e-3]).unwrap();
        assert_eq!(r.rows[0][2], 1.0);
        assert_eq!(r.rows.len(), 4);
    }

    #[test]
    fn sweeps_reject_empty_lists() {
        assert!(sweep_fidelity_vs_separation(&small(), &[], &[0.0]).is_err());
        assert!(sweep_heatmap(&small(), &[0.0], &[]).is_err());
    }

    #[test]
    fn metadata_has_seed_and_count() {
        let mut cfg = small();
        cfg.realizations = 10;
        let r = single_run(&cfg).unwrap();
        assert_eq!(r.metadata_value("master_seed"), Some("1"));
        assert_eq!(r.metadata_value("realizations"), Some("10"));
        assert_eq!(r.rows[0].len(), r.columns.len());
    }
}
