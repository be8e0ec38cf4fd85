//! Single-photon propagation through the waveplate-loaded fiber, and Monte
//! Carlo ensembles of it.
//!
//! Between two events (a waveplate, a noise-segment boundary, or a trajectory
//! sample point) the medium is homogeneous, and every rotation acting there is
//! about `z`. The engine therefore integrates the Faraday signal analytically
//! over each such piece, adds the piece's share of the segment phase, and
//! applies the accumulated `z` rotation in one go when a `pi` pulse arrives.
//! Coaxial rotations compose additively, so this is the same map as stepping
//! piece by piece.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::field::{signal_rotation, FieldSpec, OpticsSpec};
use crate::noise::{sample_profile, NoiseSpec, PhaseProfile};
use crate::parallel::{map_indexed, Execution};
use crate::polarization::{AxisRotation, PolarizationEnsemble, PolarizationState, TrackedState};
use crate::seeding::{derive_seed, rng_from_seed, SeedStream};

/// Relative slack for positions that land on the fiber end through rounding.
const END_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    pub length: f64,
    pub optics: OpticsSpec,
    /// Placement error std as a fraction of the waveplate separation.
    pub placement_error_fraction: f64,
    pub dd_enabled: bool,
    /// Sub-step length used when sampling a trajectory, meters.
    pub integration_step: f64,
}

impl FiberSpec {
    /// Builds a validated spec with the default integration step.
    pub fn new(
        length: f64,
        optics: OpticsSpec,
        placement_error_fraction: f64,
        dd_enabled: bool,
        coherence_length: f64,
    ) -> Result<Self> {
        let spec = Self {
            length,
            optics,
            placement_error_fraction,
            dd_enabled,
            integration_step: default_integration_step(&optics, coherence_length),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(invalid(format!(
                "fiber length must be positive, got {}",
                self.length
            )));
        }
        let f = self.placement_error_fraction;
        if !(0.0..0.5).contains(&f) {
            return Err(invalid(format!(
                "placement_error_fraction must lie in [0, 0.5), got {f}"
            )));
        }
        let max_step = self.optics.waveplate_separation / 20.0 * (1.0 + END_SLACK);
        if !(self.integration_step > 0.0 && self.integration_step <= max_step) {
            return Err(invalid(format!(
                "integration_step must lie in (0, y/20 = {}], got {}",
                self.optics.waveplate_separation / 20.0,
                self.integration_step
            )));
        }
        Ok(())
    }

    /// Waveplates at `k y` strictly inside the fiber; one that would sit on
    /// the far end is dropped.
    pub fn nominal_waveplate_count(&self) -> usize {
        if !self.dd_enabled {
            return 0;
        }
        let y = self.optics.waveplate_separation;
        let k = (self.length / y * (1.0 + END_SLACK)).floor() as usize;
        if k > 0 && k as f64 * y >= self.length * (1.0 - END_SLACK) {
            k - 1
        } else {
            k
        }
    }

    /// The same fiber with waveplates exactly on their nominal sites.
    pub fn without_placement_error(&self) -> Self {
        Self {
            placement_error_fraction: 0.0,
            ..*self
        }
    }
}

/// `min(y / 50, L_c / 50)`.
pub fn default_integration_step(optics: &OpticsSpec, coherence_length: f64) -> f64 {
    (optics.waveplate_separation / 50.0).min(coherence_length / 50.0)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveplateLattice {
    positions: Vec<f64>,
}

impl WaveplateLattice {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Lattice from explicit positions; they must be sorted and finite.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(invalid("waveplate positions must be finite"));
        }
        if positions.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("waveplate positions must be sorted"));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Places waveplates at `k y + e_k`, `e_k ~ N(0, (f y)^2)`, for each nominal
/// site. Positions pushed out of the fiber are clamped one integration step
/// inside it. Empty when decoupling is off.
pub fn build_lattice(fiber: &FiberSpec, seed: u64) -> WaveplateLattice {
    let count = fiber.nominal_waveplate_count();
    let y = fiber.optics.waveplate_separation;
    let sigma = fiber.placement_error_fraction * y;
    let mut positions: Vec<f64> = if sigma == 0.0 {
        (1..=count).map(|k| k as f64 * y).collect()
    } else {
        let mut rng = rng_from_seed(seed);
        (1..=count)
            .map(|k| {
                let e: f64 = StandardNormal.sample(&mut rng);
                k as f64 * y + sigma * e
            })
            .collect()
    };
    let lo = fiber.integration_step;
    let hi = fiber.length - fiber.integration_step;
    for p in &mut positions {
        if *p <= 0.0 {
            *p = lo;
        } else if *p >= fiber.length {
            *p = hi;
        }
    }
    positions.sort_by(f64::total_cmp);
    WaveplateLattice { positions }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub final_state: PolarizationState,
    /// Signal rotation seen in the toggling frame (sign flips at each pulse);
    /// excludes birefringence noise.
    pub toggled_azimuth: f64,
    pub pulse_count: usize,
    /// `(position, toggled_azimuth)` samples, one per integration step.
    pub trajectory: Option<Vec<(f64, f64)>>,
}

/// Walks one photon through the fiber from `r = (1, 0, 0)` at entry.
pub fn propagate(
    fiber: &FiberSpec,
    field: &FieldSpec,
    profile: &PhaseProfile,
    lattice: &WaveplateLattice,
    record_trajectory: bool,
) -> Result<RealizationResult> {
    fiber.validate()?;
    field.validate()?;
    let length = fiber.length;
    if !profile.covers(length) {
        return Err(Error::Coverage {
            covered: profile.covered_length(),
            required: length,
        });
    }
    let waveplates = lattice.positions();
    if waveplates.iter().any(|&p| p < 0.0 || p > length) {
        return Err(invalid("waveplate lies outside the fiber"));
    }

    let optics = &fiber.optics;
    let last_segment = profile.phases().len() - 1;
    let seg_len = profile.segment_length();
    let step = fiber.integration_step;

    let mut state = TrackedState::new(PolarizationState::LAUNCH);
    let mut x = 0.0;
    let mut segment = 0usize;
    let mut next_boundary = if last_segment == 0 {
        f64::INFINITY
    } else {
        seg_len
    };
    let mut next_plate = 0usize;
    let mut next_sample = 1u64;
    let mut toggle = 1.0;
    let mut pending = 0.0;
    let mut toggled = 0.0;
    let mut trajectory = record_trajectory.then(|| vec![(0.0, 0.0)]);

    loop {
        let plate_at = waveplates.get(next_plate).copied().unwrap_or(f64::INFINITY);
        let sample_at = if record_trajectory {
            next_sample as f64 * step
        } else {
            f64::INFINITY
        };
        let end = length.min(plate_at).min(next_boundary).min(sample_at);

        if end > x {
            let signal = signal_rotation(field, optics, x, end);
            pending += signal + profile.rate(segment) * (end - x);
            toggled += toggle * signal;
            x = end;
        }

        while next_boundary <= x {
            segment = (segment + 1).min(last_segment);
            next_boundary = (segment + 1) as f64 * seg_len;
            if segment == last_segment {
                next_boundary = f64::INFINITY;
            }
        }
        while next_plate < waveplates.len() && waveplates[next_plate] <= x {
            state.rotate(AxisRotation::about_z(pending))?;
            pending = 0.0;
            state.pi_pulse_x();
            toggle = -toggle;
            next_plate += 1;
        }
        if let Some(traj) = trajectory.as_mut() {
            if sample_at <= x {
                if traj.last().is_none_or(|&(p, _)| x > p) {
                    traj.push((x, toggled));
                }
                next_sample += 1;
            }
        }
        if x >= length {
            break;
        }
    }
    state.rotate(AxisRotation::about_z(pending))?;

    if let Some(traj) = trajectory.as_mut() {
        if traj.last().is_none_or(|&(p, _)| length > p) {
            traj.push((length, toggled));
        }
    }

    Ok(RealizationResult {
        final_state: state.state(),
        toggled_azimuth: toggled,
        pulse_count: next_plate,
        trajectory,
    })
}

/// Outcome of a Monte Carlo ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub ensemble: PolarizationEnsemble,
    /// Noiseless output with waveplates on their nominal sites: `|psi_d>`.
    pub desired_state: PolarizationState,
    pub desired_toggled_azimuth: f64,
    pub fidelity: f64,
    pub fidelity_stderr: f64,
    pub mean_toggled_azimuth: f64,
    pub toggled_azimuth_stderr: f64,
}

/// Noiseless reference output for `fiber`, ignoring placement error.
pub fn desired_output(
    fiber: &FiberSpec,
    field: &FieldSpec,
    noise: &NoiseSpec,
) -> Result<RealizationResult> {
    let ideal = fiber.without_placement_error();
    let profile = sample_profile(&noise.silent(), fiber.length)?;
    let lattice = build_lattice(&ideal, 0);
    propagate(&ideal, field, &profile, &lattice, false)
}

/// One realization of the ensemble, keyed by `(master_seed, index)`.
pub fn run_realization(
    fiber: &FiberSpec,
    field: &FieldSpec,
    noise: &NoiseSpec,
    master_seed: u64,
    index: u64,
) -> Result<RealizationResult> {
    let noise = noise.with_seed(derive_seed(master_seed, SeedStream::NoiseProfile, index));
    let profile = sample_profile(&noise, fiber.length)?;
    let lattice = build_lattice(
        fiber,
        derive_seed(master_seed, SeedStream::WaveplateLattice, index),
    );
    propagate(fiber, field, &profile, &lattice, false)
}

pub fn run_ensemble(
    fiber: &FiberSpec,
    field: &FieldSpec,
    noise: &NoiseSpec,
    realizations: usize,
    master_seed: u64,
) -> Result<EnsembleRun> {
    run_ensemble_with(
        Execution::default(),
        fiber,
        field,
        noise,
        realizations,
        master_seed,
    )
}

pub fn run_ensemble_with(
    exec: Execution,
    fiber: &FiberSpec,
    field: &FieldSpec,
    noise: &NoiseSpec,
    realizations: usize,
    master_seed: u64,
) -> Result<EnsembleRun> {
    if realizations == 0 {
        return Err(invalid("realizations must be at least 1"));
    }
    noise.validate()?;
    let desired = desired_output(fiber, field, noise)?;
    let outcomes = map_indexed(exec, realizations, |i| {
        run_realization(fiber, field, noise, master_seed, i as u64)
            .map(|r| (r.final_state, r.toggled_azimuth))
    });

    let mut ensemble = PolarizationEnsemble::new();
    let mut fidelities = Vec::with_capacity(realizations);
    let mut toggled = Vec::with_capacity(realizations);
    for outcome in outcomes {
        let (state, angle) = outcome?;
        ensemble = ensemble.accumulate(&state);
        fidelities.push(0.5 * (1.0 + state.dot(&desired.final_state)));
        toggled.push(angle);
    }
    let (_, fidelity_stderr) = mean_and_stderr(&fidelities);
    let (mean_toggled_azimuth, toggled_azimuth_stderr) = mean_and_stderr(&toggled);

    Ok(EnsembleRun {
        fidelity: ensemble.fidelity(&desired.final_state)?,
        ensemble,
        desired_state: desired.final_state,
        desired_toggled_azimuth: desired.toggled_azimuth,
        fidelity_stderr,
        mean_toggled_azimuth,
        toggled_azimuth_stderr,
    })
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
