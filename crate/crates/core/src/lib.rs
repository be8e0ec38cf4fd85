//! Monte Carlo simulator for a dynamically decoupled Faraday-rotation fiber
//! magnetometer.
//!
//! A photon launched into a terbium-doped fiber picks up a `z` rotation from
//! an AC magnetic field (the signal) and from random birefringence (the
//! noise). Half-waveplates spaced `y` apart flip the Bloch vector about `x`;
//! when their spacing matches the field's half period the signal adds up in
//! the toggling frame while slowly varying birefringence echoes away.
//!
//! The crate is organized bottom-up:
//!
//! * [`polarization`]: Bloch-vector rotations and ensemble averages.
//! * [`noise`]: piecewise-constant birefringence phase profiles.
//! * [`field`]: the AC field, its synchronization with the waveplates, and
//!   Faraday rotation.
//! * [`engine`]: single-photon propagation and Monte Carlo ensembles.
//! * [`metrics`]: signal ratios, detuning envelopes, curve statistics.
//! * [`experiments`]: the figure sweeps.
//!
//! Ensembles run on rayon when the default `parallel` feature is enabled and
//! fall back to a sequential loop otherwise; both give bit-identical results.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod field;
pub mod metrics;
pub mod noise;
pub mod parallel;
pub mod polarization;
pub mod seeding;

pub use engine::{
    build_lattice, propagate, run_ensemble, run_ensemble_with, EnsembleRun, FiberSpec,
    RealizationResult, WaveplateLattice,
};
pub use error::{Error, Result};
pub use experiments::{SimConfig, SweepResult};
pub use field::{FieldSpec, OpticsSpec};
pub use noise::{sample_profile, NoiseSpec, PhaseProfile};
pub use parallel::Execution;
pub use polarization::{Axis, AxisRotation, PolarizationEnsemble, PolarizationState};
