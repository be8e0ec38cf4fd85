//! Rotation algebra for photon polarization on the Bloch sphere.
//!
//! A pure polarization state is a unit Bloch vector. The only operations the
//! simulator needs are rotations about the three coordinate axes (Faraday
//! signal and birefringence noise act about `z`, half-waveplates act as a
//! `pi` rotation about `x`) and the arithmetic mean that turns many pure
//! realizations into a mixed state.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Tolerance on `|r| = 1` accepted when constructing a pure state.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Number of rotations a [`TrackedState`] applies between renormalizations.
pub const RENORMALIZE_INTERVAL: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A right-handed rotation: positive angles turn counterclockwise when viewed
/// from the positive end of the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRotation {
    pub axis: Axis,
    pub angle: f64,
}

impl AxisRotation {
    pub fn new(axis: Axis, angle: f64) -> Self {
        Self { axis, angle }
    }

    pub fn about_x(angle: f64) -> Self {
        Self::new(Axis::X, angle)
    }

    pub fn about_y(angle: f64) -> Self {
        Self::new(Axis::Y, angle)
    }

    pub fn about_z(angle: f64) -> Self {
        Self::new(Axis::Z, angle)
    }
}

/// Pure polarization state as a unit Bloch vector `(rx, ry, rz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    r: [f64; 3],
}

impl PolarizationState {
    /// Launch polarization used by the propagation engine: horizontal linear
    /// polarization on the equator.
    pub const LAUNCH: Self = Self { r: [1.0, 0.0, 0.0] };

    pub fn new(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let r = [rx, ry, rz];
        if r.iter().any(|c| !c.is_finite()) {
            return Err(invalid("Bloch vector components must be finite"));
        }
        let norm = norm(&r);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!(
                "pure state needs a unit Bloch vector, got norm {norm}"
            )));
        }
        Ok(Self { r })
    }

    /// Builds a state from any non-zero finite vector by scaling it to unit length.
    pub fn normalized(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let r = [rx, ry, rz];
        let n = norm(&r);
        if !n.is_finite() || n == 0.0 {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self {
            r: [rx / n, ry / n, rz / n],
        })
    }

    /// Equatorial state at azimuth `phi`.
    pub fn equatorial(phi: f64) -> Self {
        Self {
            r: [phi.cos(), phi.sin(), 0.0],
        }
    }

    pub fn x(&self) -> f64 {
        self.r[0]
    }

    pub fn y(&self) -> f64 {
        self.r[1]
    }

    pub fn z(&self) -> f64 {
        self.r[2]
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.r
    }

    pub fn norm(&self) -> f64 {
        norm(&self.r)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.r, &other.r)
    }

    /// Rotates the state; fails on a non-finite angle.
    pub fn apply(&self, rot: AxisRotation) -> Result<Self> {
        if !rot.angle.is_finite() {
            return Err(invalid(format!(
                "rotation angle {} is not finite",
                rot.angle
            )));
        }
        Ok(self.rotate_unchecked(rot.axis, rot.angle))
    }

    /// Half-waveplate: a `pi` rotation about `x`, `(rx, ry, rz) -> (rx, -ry, -rz)`.
    pub fn pi_pulse_x(&self) -> Self {
        Self {
            r: [self.r[0], -self.r[1], -self.r[2]],
        }
    }

    /// Equatorial angle measured from `+x`, in `(-pi, pi]`.
    pub fn azimuth(&self) -> Result<f64> {
        let rho2 = self.r[0] * self.r[0] + self.r[1] * self.r[1];
        if rho2 <= 1e-18 {
            return Err(Error::DegenerateAzimuth(rho2));
        }
        let phi = self.r[1].atan2(self.r[0]);
        Ok(if phi <= -PI { PI } else { phi })
    }

    pub fn renormalize(&self) -> Self {
        let n = self.norm();
        Self {
            r: [self.r[0] / n, self.r[1] / n, self.r[2] / n],
        }
    }

    pub(crate) fn rotate_unchecked(&self, axis: Axis, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let [x, y, z] = self.r;
        let r = match axis {
            Axis::X => [x, c * y - s * z, s * y + c * z],
            Axis::Y => [c * x + s * z, y, -s * x + c * z],
            Axis::Z => [c * x - s * y, s * x + c * y, z],
        };
        Self { r }
    }
}

/// Rotates `state` by `rot`.
pub fn apply_rotation(state: PolarizationState, rot: AxisRotation) -> Result<PolarizationState> {
    state.apply(rot)
}

pub fn apply_pi_pulse_x(state: PolarizationState) -> PolarizationState {
    state.pi_pulse_x()
}

pub fn azimuth(state: &PolarizationState) -> Result<f64> {
    state.azimuth()
}

/// A state that renormalizes itself every [`RENORMALIZE_INTERVAL`] rotations so
/// long pulse trains cannot drift off the sphere. The schedule depends only on
/// the number of rotations applied, so results stay bit-stable.
#[derive(Debug, Clone, Copy)]
pub struct TrackedState {
    state: PolarizationState,
    since_renorm: u32,
}

impl TrackedState {
    pub fn new(state: PolarizationState) -> Self {
        Self {
            state,
            since_renorm: 0,
        }
    }

    pub fn state(&self) -> PolarizationState {
        self.state
    }

    pub fn rotate(&mut self, rot: AxisRotation) -> Result<()> {
        self.state = self.state.apply(rot)?;
        self.tick();
        Ok(())
    }

    pub fn pi_pulse_x(&mut self) {
        self.state = self.state.pi_pulse_x();
        self.tick();
    }

    fn tick(&mut self) {
        self.since_renorm += 1;
        if self.since_renorm >= RENORMALIZE_INTERVAL {
            self.state = self.state.renormalize();
            self.since_renorm = 0;
        }
    }
}

/// Running mean of Bloch vectors over Monte Carlo realizations: the Bloch form
/// of `rho_out = (1/n) sum |phi_i><phi_i|`.
///
/// The accumulator stores the vector sum and the count, so partial ensembles
/// from different workers combine with [`PolarizationEnsemble::merge`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarizationEnsemble {
    sum: [f64; 3],
    count: u64,
}

impl PolarizationEnsemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_states<'a>(states: impl IntoIterator<Item = &'a PolarizationState>) -> Self {
        states
            .into_iter()
            .fold(Self::new(), |acc, s| acc.accumulate(s))
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[must_use]
    pub fn accumulate(mut self, state: &PolarizationState) -> Self {
        for (acc, c) in self.sum.iter_mut().zip(state.r) {
            *acc += c;
        }
        self.count += 1;
        self
    }

    #[must_use]
    pub fn merge(mut self, other: &Self) -> Self {
        for (acc, c) in self.sum.iter_mut().zip(other.sum) {
            *acc += c;
        }
        self.count += other.count;
        self
    }

    /// Mean Bloch vector `r_avg`.
    pub fn mean(&self) -> Result<[f64; 3]> {
        if self.count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let n = self.count as f64;
        Ok([self.sum[0] / n, self.sum[1] / n, self.sum[2] / n])
    }

    /// Length of `r_avg`; 1 for a pure ensemble, 0 for a maximally mixed one.
    pub fn purity_radius(&self) -> Result<f64> {
        Ok(norm(&self.mean()?))
    }

    /// `<psi_d| rho_out |psi_d> = (1 + r_avg . r_d) / 2`.
    pub fn fidelity(&self, desired: &PolarizationState) -> Result<f64> {
        let mean = self.mean()?;
        Ok(fidelity_from_vector(&mean, desired))
    }
}

pub fn accumulate(
    ensemble: PolarizationEnsemble,
    state: &PolarizationState,
) -> PolarizationEnsemble {
    ensemble.accumulate(state)
}

pub fn fidelity(ensemble: &PolarizationEnsemble, desired: &PolarizationState) -> Result<f64> {
    ensemble.fidelity(desired)
}

pub(crate) fn fidelity_from_vector(r: &[f64; 3], desired: &PolarizationState) -> f64 {
    (0.5 * (1.0 + dot(r, &desired.r))).clamp(0.0, 1.0)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(r: &[f64; 3]) -> f64 {
    dot(r, r).sqrt()
}
