//! AC magnetic field, its synchronization with the waveplate lattice, and the
//! Faraday rotation it drives.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform longitudinal field `B0 sin((1 + d) w0 t + phase_offset)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    /// Peak field `B0`, tesla.
    pub amplitude: f64,
    /// Fractional detuning `dw / w0`.
    pub detuning_fraction: f64,
    /// Field phase at photon entry, radians. Zero puts entry on a node.
    pub phase_offset: f64,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid(format!(
                "amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        if !(self.detuning_fraction > -1.0 && self.detuning_fraction.is_finite()) {
            return Err(invalid(format!(
                "detuning_fraction must exceed -1, got {}",
                self.detuning_fraction
            )));
        }
        if !self.phase_offset.is_finite() {
            return Err(invalid("phase_offset must be finite"));
        }
        Ok(())
    }

    pub fn with_detuning(&self, detuning_fraction: f64) -> Self {
        Self {
            detuning_fraction,
            ..*self
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    /// Field angular frequency `w = (1 + d) w0`.
    pub fn angular_frequency(&self, optics: &OpticsSpec) -> f64 {
        (1.0 + self.detuning_fraction) * characteristic_frequency(optics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsSpec {
    /// Verdet constant, rad/(T m). Negative for terbium-doped silica.
    pub verdet: f64,
    pub refractive_index: f64,
    /// Distance `y` between adjacent half-waveplates, meters.
    pub waveplate_separation: f64,
}

impl OpticsSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.verdet.is_finite() {
            return Err(invalid("verdet must be finite"));
        }
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return Err(invalid(format!(
                "refractive_index must be at least 1, got {}",
                self.refractive_index
            )));
        }
        if !(self.waveplate_separation > 0.0 && self.waveplate_separation.is_finite()) {
            return Err(invalid(format!(
                "waveplate_separation must be positive, got {}",
                self.waveplate_separation
            )));
        }
        Ok(())
    }

    pub fn with_separation(&self, waveplate_separation: f64) -> Self {
        Self {
            waveplate_separation,
            ..*self
        }
    }

    /// Photon group speed in the fiber.
    pub fn photon_speed(&self) -> f64 {
        SPEED_OF_LIGHT / self.refractive_index
    }

    /// Time for the photon to cover `length` meters.
    pub fn transit_time(&self, length: f64) -> f64 {
        length / self.photon_speed()
    }
}

/// `w0 = 2 pi c / (2 y n)`: the field frequency whose nodes meet the photon at
/// every waveplate.
pub fn characteristic_frequency(optics: &OpticsSpec) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (2.0 * optics.waveplate_separation * optics.refractive_index)
}

/// Number of field cycles the photon sees at `w0` over `length` meters,
/// `m = L / (2 y)`.
pub fn cycles_in_transit(optics: &OpticsSpec, length: f64) -> f64 {
    length / (2.0 * optics.waveplate_separation)
}

pub fn field_value(field: &FieldSpec, optics: &OpticsSpec, t: f64) -> f64 {
    field.amplitude * (field.angular_frequency(optics) * t + field.phase_offset).sin()
}

/// Faraday rotation `V B L` for a uniform field.
pub fn faraday_rotation_angle(verdet: f64, field: f64, length: f64) -> f64 {
    verdet * field * length
}

/// Exact Faraday rotation accumulated between fiber positions `from` and `to`:
/// `V * integral B(x n / c) dx`.
pub fn signal_rotation(field: &FieldSpec, optics: &OpticsSpec, from: f64, to: f64) -> f64 {
    let k = field.angular_frequency(optics) * optics.refractive_index / SPEED_OF_LIGHT;
    let mid = 0.5 * k * (from + to) + field.phase_offset;
    let half = 0.5 * k * (to - from);
    // cos(a) - cos(b) written as a product to stay accurate for short pieces.
    optics.verdet * field.amplitude * 2.0 * mid.sin() * half.sin() / k
}
