//! Piecewise-constant birefringence noise.
//!
//! The fiber is cut into homogeneous segments one coherence length long. Each
//! segment carries an independent zero-mean Gaussian phase: the total `z`
//! rotation a photon picks up crossing that whole segment. Segment phases are
//! scaled so the phase summed over the full fiber has standard deviation
//! `total_phase_std`.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::seeding::rng_from_seed;

/// Relative slack when deciding how many segments cover a fiber, so that
/// `0.3 / 0.1 = 2.9999999999999996` still means three segments.
const COVER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Segment length `L_c` in meters.
    pub coherence_length: f64,
    /// Standard deviation of the phase accumulated over the whole fiber, radians.
    pub total_phase_std: f64,
    /// Carrier wavelength in meters. Kept for provenance only: phases are
    /// sampled directly rather than through `2 pi dL dn / lambda`.
    pub wavelength: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.coherence_length > 0.0 && self.coherence_length.is_finite()) {
            return Err(invalid(format!(
                "coherence_length must be positive, got {}",
                self.coherence_length
            )));
        }
        if !(self.total_phase_std >= 0.0 && self.total_phase_std.is_finite()) {
            return Err(invalid(format!(
                "total_phase_std must be non-negative, got {}",
                self.total_phase_std
            )));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(invalid(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        Ok(())
    }

    /// A noiseless spec with the same geometry.
    pub fn silent(&self) -> Self {
        Self {
            total_phase_std: 0.0,
            ..*self
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    pub fn segment_count(&self, fiber_length: f64) -> usize {
        segment_count(fiber_length, self.coherence_length)
    }

    /// Per-segment phase std, `total_phase_std / sqrt(N)`.
    pub fn segment_std(&self, fiber_length: f64) -> f64 {
        self.total_phase_std / (self.segment_count(fiber_length) as f64).sqrt()
    }
}

fn segment_count(fiber_length: f64, segment_length: f64) -> usize {
    let ratio = fiber_length / segment_length;
    ((ratio * (1.0 - COVER_SLACK)).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    segment_length: f64,
    phases: Vec<f64>,
}

impl PhaseProfile {
    pub fn new(segment_length: f64, phases: Vec<f64>) -> Result<Self> {
        if !(segment_length > 0.0 && segment_length.is_finite()) {
            return Err(invalid("segment_length must be positive"));
        }
        if phases.is_empty() {
            return Err(invalid("a phase profile needs at least one segment"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("segment phases must be finite"));
        }
        Ok(Self {
            segment_length,
            phases,
        })
    }

    /// Single segment of uniform phase covering `length` meters.
    pub fn uniform(length: f64, phase: f64) -> Result<Self> {
        Self::new(length, vec![phase])
    }

    pub fn segment_length(&self) -> f64 {
        self.segment_length
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn covered_length(&self) -> f64 {
        self.phases.len() as f64 * self.segment_length
    }

    /// Whether the profile reaches `length`, allowing for rounding in `N * L_c`.
    pub fn covers(&self, length: f64) -> bool {
        self.covered_length() >= length * (1.0 - COVER_SLACK)
    }

    /// Total phase of the segment containing `position`.
    pub fn phase_at(&self, position: f64) -> Result<f64> {
        self.segment_index(position).map(|i| self.phases[i])
    }

    pub fn segment_index(&self, position: f64) -> Result<usize> {
        let covered = self.covered_length();
        if !(position >= 0.0 && position < covered) {
            return Err(Error::OutOfRange { position, covered });
        }
        let i = (position / self.segment_length).floor() as usize;
        Ok(i.min(self.phases.len() - 1))
    }

    /// Phase per meter inside segment `index`.
    pub(crate) fn rate(&self, index: usize) -> f64 {
        self.phases[index] / self.segment_length
    }
}

/// Draws `ceil(fiber_length / L_c)` independent segment phases with std
/// `total_phase_std / sqrt(N)`, deterministically from `spec.seed`.
pub fn sample_profile(spec: &NoiseSpec, fiber_length: f64) -> Result<PhaseProfile> {
    spec.validate()?;
    if !(fiber_length > 0.0 && fiber_length.is_finite()) {
        return Err(invalid(format!(
            "fiber_length must be positive, got {fiber_length}"
        )));
    }
    let n = spec.segment_count(fiber_length);
    let sigma = spec.segment_std(fiber_length);
    let phases = if sigma == 0.0 {
        vec![0.0; n]
    } else {
        let mut rng = rng_from_seed(spec.seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigma * z
            })
            .collect()
    };
    PhaseProfile::new(spec.coherence_length, phases)
}

pub fn phase_at(profile: &PhaseProfile, position: f64) -> Result<f64> {
    profile.phase_at(position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{derive_seed, SeedStream};

    fn spec(std: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            coherence_length: 3.0,
            total_phase_std: std,
            wavelength: 1.064e-6,
            seed,
        }
    }

    fn sample_std(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn silent_profile_is_zero() {
        let p = sample_profile(&spec(0.0, 9), 500.0).unwrap();
        assert!(p.phases().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn segment_count_is_ceiling() {
        // Direct count: segments needed until k * 3 >= 500.
        let mut k = 0;
        while (k as f64) * 3.0 < 500.0 {
            k += 1;
        }
        assert_eq!(k, 167);
        assert_eq!(
            sample_profile(&spec(1.0, 1), 500.0).unwrap().phases().len(),
            k
        );
        assert_eq!(segment_count(0.3, 0.1), 3);
        assert_eq!(segment_count(3.0, 3.0), 1);
        assert_eq!(segment_count(0.5, 3.0), 1);
    }

    #[test]
    fn segment_std_matches_configuration() {
        let mut draws = Vec::with_capacity(100_200);
        let mut i = 0;
        while draws.len() < 100_000 {
            let s = spec(100.0, derive_seed(11, SeedStream::NoiseProfile, i));
            draws.extend_from_slice(sample_profile(&s, 500.0).unwrap().phases());
            i += 1;
        }
        let expected = 100.0 / 167f64.sqrt();
        assert!((expected - 7.74).abs() < 0.01);
        let got = sample_std(&draws);
        assert!(
            (got / expected - 1.0).abs() < 0.02,
            "std {got} vs {expected}"
        );
    }

    #[test]
    fn zero_mean_over_a_million_phases() {
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut i = 0;
        while n < 1_000_000 {
            let s = spec(100.0, derive_seed(5, SeedStream::NoiseProfile, i));
            let p = sample_profile(&s, 500.0).unwrap();
            sum += p.phases().iter().sum::<f64>();
            n += p.phases().len();
            i += 1;
        }
        let sigma_seg = 100.0 / 167f64.sqrt();
        assert!((sum / n as f64).abs() < 3.0 * sigma_seg / 1e3);
    }

    #[test]
    fn summed_phase_walks_to_total_std() {
        let totals: Vec<f64> = (0..4000)
            .map(|i| {
                let s = spec(100.0, derive_seed(3, SeedStream::NoiseProfile, i));
                sample_profile(&s, 500.0).unwrap().phases().iter().sum()
            })
            .collect();
        let got = sample_std(&totals);
        assert!((got / 100.0 - 1.0).abs() < 0.05, "total std {got}");
    }

    #[test]
    fn profiles_are_deterministic_per_seed() {
        let a = sample_profile(&spec(100.0, 77), 500.0).unwrap();
        let b = sample_profile(&spec(100.0, 77), 500.0).unwrap();
        let c = sample_profile(&spec(100.0, 78), 500.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut bad = spec(1.0, 0);
        bad.coherence_length = 0.0;
        assert!(sample_profile(&bad, 10.0).is_err());
        assert!(sample_profile(&spec(-1.0, 0), 10.0).is_err());
        let mut bad = spec(1.0, 0);
        bad.wavelength = -1.0;
        assert!(sample_profile(&bad, 10.0).is_err());
        assert!(sample_profile(&spec(1.0, 0), 0.0).is_err());
    }

    #[test]
    fn phase_lookup() {
        let p = PhaseProfile::new(3.0, vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(phase_at(&p, 0.0).unwrap(), 0.1);
        assert_eq!(p.phase_at(4.5).unwrap(), 0.2);
        assert_eq!(p.phase_at(9.0 - 1e-12).unwrap(), 0.3);
        assert!(matches!(p.phase_at(9.0), Err(Error::OutOfRange { .. })));
        assert!(p.phase_at(-0.1).is_err());
    }
}
