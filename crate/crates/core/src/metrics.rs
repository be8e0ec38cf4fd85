//! Observables derived from ensembles and sweeps.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStrength {
    pub theta: f64,
    pub theta_max: f64,
    pub ratio: f64,
}

/// `theta / theta_max`, sign preserved.
pub fn signal_strength(theta: f64, theta_max: f64) -> Result<SignalStrength> {
    if theta_max == 0.0 {
        return Err(Error::DegenerateRatio);
    }
    Ok(SignalStrength {
        theta,
        theta_max,
        ratio: theta / theta_max,
    })
}

/// `1 / (2 pi m |dw/w0|)`, capped at one.
pub fn detuning_envelope(detuning_fraction: f64, cycles: u32) -> Result<f64> {
    if detuning_fraction == 0.0 {
        return Err(Error::UndefinedEnvelope);
    }
    if cycles == 0 {
        return Err(invalid("cycle count must be at least 1"));
    }
    Ok((1.0 / (2.0 * PI * f64::from(cycles) * detuning_fraction.abs())).min(1.0))
}

/// Counts roots of a sampled curve: strict sign changes between consecutive
/// samples, plus samples with `|v| <= zero_tol`.
pub fn count_zero_crossings(values: &[f64], zero_tol: f64) -> usize {
    let mut count = 0;
    let mut previous: Option<f64> = None;
    for &v in values {
        if v.abs() <= zero_tol {
            count += 1;
            previous = None;
            continue;
        }
        if let Some(p) = previous {
            if p.signum() != v.signum() {
                count += 1;
            }
        }
        previous = Some(v);
    }
    count
}

/// Full width of the region around the peak at `x = 0` where
/// `|v| >= 0.5 |v(0)|`. Crossings are located by linear interpolation; a side
/// that never drops below half is taken to extend to its last sample.
/// `xs` must be sorted and contain 0.
pub fn half_max_bandwidth(xs: &[f64], values: &[f64]) -> Result<f64> {
    if xs.len() != values.len() || xs.is_empty() {
        return Err(invalid("bandwidth needs matching, non-empty samples"));
    }
    let centre = xs
        .iter()
        .position(|&x| x == 0.0)
        .ok_or_else(|| invalid("bandwidth needs a sample at zero detuning"))?;
    let peak = values[centre].abs();
    if peak == 0.0 {
        return Err(Error::DegenerateRatio);
    }
    let half = 0.5 * peak;
    let edge = |indices: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut prev = centre;
        for i in indices {
            let v = values[i].abs();
            if v < half {
                let vp = values[prev].abs();
                let t = (vp - half) / (vp - v);
                return xs[prev] + t * (xs[i] - xs[prev]);
            }
            prev = i;
        }
        xs[prev]
    };
    let right = edge(&mut (centre + 1..xs.len()));
    let left = edge(&mut (0..centre).rev());
    // One-sided grids mirror the measured half.
    Ok(match (centre == 0, centre == xs.len() - 1) {
        (true, false) => 2.0 * right,
        (false, true) => -2.0 * left,
        _ => right - left,
    })
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("linear fit needs at least two matching points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("linear fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
