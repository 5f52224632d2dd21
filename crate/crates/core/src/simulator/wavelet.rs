use std::f64::consts::PI;

use crate::{Error, Result};

/// Source time function sampled at the simulation time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceWavelet {
    samples: Vec<f64>,
}

impl SourceWavelet {
    /// A wavelet that injects nothing.
    pub fn silent(nt: usize) -> Self {
        SourceWavelet {
            samples: vec![0.0; nt],
        }
    }

    pub fn from_samples(samples: Vec<f64>) -> Self {
        SourceWavelet { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest absolute sample, 0 for an empty wavelet.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Ricker wavelet value at time `t` for peak frequency `f` and delay `t0`.
pub fn ricker(t: f64, f: f64, t0: f64) -> f64 {
    let a = (PI * f * (t - t0)).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

/// Samples `ricker(n·dt)` for `n` in `0..nt`.
pub fn make_ricker(nt: usize, dt: f64, f: f64, t0: f64) -> Result<SourceWavelet> {
    if !(f > 0.0) {
        return Err(Error::Argument(format!(
            "Ricker peak frequency must be positive, got {f}"
        )));
    }
    if !(t0 >= 0.0) {
        return Err(Error::Argument(format!(
            "Ricker delay must be non-negative, got {t0}"
        )));
    }
    Ok(SourceWavelet {
        samples: (0..nt).map(|n| ricker(n as f64 * dt, f, t0)).collect(),
    })
}
