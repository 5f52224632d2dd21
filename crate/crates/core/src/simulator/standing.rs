//! The rigid-box eigenmode `sin(kx·x)·sin(kz·z)·cos(ωt)` with
//! `ω = v·√(kx² + kz²)`, an exact solution of the constant-velocity wave
//! equation with zero pressure on the boundary. Used as the convergence
//! reference for the time-stepping loop.

use std::f64::consts::PI;

use super::{SimConfig, SourceWavelet, WaveSimulator};
use crate::simulator::Precision;
use crate::{Backend, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandingWave {
    /// Box size along z, metres.
    pub lz: f64,
    /// Box size along x, metres.
    pub lx: f64,
    pub velocity: f64,
    /// Mode numbers (half wavelengths across the box).
    pub mode_z: u32,
    pub mode_x: u32,
}

impl StandingWave {
    pub fn kz(&self) -> f64 {
        self.mode_z as f64 * PI / self.lz
    }

    pub fn kx(&self) -> f64 {
        self.mode_x as f64 * PI / self.lx
    }

    pub fn omega(&self) -> f64 {
        self.velocity * self.kx().hypot(self.kz())
    }

    pub fn pressure(&self, t: f64, z: f64, x: f64) -> f64 {
        (self.kx() * x).sin() * (self.kz() * z).sin() * (self.omega() * t).cos()
    }

    /// Samples the mode on an `nz × nx` grid with spacing `dh`; boundary
    /// points are set to exactly zero.
    pub fn sample(&self, nz: usize, nx: usize, dh: f64, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; nz * nx];
        for i in 1..nz - 1 {
            for j in 1..nx - 1 {
                out[i * nx + j] = self.pressure(t, i as f64 * dh, j as f64 * dh);
            }
        }
        out
    }
}

/// Grid refinement study on a square box.
///
/// Each level doubles the number of cells per side and halves `dh` and `dt`
/// (the CFL ratio is held fixed). All levels integrate to the same final
/// time, `coarse_steps` steps of the coarsest level.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub length: f64,
    pub velocity: f64,
    pub cfl_ratio: f64,
    pub coarse_cells: usize,
    pub coarse_steps: usize,
    pub levels: usize,
}

impl Default for ConvergenceStudy {
    fn default() -> Self {
        ConvergenceStudy {
            length: 320.0,
            velocity: 1000.0,
            cfl_ratio: 0.5,
            coarse_cells: 32,
            coarse_steps: 200,
            levels: 3,
        }
    }
}

/// Max-norm error of one refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelError {
    pub cells: usize,
    pub dh: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_error: f64,
}

impl ConvergenceStudy {
    pub fn mode(&self) -> StandingWave {
        StandingWave {
            lz: self.length,
            lx: self.length,
            velocity: self.velocity,
            mode_z: 1,
            mode_x: 1,
        }
    }

    /// Runs one level with `cells` cells per side (`cells + 1` grid points).
    pub fn run_level<E: Backend>(&self, cells: usize) -> Result<LevelError> {
        let n = cells + 1;
        let dh = self.length / cells as f64;
        let dt = self.cfl_ratio * dh / self.velocity;
        let steps = self.coarse_steps * cells / self.coarse_cells;
        let cfg = SimConfig {
            nz: n,
            nx: n,
            dh,
            dt,
            nt: steps,
            src_iz: n / 2,
            src_ix: n / 2,
            src_freq: 1.0,
            src_delay: 0.0,
            stencil_order: 2,
            snapshot_every: 0,
            precision: Precision::F64,
        };
        let mode = self.mode();
        let velocity = vec![self.velocity; n * n];
        let mut sim = WaveSimulator::<E, f64>::new(&cfg, &velocity)?;
        sim.set_wavelet(SourceWavelet::silent(steps))?;
        sim.set_wavefields(&mode.sample(n, n, dh, 0.0), &mode.sample(n, n, dh, -dt))?;
        let result = sim.run()?;
        let exact = mode.sample(n, n, dh, steps as f64 * dt);
        let max_error = result
            .final_p
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(LevelError {
            cells,
            dh,
            dt,
            steps,
            max_error,
        })
    }

    pub fn run<E: Backend>(&self) -> Result<Vec<LevelError>> {
        (0..self.levels)
            .map(|l| self.run_level::<E>(self.coarse_cells << l))
            .collect()
    }

    /// Successive error ratios `e(l) / e(l+1)`.
    pub fn ratios(levels: &[LevelError]) -> Vec<f64> {
        levels
            .windows(2)
            .map(|w| w[0].max_error / w[1].max_error)
            .collect()
    }
}
