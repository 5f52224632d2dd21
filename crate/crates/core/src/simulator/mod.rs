//! The `WaveSimulator` algorithm: containers and routines composed into the
//! leapfrog time-stepping loop for
//! `∂²P/∂t² = v²(∂²P/∂x² + ∂²P/∂z²) + S(t)`.

mod config;
pub mod standing;
mod wavelet;

pub use config::{cfl_limit, check_cfl, CflCheck, Precision, SimConfig};
pub use wavelet::{make_ricker, ricker, SourceWavelet};

use crate::containers::ScalarField;
use crate::kernels::{self, Stencil};
use crate::spaces::SpaceOf;
use crate::{Backend, Error, Result, Scalar};

/// The six fields of the simulation, all `nz × nx` in memory space `M`.
#[derive(Debug)]
pub struct WaveState<M: crate::MemorySpace, T: Scalar> {
    pub pnew: ScalarField<M, T>,
    pub p: ScalarField<M, T>,
    pub pold: ScalarField<M, T>,
    pub pxx: ScalarField<M, T>,
    pub pzz: ScalarField<M, T>,
    pub v: ScalarField<M, T>,
}

/// Routine invocations recorded by [`WaveSimulator::enable_call_log`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Call {
    AddSource,
    FdPzz,
    FdPxx,
    FdTime,
    Swap,
}

/// Wavefield copied to host during a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    /// Number of completed steps.
    pub step: usize,
    /// Simulation time of the wavefield, `step·dt`.
    pub time: f64,
    pub data: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult<T> {
    pub nz: usize,
    pub nx: usize,
    /// Final pressure field on host.
    pub final_p: Vec<T>,
    pub snapshots: Vec<Snapshot<T>>,
}

impl<T: Scalar> SimulationResult<T> {
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.final_p)
    }
}

pub(crate) fn max_abs<T: Scalar>(values: &[T]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.as_f64().abs()))
}

/// Leapfrog acoustic wave simulator, generic over the execution space `E`.
///
/// All fields are allocated in `E`'s accessible memory space. Host data
/// enters only through `copy_from_host` (velocity, initial wavefields) and
/// leaves only through `copy_to_host` (snapshots, final field).
#[derive(Debug)]
pub struct WaveSimulator<E: Backend, T: Scalar> {
    cfg: SimConfig,
    stencil: Stencil,
    wavelet: Vec<T>,
    dh: T,
    dt: T,
    state: WaveState<SpaceOf<E>, T>,
    cfl: CflCheck,
    call_log: Option<Vec<Call>>,
    tag: E,
}

impl<E: Backend, T: Scalar> WaveSimulator<E, T> {
    /// Creates a simulator, refusing CFL-unstable configurations.
    pub fn new(cfg: &SimConfig, velocity: &[T]) -> Result<Self> {
        let sim = Self::new_unchecked(cfg, velocity)?;
        if !sim.cfl.passed {
            return Err(Error::Stability {
                ratio: sim.cfl.ratio,
                limit: sim.cfl.limit,
            });
        }
        Ok(sim)
    }

    /// Creates a simulator without enforcing the stability bound.
    pub fn new_unchecked(cfg: &SimConfig, velocity: &[T]) -> Result<Self> {
        cfg.validate()?;
        let (nz, nx) = (cfg.nz, cfg.nx);
        if velocity.len() != nz * nx {
            return Err(Error::Argument(format!(
                "velocity model has {} samples, expected {}x{} = {}",
                velocity.len(),
                nz,
                nx,
                nz * nx
            )));
        }
        if let Some((idx, v)) = velocity
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > T::zero()) || !v.is_finite())
        {
            return Err(Error::Argument(format!(
                "velocity must be positive everywhere, found {v} at index {idx}"
            )));
        }
        let v_max = velocity.iter().fold(0.0f64, |m, v| m.max(v.as_f64()));
        let cfl = check_cfl(cfg, v_max);
        let stencil = Stencil::of_order(cfg.stencil_order)?;
        let wavelet = make_ricker(cfg.nt, cfg.dt, cfg.src_freq, cfg.src_delay)?;

        let state = WaveState {
            pnew: ScalarField::zeros(nz, nx)?,
            p: ScalarField::zeros(nz, nx)?,
            pold: ScalarField::zeros(nz, nx)?,
            pxx: ScalarField::zeros(nz, nx)?,
            pzz: ScalarField::zeros(nz, nx)?,
            v: ScalarField::from_host(nz, nx, velocity)?,
        };
        Ok(WaveSimulator {
            cfg: cfg.clone(),
            stencil,
            wavelet: to_precision(wavelet.samples()),
            dh: T::from_f64(cfg.dh),
            dt: T::from_f64(cfg.dt),
            state,
            cfl,
            call_log: None,
            tag: E::default(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn cfl(&self) -> CflCheck {
        self.cfl
    }

    pub fn state(&self) -> &WaveState<SpaceOf<E>, T> {
        &self.state
    }

    /// Source amplitudes per step, in simulation precision.
    pub fn wavelet(&self) -> &[T] {
        &self.wavelet
    }

    /// Replaces the source time function; needs at least `nt` samples.
    pub fn set_wavelet(&mut self, wavelet: SourceWavelet) -> Result<()> {
        if wavelet.len() < self.cfg.nt {
            return Err(Error::Argument(format!(
                "wavelet has {} samples, need {}",
                wavelet.len(),
                self.cfg.nt
            )));
        }
        self.wavelet = to_precision(wavelet.samples());
        Ok(())
    }

    /// Loads the current and previous wavefields from host arrays.
    pub fn set_wavefields(&mut self, p: &[T], pold: &[T]) -> Result<()> {
        self.state.p.fill_from_host(p)?;
        self.state.pold.fill_from_host(pold)
    }

    /// Starts recording routine invocations.
    pub fn enable_call_log(&mut self) {
        self.call_log = Some(Vec::new());
    }

    pub fn call_log(&self) -> Option<&[Call]> {
        self.call_log.as_deref()
    }

    fn log(&mut self, call: Call) {
        if let Some(log) = &mut self.call_log {
            log.push(call);
        }
    }

    /// Advances one step using source sample `n`. Afterwards `P` holds the
    /// newest wavefield and `Pold` the previous one.
    pub fn step(&mut self, n: usize) -> Result<()> {
        if n >= self.cfg.nt {
            return Err(Error::Argument(format!(
                "step index {n} outside 0..{}",
                self.cfg.nt
            )));
        }
        let tag = self.tag;
        let s = &mut self.state;
        kernels::add_source(
            &mut s.p,
            self.wavelet[n],
            self.cfg.src_iz,
            self.cfg.src_ix,
            tag,
        )?;
        self.log(Call::AddSource);
        let s = &mut self.state;
        kernels::fd_pzz(&mut s.pzz, &s.p, self.dh, &self.stencil, tag)?;
        self.log(Call::FdPzz);
        let s = &mut self.state;
        kernels::fd_pxx(&mut s.pxx, &s.p, self.dh, &self.stencil, tag)?;
        self.log(Call::FdPxx);
        let s = &mut self.state;
        kernels::fd_time(
            &mut s.pnew,
            &s.p,
            &s.pold,
            &s.pxx,
            &s.pzz,
            &s.v,
            self.dt,
            tag,
        )?;
        self.log(Call::FdTime);
        let s = &mut self.state;
        s.pold.swap(&mut s.p)?;
        self.log(Call::Swap);
        let s = &mut self.state;
        s.p.swap(&mut s.pnew)?;
        self.log(Call::Swap);
        Ok(())
    }

    /// Copies the current pressure field to host.
    pub fn pressure_to_host(&self) -> Result<Vec<T>> {
        self.state.p.read_to_host()
    }

    pub fn velocity_to_host(&self) -> Result<Vec<T>> {
        self.state.v.read_to_host()
    }

    /// Runs all `nt` steps, handing each snapshot to `sink` as soon as it is
    /// copied to host. Returns the final pressure field.
    pub fn run_with<F>(&mut self, mut sink: F) -> Result<Vec<T>>
    where
        F: FnMut(Snapshot<T>) -> Result<()>,
    {
        let every = self.cfg.snapshot_every;
        for n in 0..self.cfg.nt {
            self.step(n)?;
            let done = n + 1;
            if every > 0 && done % every == 0 {
                sink(Snapshot {
                    step: done,
                    time: done as f64 * self.cfg.dt,
                    data: self.pressure_to_host()?,
                })?;
            }
        }
        self.pressure_to_host()
    }

    /// Runs all `nt` steps and collects the snapshots in memory.
    pub fn run(&mut self) -> Result<SimulationResult<T>> {
        let mut snapshots = Vec::new();
        let final_p = self.run_with(|s| {
            snapshots.push(s);
            Ok(())
        })?;
        Ok(SimulationResult {
            nz: self.cfg.nz,
            nx: self.cfg.nx,
            final_p,
            snapshots,
        })
    }
}

fn to_precision<T: Scalar>(samples: &[f64]) -> Vec<T> {
    samples.iter().map(|&s| T::from_f64(s)).collect()
}
