//! Analytic cost model and timed roofline records for the stencil kernels.
//!
//! Two byte counts bracket the real traffic of each kernel: `naive` charges
//! every stencil tap as a separate read, `ideal` assumes perfect cache reuse
//! so each input array is read once. The roof is the measured triad
//! bandwidth times the arithmetic intensity.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::stream::{triad_bandwidth, StreamResult, DEFAULT_CACHE_BYTES};
use crate::containers::ScalarField;
use crate::kernels::{self, Stencil};
use crate::spaces::SpaceOf;
use crate::{Backend, Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    AddSource,
    FdPxx,
    FdPzz,
    FdTime,
}

impl KernelName {
    /// Kernels covered by the roofline analysis. `add_source` touches one
    /// point per step and is left out.
    pub const MEASURED: [KernelName; 3] =
        [KernelName::FdPxx, KernelName::FdPzz, KernelName::FdTime];

    pub fn name(self) -> &'static str {
        match self {
            KernelName::AddSource => "add_source",
            KernelName::FdPxx => "fd_pxx",
            KernelName::FdPzz => "fd_pzz",
            KernelName::FdTime => "fd_time",
        }
    }
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add_source" => Ok(KernelName::AddSource),
            "fd_pxx" => Ok(KernelName::FdPxx),
            "fd_pzz" => Ok(KernelName::FdPzz),
            "fd_time" => Ok(KernelName::FdTime),
            _ => Err(Error::Argument(format!("unknown kernel `{s}`"))),
        }
    }
}

/// Per-grid-point cost of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelCost {
    pub flops_per_point: u64,
    pub bytes_naive: u64,
    pub bytes_ideal: u64,
}

impl KernelCost {
    pub fn ai_naive(&self) -> f64 {
        self.flops_per_point as f64 / self.bytes_naive as f64
    }

    pub fn ai_ideal(&self) -> f64 {
        self.flops_per_point as f64 / self.bytes_ideal as f64
    }
}

/// Counts derived from the kernel definitions; see [`crate::kernels`].
pub fn count_kernel_costs(
    kernel: KernelName,
    stencil_order: u32,
    elem_bytes: usize,
) -> Result<KernelCost> {
    let e = elem_bytes as u64;
    match kernel {
        KernelName::FdPxx | KernelName::FdPzz => {
            let stencil = Stencil::of_order(stencil_order)?;
            let h = stencil.half_width() as u64;
            // doubling of the centre, per pair (add, subtract, weight
            // multiply) and the accumulation of all but the first pair
            let flops = 1 + 3 * h + (h - 1);
            let reads = 2 * stencil.half_width() as u64 + 1;
            Ok(KernelCost {
                flops_per_point: flops,
                bytes_naive: (reads + 1) * e,
                bytes_ideal: 2 * e,
            })
        }
        // 2·p, - pold, v·v, dt²·v², pxx + pzz, product, final add
        KernelName::FdTime => Ok(KernelCost {
            flops_per_point: 7,
            bytes_naive: 6 * e,
            bytes_ideal: 6 * e,
        }),
        KernelName::AddSource => Err(Error::Argument(
            "add_source is a single-point update and has no roofline cost model".into(),
        )),
    }
}

/// One kernel measurement placed on the roofline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RooflineRecord {
    pub kernel: KernelName,
    pub backend: &'static str,
    pub precision: &'static str,
    pub stencil_order: u32,
    pub grid_points: u64,
    pub flops_per_point: u64,
    pub bytes_naive: u64,
    pub bytes_ideal: u64,
    pub elapsed_s: f64,
    pub ai_naive: f64,
    pub ai_ideal: f64,
    pub gflops: f64,
    pub roof_gflops_naive: f64,
    pub roof_gflops_ideal: f64,
    pub efficiency_naive: f64,
    pub efficiency_ideal: f64,
    /// Measured bandwidth the roofs are based on, GB/s.
    #[serde(skip)]
    pub bandwidth_gbs: f64,
}

impl RooflineRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kernel: KernelName,
        backend: &'static str,
        precision: &'static str,
        stencil_order: u32,
        grid_points: u64,
        cost: KernelCost,
        elapsed_s: f64,
        bandwidth_gbs: f64,
    ) -> Self {
        let ai_naive = cost.ai_naive();
        let ai_ideal = cost.ai_ideal();
        let gflops = cost.flops_per_point as f64 * grid_points as f64 / elapsed_s / 1e9;
        let roof_gflops_naive = bandwidth_gbs * ai_naive;
        let roof_gflops_ideal = bandwidth_gbs * ai_ideal;
        RooflineRecord {
            kernel,
            backend,
            precision,
            stencil_order,
            grid_points,
            flops_per_point: cost.flops_per_point,
            bytes_naive: cost.bytes_naive,
            bytes_ideal: cost.bytes_ideal,
            elapsed_s,
            ai_naive,
            ai_ideal,
            gflops,
            roof_gflops_naive,
            roof_gflops_ideal,
            efficiency_naive: gflops / roof_gflops_naive,
            efficiency_ideal: gflops / roof_gflops_ideal,
            bandwidth_gbs,
        }
    }

    /// Achieved memory throughput under the ideal byte count, GB/s.
    pub fn achieved_bandwidth_gbs(&self) -> f64 {
        self.bytes_ideal as f64 * self.grid_points as f64 / self.elapsed_s / 1e9
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RooflineConfig {
    pub nz: usize,
    pub nx: usize,
    /// Timed repetitions per kernel (after one warm-up).
    pub reps: usize,
    pub stencil_order: u32,
    /// Each field must be at least four times this size.
    pub cache_bytes: usize,
}

impl RooflineConfig {
    pub fn new(nz: usize, nx: usize, reps: usize, stencil_order: u32) -> Self {
        RooflineConfig {
            nz,
            nx,
            reps,
            stencil_order,
            cache_bytes: DEFAULT_CACHE_BYTES,
        }
    }
}

fn time_min(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    f()?;
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Deterministic, cheap-to-generate test data in `[0.5, 1.5)`.
fn pattern<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    (0..len as u64)
        .map(|i| {
            let h = (i.wrapping_add(seed)).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            T::from_f64(0.5 + (h as f64) / (1u64 << 24) as f64)
        })
        .collect()
}

/// Times `fd_pxx`, `fd_pzz` and `fd_time` on backend `E` and places them on
/// the roofline defined by the triad rate in `stream`.
pub fn run_roofline<E: Backend, T: Scalar>(
    cfg: &RooflineConfig,
    stream: &[StreamResult],
) -> Result<Vec<RooflineRecord>> {
    let bandwidth = triad_bandwidth(stream).ok_or_else(|| {
        Error::Dependency(format!(
            "roofline on {} needs a stream triad result for the same backend",
            E::NAME
        ))
    })?;
    if cfg.reps == 0 {
        return Err(Error::Argument(
            "roofline repetitions must be at least 1".into(),
        ));
    }
    let (nz, nx) = (cfg.nz, cfg.nx);
    let len = nz.saturating_mul(nx);
    if len.saturating_mul(T::BYTES) < 4 * cfg.cache_bytes {
        return Err(Error::Argument(format!(
            "{nz}x{nx} {} grid does not exceed 4x the {}-byte cache",
            T::NAME,
            cfg.cache_bytes
        )));
    }
    let stencil = Stencil::of_order(cfg.stencil_order)?;
    let dh = T::from_f64(10.0);
    let dt = T::from_f64(1e-3);
    let tag = E::default();

    let field = |seed| ScalarField::<SpaceOf<E>, T>::from_host(nz, nx, &pattern(len, seed));
    let p = field(1)?;
    let pold = field(2)?;
    let v = field(3)?;
    let mut pxx = ScalarField::<SpaceOf<E>, T>::zeros(nz, nx)?;
    let mut pzz = ScalarField::<SpaceOf<E>, T>::zeros(nz, nx)?;
    let mut pnew = ScalarField::<SpaceOf<E>, T>::zeros(nz, nx)?;

    let t_pxx = time_min(cfg.reps, || {
        kernels::fd_pxx(&mut pxx, &p, dh, &stencil, tag)
    })?;
    let t_pzz = time_min(cfg.reps, || {
        kernels::fd_pzz(&mut pzz, &p, dh, &stencil, tag)
    })?;
    let t_time = time_min(cfg.reps, || {
        kernels::fd_time(&mut pnew, &p, &pold, &pxx, &pzz, &v, dt, tag)
    })?;

    KernelName::MEASURED
        .iter()
        .zip([t_pxx, t_pzz, t_time])
        .map(|(&kernel, elapsed)| {
            let cost = count_kernel_costs(kernel, cfg.stencil_order, T::BYTES)?;
            Ok(RooflineRecord::new(
                kernel,
                E::NAME,
                T::NAME,
                cfg.stencil_order,
                len as u64,
                cost,
                elapsed,
                bandwidth,
            ))
        })
        .collect()
}

/// Column order of the roofline CSV.
pub const ROOFLINE_CSV_HEADER: &str = "kernel,backend,precision,stencil_order,grid_points,flops_per_point,bytes_naive,bytes_ideal,elapsed_s,ai_naive,ai_ideal,gflops,roof_gflops_naive,roof_gflops_ideal,efficiency_naive,efficiency_ideal";

pub fn write_roofline_csv<W: Write>(out: W, records: &[RooflineRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(ROOFLINE_CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV report to `path`.
pub fn write_roofline_file(path: &Path, records: &[RooflineRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_roofline_csv(file, records).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.into(),
            reason: format!("{other:?}"),
        },
    })
}
