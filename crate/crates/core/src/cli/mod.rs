//! The `portwave` command-line driver.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success |
//! | 1  | selftest failure |
//! | 2  | CFL check failed (run refused) |
//! | 3  | file or format error |
//! | 4  | benchmark verification failed |
//! | 64 | invalid flags or arguments |
//! | 70 | internal error (allocation failure, bad handle) |

pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, RooflineConfig, StreamConfig, StreamResult};
use crate::io::{self, SnapshotWriter};
use crate::simulator::{Precision, SimConfig, WaveSimulator};
use crate::{Error, ExecutionSpace, Result, Scalar, Serial, SimDevice, Threaded};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_FILE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

/// File holding the final pressure field of a `simulate` run.
pub const FINAL_FILE: &str = "final.bin";

#[derive(Debug, Parser)]
#[command(
    name = "portwave",
    version,
    about = "Portable 2-D acoustic wave simulator and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write snapshots plus the final field.
    Simulate(SimulateArgs),
    /// Measure sustainable memory bandwidth.
    BenchStream(StreamArgs),
    /// Time the stencil kernels and place them on the roofline.
    BenchRoofline(RooflineArgs),
    /// Run the backend test battery.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendName {
    Serial,
    Threaded,
    Simdevice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionName {
    F32,
    F64,
}

impl From<PrecisionName> for Precision {
    fn from(p: PrecisionName) -> Self {
        match p {
            PrecisionName::F32 => Precision::F32,
            PrecisionName::F64 => Precision::F64,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("velocity").required(true).args(["vel_model", "vel_const"])))]
pub struct SimulateArgs {
    #[arg(long)]
    pub nx: usize,
    #[arg(long)]
    pub nz: usize,
    /// Grid spacing in metres.
    #[arg(long)]
    pub dh: f64,
    /// Time step in seconds.
    #[arg(long)]
    pub dt: f64,
    /// Number of time steps.
    #[arg(long)]
    pub nt: usize,
    #[arg(long, value_enum, default_value = "serial")]
    pub backend: BackendName,
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: PrecisionName,
    /// Binary velocity model file.
    #[arg(long, value_name = "PATH")]
    pub vel_model: Option<PathBuf>,
    /// Constant velocity in m/s.
    #[arg(long, value_name = "V")]
    pub vel_const: Option<f64>,
    /// Source column; defaults to the centre.
    #[arg(long)]
    pub src_x: Option<usize>,
    /// Source row; defaults to the centre.
    #[arg(long)]
    pub src_z: Option<usize>,
    /// Ricker peak frequency in Hz.
    #[arg(long, default_value_t = 25.0)]
    pub src_freq: f64,
    /// Ricker delay in seconds; defaults to 1/src-freq.
    #[arg(long)]
    pub src_delay: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub stencil_order: u32,
    /// Steps between snapshots; 0 writes none.
    #[arg(long, default_value_t = 100)]
    pub snapshot_every: usize,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Run even when the CFL check fails.
    #[arg(long)]
    pub allow_unstable: bool,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Elements per array.
    #[arg(long, default_value_t = 1 << 25)]
    pub size: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "serial")]
    pub backend: BackendName,
    /// Last-level cache size the arrays must exceed fourfold, in MiB.
    #[arg(long, default_value_t = 64)]
    pub cache_mib: usize,
}

#[derive(Debug, Args)]
pub struct RooflineArgs {
    #[arg(long, default_value_t = 8192)]
    pub nx: usize,
    #[arg(long, default_value_t = 8192)]
    pub nz: usize,
    /// Timed repetitions, used for the kernels and the bandwidth baseline.
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "serial")]
    pub backend: BackendName,
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: PrecisionName,
    #[arg(long, default_value_t = 2)]
    pub stencil_order: u32,
    /// CSV report path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub cache_mib: usize,
    /// Elements per stream array for the bandwidth baseline; defaults to the
    /// smallest size exceeding four times the cache.
    #[arg(long)]
    pub stream_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, value_enum)]
    pub backend: BackendName,
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Stability { .. } => EXIT_UNSTABLE,
        Error::Format { .. } | Error::Length { .. } | Error::Io { .. } | Error::Domain(_) => {
            EXIT_FILE
        }
        Error::Verification(_) => EXIT_VERIFY,
        Error::Argument(_) | Error::Bounds(_) | Error::Dependency(_) => EXIT_USAGE,
        Error::OutOfMemory { .. } | Error::InvalidHandle { .. } => EXIT_INTERNAL,
    }
}

/// Instantiates `$body` once per backend with `$E` bound to the tag type.
macro_rules! with_backend {
    ($backend:expr, $E:ident => $body:expr) => {
        match $backend {
            BackendName::Serial => {
                type $E = Serial;
                $body
            }
            BackendName::Threaded => {
                type $E = Threaded;
                $body
            }
            BackendName::Simdevice => {
                type $E = SimDevice;
                $body
            }
        }
    };
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, &mut out),
        Command::BenchStream(a) => cmd_bench_stream(&a, &mut out),
        Command::BenchRoofline(a) => cmd_bench_roofline(&a, &mut out),
        Command::Selftest(a) => return cmd_selftest(&a, &mut out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Summary of a finished `simulate` run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub wall_s: f64,
    pub max_abs_p: f64,
    pub backend: &'static str,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "steps={} wall_s={:.6} max_abs_p={:e} backend={}",
            self.steps, self.wall_s, self.max_abs_p, self.backend
        )
    }
}

fn load_velocity(a: &SimulateArgs) -> Result<Vec<f64>> {
    if let Some(v) = a.vel_const {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Argument(format!(
                "--vel-const must be positive, got {v}"
            )));
        }
        return Ok(vec![v; a.nz * a.nx]);
    }
    let path = a
        .vel_model
        .as_deref()
        .expect("clap enforces one velocity source");
    let model = io::read_velocity_model(path)?;
    if (model.nz, model.nx) != (a.nz, a.nx) {
        return Err(Error::Format {
            path: path.into(),
            reason: format!(
                "model is {}x{}, the run is {}x{}",
                model.nz, model.nx, a.nz, a.nx
            ),
        });
    }
    if ((model.dh - a.dh) / a.dh).abs() > 1e-6 {
        return Err(Error::Format {
            path: path.into(),
            reason: format!("model spacing {} differs from --dh {}", model.dh, a.dh),
        });
    }
    Ok(model.data.iter().map(|&v| v as f64).collect())
}

fn sim_config(a: &SimulateArgs) -> SimConfig {
    SimConfig {
        nz: a.nz,
        nx: a.nx,
        dh: a.dh,
        dt: a.dt,
        nt: a.nt,
        src_iz: a.src_z.unwrap_or(a.nz / 2),
        src_ix: a.src_x.unwrap_or(a.nx / 2),
        src_freq: a.src_freq,
        src_delay: a.src_delay.unwrap_or(1.0 / a.src_freq),
        stencil_order: a.stencil_order,
        snapshot_every: a.snapshot_every,
        precision: a.precision.into(),
    }
}

/// Runs one simulation on backend `E`, writing its outputs into `dir`.
pub fn simulate_to_dir<E: crate::Backend, T: Scalar>(
    cfg: &SimConfig,
    velocity: &[f64],
    dir: &Path,
    allow_unstable: bool,
) -> Result<RunSummary> {
    let velocity: Vec<T> = velocity.iter().map(|&v| T::from_f64(v)).collect();
    let mut sim = if allow_unstable {
        WaveSimulator::<E, T>::new_unchecked(cfg, &velocity)?
    } else {
        WaveSimulator::<E, T>::new(cfg, &velocity)?
    };
    let cfl = sim.cfl();
    if !cfl.passed {
        eprintln!(
            "warning: CFL ratio {:.6} exceeds limit {:.6}; the run is unstable",
            cfl.ratio, cfl.limit
        );
    }
    let mut writer = SnapshotWriter::create(dir)?;
    let (nz, nx) = (cfg.nz, cfg.nx);
    let start = Instant::now();
    let final_p = sim.run_with(|s| writer.write(s.step, s.time, &s.data, nz, nx).map(drop))?;
    let wall_s = start.elapsed().as_secs_f64();
    io::write_field_file(&dir.join(FINAL_FILE), &final_p)?;
    Ok(RunSummary {
        steps: cfg.nt,
        wall_s,
        max_abs_p: crate::simulator::max_abs(&final_p),
        backend: E::NAME,
    })
}

fn cmd_simulate(a: &SimulateArgs, out: &mut impl Write) -> Result<()> {
    let cfg = sim_config(a);
    cfg.validate()?;
    let velocity = load_velocity(a)?;
    let summary = with_backend!(a.backend, E => match a.precision {
        PrecisionName::F32 => simulate_to_dir::<E, f32>(&cfg, &velocity, &a.out, a.allow_unstable),
        PrecisionName::F64 => simulate_to_dir::<E, f64>(&cfg, &velocity, &a.out, a.allow_unstable),
    })?;
    let _ = writeln!(out, "{summary}");
    Ok(())
}

fn print_stream(out: &mut impl Write, backend: &str, results: &[StreamResult]) {
    let _ = writeln!(
        out,
        "backend={backend} array_bytes={}",
        results.first().map_or(0, |r| r.array_bytes)
    );
    let _ = writeln!(
        out,
        "{:<8}{:>14}{:>14}{:>14}{:>14}",
        "op", "best_GB/s", "min_s", "max_s", "avg_s"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:<8}{:>14.3}{:>14.6}{:>14.6}{:>14.6}",
            r.op.name(),
            r.best_rate_gbs,
            r.min_s,
            r.max_s,
            r.avg_s
        );
    }
}

fn stream_on(backend: BackendName, cfg: &StreamConfig) -> Result<Vec<StreamResult>> {
    with_backend!(backend, E => bench::run_stream::<E>(cfg))
}

fn backend_name(backend: BackendName) -> &'static str {
    with_backend!(backend, E => <E as ExecutionSpace>::NAME)
}

fn cmd_bench_stream(a: &StreamArgs, out: &mut impl Write) -> Result<()> {
    let cfg = StreamConfig {
        cache_bytes: a.cache_mib << 20,
        ..StreamConfig::new(a.size, a.reps)
    };
    let results = stream_on(a.backend, &cfg)?;
    print_stream(out, backend_name(a.backend), &results);
    Ok(())
}

fn cmd_bench_roofline(a: &RooflineArgs, out: &mut impl Write) -> Result<()> {
    if a.reps == 0 {
        return Err(Error::Argument("--reps must be at least 1".into()));
    }
    let cache_bytes = a.cache_mib << 20;
    let stream_len = a.stream_size.unwrap_or((4 * cache_bytes).div_ceil(8));
    let stream_cfg = StreamConfig {
        cache_bytes,
        ..StreamConfig::new(stream_len, a.reps)
    };
    let cfg = RooflineConfig {
        cache_bytes,
        ..RooflineConfig::new(a.nz, a.nx, a.reps, a.stencil_order)
    };
    let stream = stream_on(a.backend, &stream_cfg)?;
    print_stream(out, backend_name(a.backend), &stream);
    let records = with_backend!(a.backend, E => match a.precision {
        PrecisionName::F32 => bench::run_roofline::<E, f32>(&cfg, &stream),
        PrecisionName::F64 => bench::run_roofline::<E, f64>(&cfg, &stream),
    })?;
    bench::write_roofline_file(&a.out, &records)?;
    let _ = writeln!(
        out,
        "{:<8}{:>10}{:>10}{:>12}{:>12}{:>12}",
        "kernel", "ai_naive", "ai_ideal", "gflops", "roof_ideal", "eff_ideal"
    );
    for r in &records {
        let _ = writeln!(
            out,
            "{:<8}{:>10.4}{:>10.4}{:>12.4}{:>12.4}{:>12.4}",
            r.kernel.name(),
            r.ai_naive,
            r.ai_ideal,
            r.gflops,
            r.roof_gflops_ideal,
            r.efficiency_ideal
        );
    }
    let _ = writeln!(out, "wrote {}", a.out.display());
    Ok(())
}

fn cmd_selftest(a: &SelftestArgs, out: &mut impl Write) -> i32 {
    let name = backend_name(a.backend);
    let failed = with_backend!(a.backend, E => selftest::run_battery::<E>(out));
    let total = selftest::CHECK_NAMES.len();
    let _ = writeln!(
        out,
        "selftest backend={name} passed={} failed={}",
        total - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        EXIT_OK
    } else {
        let _ = writeln!(out, "failing: {}", failed.join(", "));
        EXIT_SELFTEST
    }
}
