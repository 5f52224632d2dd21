//! Backend-agnostic test battery behind `portwave selftest`.
//!
//! Every check is written once, generic over the execution space, and
//! asserts on host copies only. The list of names is the same for every
//! backend.

use crate::containers::ScalarField;
use crate::kernels::{self, Stencil};
use crate::simulator::standing::ConvergenceStudy;
use crate::spaces::trace::{self, TraceScope};
use crate::spaces::SpaceOf;
use crate::{Backend, Error, MemorySpace, Result, Scalar};

pub type Check = fn() -> Result<()>;

/// Names of the battery, in execution order.
pub const CHECK_NAMES: [&str; 12] = [
    "field_round_trip_f32",
    "field_round_trip_f64",
    "space_copy",
    "field_swap",
    "add_source_point",
    "fd_pxx_constant",
    "fd_pxx_quadratic",
    "fd_pzz_quadratic",
    "fd_stencil_reference",
    "fd_time_update",
    "standing_wave_convergence",
    "allocation_balance",
];

pub fn battery<E: Backend>() -> [(&'static str, Check); 12] {
    let checks: [Check; 12] = [
        round_trip::<E, f32>,
        round_trip::<E, f64>,
        space_copy::<E>,
        swap::<E>,
        add_source_point::<E>,
        pxx_constant::<E>,
        pxx_quadratic::<E>,
        pzz_quadratic::<E>,
        stencil_reference::<E>,
        time_update::<E>,
        convergence::<E>,
        allocation_balance::<E>,
    ];
    let mut out = [("", checks[0]); 12];
    for (slot, (name, check)) in out.iter_mut().zip(CHECK_NAMES.iter().zip(checks)) {
        *slot = (name, check);
    }
    out
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Verification(what()))
    }
}

/// Deterministic values in `[-1, 1)`.
fn values<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            T::from_f64((state >> 11) as f64 / (1u64 << 52) as f64 - 1.0)
        })
        .collect()
}

fn same_bits<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bits() == y.bits())
}

type Field<E, T> = ScalarField<SpaceOf<E>, T>;

fn round_trip<E: Backend, T: Scalar>() -> Result<()> {
    for (nz, nx) in [(1, 1), (1, 9), (7, 1), (13, 17)] {
        let host = values::<T>(nz * nx, (nz * 31 + nx) as u64);
        let back = Field::<E, T>::from_host(nz, nx, &host)?.read_to_host()?;
        ensure(same_bits(&host, &back), || {
            format!("{nz}x{nx} {} round trip differs", T::NAME)
        })?;
    }
    let zeros = Field::<E, T>::zeros(3, 4)?.read_to_host()?;
    ensure(zeros.iter().all(|v| *v == T::zero()), || {
        "zeros() not zero".into()
    })
}

fn space_copy<E: Backend>() -> Result<()> {
    let host = values::<f64>(64, 5);
    let mut src = SpaceOf::<E>::allocate::<f64>(64)?;
    SpaceOf::<E>::copy_from_host(&mut src, &host, 64)?;
    let mut dst = SpaceOf::<E>::allocate_zeroed::<f64>(64)?;
    SpaceOf::<E>::copy(&mut dst, &src, 40)?;
    let mut back = vec![0.0; 64];
    SpaceOf::<E>::copy_to_host(&mut back, &dst, 64)?;
    ensure(
        same_bits(&back[..40], &host[..40]) && back[40..].iter().all(|v| *v == 0.0),
        || "partial space copy differs".into(),
    )
}

fn swap<E: Backend>() -> Result<()> {
    let mut a = Field::<E, f64>::from_host(1, 2, &[1.0, 2.0])?;
    let mut b = Field::<E, f64>::from_host(1, 2, &[3.0, 4.0])?;
    a.swap(&mut b)?;
    ensure(
        a.read_to_host()? == [3.0, 4.0] && b.read_to_host()? == [1.0, 2.0],
        || "swap did not exchange contents".into(),
    )
}

fn add_source_point<E: Backend>() -> Result<()> {
    let mut p = Field::<E, f64>::zeros(5, 6)?;
    kernels::add_source(&mut p, 1.5, 2, 3, E::default())?;
    kernels::add_source(&mut p, 0.25, 2, 3, E::default())?;
    let host = p.read_to_host()?;
    ensure(
        host.iter()
            .enumerate()
            .all(|(k, v)| *v == if k == 2 * 6 + 3 { 1.75 } else { 0.0 }),
        || "source not confined to one point".into(),
    )?;
    let out_of_range = kernels::add_source(&mut p, 1.0, 5, 0, E::default());
    ensure(matches!(out_of_range, Err(Error::Bounds(_))), || {
        "out-of-range source accepted".into()
    })
}

fn pxx_constant<E: Backend>() -> Result<()> {
    for order in [2, 4] {
        let stencil = Stencil::of_order(order)?;
        let p = Field::<E, f64>::from_host(9, 11, &[5.0; 99])?;
        let mut out = Field::<E, f64>::from_host(9, 11, &[7.0; 99])?;
        kernels::fd_pxx(&mut out, &p, 10.0, &stencil, E::default())?;
        ensure(out.read_to_host()?.iter().all(|v| *v == 0.0), || {
            format!("order {order}: derivative of a constant is not zero")
        })?;
    }
    Ok(())
}

fn quadratic_check<E: Backend>(along_x: bool) -> Result<()> {
    let (nz, nx, dh) = (6, 8, 0.5);
    let host: Vec<f64> = (0..nz * nx)
        .map(|k| {
            let idx = if along_x { k % nx } else { k / nx };
            (idx as f64 * dh).powi(2)
        })
        .collect();
    let p = Field::<E, f64>::from_host(nz, nx, &host)?;
    let mut out = Field::<E, f64>::zeros(nz, nx)?;
    let stencil = Stencil::second_order();
    if along_x {
        kernels::fd_pxx(&mut out, &p, dh, &stencil, E::default())?;
    } else {
        kernels::fd_pzz(&mut out, &p, dh, &stencil, E::default())?;
    }
    let out = out.read_to_host()?;
    for i in 0..nz {
        for j in 0..nx {
            let interior = if along_x {
                j > 0 && j < nx - 1
            } else {
                i > 0 && i < nz - 1
            };
            let want = if interior { 2.0 } else { 0.0 };
            ensure(out[i * nx + j] == want, || {
                format!("({i}, {j}) = {}, expected {want}", out[i * nx + j])
            })?;
        }
    }
    Ok(())
}

fn pxx_quadratic<E: Backend>() -> Result<()> {
    quadratic_check::<E>(true)
}

fn pzz_quadratic<E: Backend>() -> Result<()> {
    quadratic_check::<E>(false)
}

/// Straight sum over the taps, written without the kernel helpers.
fn reference_derivative(
    p: &[f64],
    nz: usize,
    nx: usize,
    c: &[f64],
    dh: f64,
    along_x: bool,
) -> Vec<f64> {
    let h = c.len() / 2;
    let mut out = vec![0.0; nz * nx];
    for i in 0..nz {
        for j in 0..nx {
            let (pos, n) = if along_x { (j, nx) } else { (i, nz) };
            if pos < h || pos + h >= n {
                continue;
            }
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate() {
                let q = pos + k - h;
                acc += ck
                    * if along_x {
                        p[i * nx + q]
                    } else {
                        p[q * nx + j]
                    };
            }
            out[i * nx + j] = acc / (dh * dh);
        }
    }
    out
}

fn stencil_reference<E: Backend>() -> Result<()> {
    let (nz, nx, dh) = (11, 13, 3.0);
    let host = values::<f64>(nz * nx, 17);
    let p = Field::<E, f64>::from_host(nz, nx, &host)?;
    let mut out = Field::<E, f64>::zeros(nz, nx)?;
    for order in [2, 4] {
        let stencil = Stencil::of_order(order)?;
        for along_x in [true, false] {
            if along_x {
                kernels::fd_pxx(&mut out, &p, dh, &stencil, E::default())?;
            } else {
                kernels::fd_pzz(&mut out, &p, dh, &stencil, E::default())?;
            }
            let got = out.read_to_host()?;
            let want = reference_derivative(&host, nz, nx, stencil.coefficients(), dh, along_x);
            let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let worst = got
                .iter()
                .zip(&want)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / scale));
            ensure(worst <= 1e-13, || {
                format!("order {order}, along_x={along_x}: relative deviation {worst:e}")
            })?;
        }
    }
    Ok(())
}

fn time_update<E: Backend>() -> Result<()> {
    let (nz, nx) = (5, 5);
    let zeros = vec![0.0f64; nz * nx];
    let mut pxx_host = zeros.clone();
    pxx_host[2 * nx + 2] = 1.0;
    let z = |d: &[f64]| Field::<E, f64>::from_host(nz, nx, d);
    let (p, pold, pxx, pzz, v) = (
        z(&zeros)?,
        z(&zeros)?,
        z(&pxx_host)?,
        z(&zeros)?,
        z(&[2.0; 25])?,
    );
    let mut pnew = Field::<E, f64>::zeros(nz, nx)?;
    kernels::fd_time(&mut pnew, &p, &pold, &pxx, &pzz, &v, 0.5, E::default())?;
    let out = pnew.read_to_host()?;
    ensure(out == pxx_host, || format!("unexpected update {out:?}"))?;

    let ph = values::<f64>(nz * nx, 3);
    let poh = values::<f64>(nz * nx, 4);
    let (p, pold, v0) = (z(&ph)?, z(&poh)?, z(&zeros)?);
    kernels::fd_time(&mut pnew, &p, &pold, &pxx, &pzz, &v0, 0.5, E::default())?;
    let want: Vec<f64> = ph.iter().zip(&poh).map(|(a, b)| 2.0 * a - b).collect();
    ensure(same_bits(&pnew.read_to_host()?, &want), || {
        "zero velocity does not reduce to 2P - Pold".into()
    })
}

fn convergence<E: Backend>() -> Result<()> {
    let study = ConvergenceStudy {
        coarse_cells: 16,
        coarse_steps: 100,
        levels: 2,
        ..ConvergenceStudy::default()
    };
    let levels = study.run::<E>()?;
    let ratio = ConvergenceStudy::ratios(&levels)[0];
    ensure((3.4..=4.6).contains(&ratio), || {
        format!("error ratio {ratio:.3} outside [3.4, 4.6]")
    })
}

fn allocation_balance<E: Backend>() -> Result<()> {
    trace::enable_for_current_thread();
    let scope = TraceScope::begin();
    {
        let a = Field::<E, f32>::from_host(4, 4, &[1.0; 16])?;
        let mut b = Field::<E, f32>::zeros(4, 4)?;
        kernels::fd_pxx(&mut b, &a, 1.0, &Stencil::second_order(), E::default())?;
        b.read_to_host()?;
    }
    let delta = scope.delta();
    ensure(
        delta.allocations == 2 && scope.live_allocations() == 0,
        || {
            format!(
                "{} allocations, {} still live",
                delta.allocations,
                scope.live_allocations()
            )
        },
    )
}

/// Runs the battery, printing one line per check. Returns the failed names.
pub fn run_battery<E: Backend>(out: &mut impl std::io::Write) -> Vec<&'static str> {
    let mut failed = Vec::new();
    for (name, check) in battery::<E>() {
        match check() {
            Ok(()) => {
                let _ = writeln!(out, "PASS {name}");
            }
            Err(e) => {
                let _ = writeln!(out, "FAIL {name}: {e}");
                failed.push(name);
            }
        }
    }
    failed
}
