//! The four routines of the wave simulator, dispatched at compile time on an
//! execution space tag.
//!
//! Each routine is a free function that validates its arguments on host
//! metadata and then forwards to the backend's [`KernelBackend`]
//! implementation. Adding a backend means adding a memory space, a tag, and
//! one `KernelBackend` impl; everything built on these functions is reused
//! unchanged.
//!
//! Every output element is one floating-point expression with a fixed
//! evaluation order, so all backends produce bit-identical results. Stencil
//! sums run over symmetric pairs from the inside out, with the centre tap
//! folded into each pair through the zero-sum property:
//! `w1·((p[j-1] + p[j+1]) - 2p[j]) + w2·((p[j-2] + p[j+2]) - 2p[j]) + ...`,
//! where `wk = ck/dh²`. A constant input gives exactly zero and a mirrored
//! input gives an exactly mirrored output.

mod backends;
pub(crate) mod cpu;

use crate::containers::ScalarField;
use crate::spaces::{Accesses, ExecutionSpace, MemorySpace, SpaceOf};
use crate::{Error, Result, Scalar};

/// Central second-derivative stencil, unscaled (the kernels apply `1/dh²`).
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    coefficients: Vec<f64>,
}

impl Stencil {
    /// Builds a stencil from its `2·half_width + 1` taps.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let n = coefficients.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "stencil needs an odd number (>= 3) of taps, got {n}"
            )));
        }
        if (0..n).any(|k| coefficients[k] != coefficients[n - 1 - k]) {
            return Err(Error::Argument(
                "stencil coefficients must be symmetric".into(),
            ));
        }
        let sum: f64 = coefficients.iter().sum();
        let scale: f64 = coefficients.iter().map(|c| c.abs()).sum();
        if sum.abs() > 1e-12 * scale {
            return Err(Error::Argument(format!(
                "stencil coefficients must sum to zero, got {sum:e}"
            )));
        }
        Ok(Stencil { coefficients })
    }

    /// `[1, -2, 1]`.
    pub fn second_order() -> Self {
        Stencil {
            coefficients: vec![1.0, -2.0, 1.0],
        }
    }

    /// `[-1/12, 4/3, -5/2, 4/3, -1/12]`.
    pub fn fourth_order() -> Self {
        Stencil {
            coefficients: vec![-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
        }
    }

    /// Stencil for accuracy order 2 or 4.
    pub fn of_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::second_order()),
            4 => Ok(Self::fourth_order()),
            _ => Err(Error::Argument(format!(
                "unsupported stencil order {order}; expected 2 or 4"
            ))),
        }
    }

    pub fn half_width(&self) -> usize {
        self.coefficients.len() / 2
    }

    /// Accuracy order, assuming a standard central stencil.
    pub fn order(&self) -> u32 {
        2 * self.half_width() as u32
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Pair weights `ck/dh²` converted to `T`. The centre coefficient is
    /// implied by the zero sum and not used.
    pub fn taps<T: Scalar>(&self, dh: T) -> Taps<T> {
        let h = self.half_width();
        let inv_dh2 = T::one() / (dh * dh);
        Taps {
            weights: (1..=h)
                .map(|k| T::from_f64(self.coefficients[h - k]) * inv_dh2)
                .collect(),
        }
    }
}

/// Stencil weights in kernel precision, ready for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Taps<T> {
    /// `ck/dh²` for pairs ordered from the innermost (`k = 1`) outwards.
    pub weights: Vec<T>,
}

impl<T: Scalar> Taps<T> {
    pub fn half_width(&self) -> usize {
        self.weights.len()
    }

    /// The second difference at one point. `at(k)` returns the sample at
    /// signed offset `k` from the centre.
    #[inline(always)]
    pub fn apply(&self, at: impl Fn(isize) -> T) -> T {
        let c = at(0);
        let twice = c + c;
        let mut acc = self.weights[0] * ((at(-1) + at(1)) - twice);
        for (k, &w) in self.weights.iter().enumerate().skip(1) {
            let k = k as isize + 1;
            acc = acc + w * ((at(-k) + at(k)) - twice);
        }
        acc
    }
}

/// Read-only inputs of the time update.
pub struct TimeInputs<'a, M: MemorySpace, T: Scalar> {
    pub p: &'a ScalarField<M, T>,
    pub pold: &'a ScalarField<M, T>,
    pub pxx: &'a ScalarField<M, T>,
    pub pzz: &'a ScalarField<M, T>,
    pub v: &'a ScalarField<M, T>,
}

/// Backend specialization of the routines over data held in `M`.
///
/// Implementations may assume their arguments were validated by the public
/// routine wrappers (matching extents, indices in range, grid wider than the
/// stencil).
#[diagnostic::on_unimplemented(
    message = "execution space `{Self}` is incompatible with memory space `{M}`",
    label = "`{Self}` has no kernels for data held in `{M}`",
    note = "the fields must live in `<{Self} as ExecutionSpace>::AccessibleSpace`"
)]
pub trait KernelBackend<M: MemorySpace>: Accesses<M> {
    /// `p[index] += amplitude`.
    fn add_source<T: Scalar>(p: &mut ScalarField<M, T>, amplitude: T, index: usize) -> Result<()>;

    /// Second difference along x (within rows); boundary columns zeroed.
    fn fd_pxx<T: Scalar>(
        out: &mut ScalarField<M, T>,
        p: &ScalarField<M, T>,
        taps: &Taps<T>,
    ) -> Result<()>;

    /// Second difference along z (across rows); boundary rows zeroed.
    fn fd_pzz<T: Scalar>(
        out: &mut ScalarField<M, T>,
        p: &ScalarField<M, T>,
        taps: &Taps<T>,
    ) -> Result<()>;

    /// `out = 2p - pold + dt2·v²·(pxx + pzz)` elementwise.
    fn fd_time<T: Scalar>(
        out: &mut ScalarField<M, T>,
        inputs: TimeInputs<'_, M, T>,
        dt2: T,
    ) -> Result<()>;
}

/// An execution space together with kernels for its own memory space.
pub trait Backend: ExecutionSpace + KernelBackend<SpaceOf<Self>> {}

impl<E> Backend for E where E: ExecutionSpace + KernelBackend<SpaceOf<E>> {}

/// Adds `amplitude` to `p[iz, ix]`.
pub fn add_source<M, T, E>(
    p: &mut ScalarField<M, T>,
    amplitude: T,
    iz: usize,
    ix: usize,
    _tag: E,
) -> Result<()>
where
    M: MemorySpace,
    T: Scalar,
    E: KernelBackend<M>,
{
    if iz >= p.nz() || ix >= p.nx() {
        return Err(Error::Bounds(format!(
            "source index ({iz}, {ix}) outside {}x{} field",
            p.nz(),
            p.nx()
        )));
    }
    E::add_source(p, amplitude, iz * p.nx() + ix)
}

/// `pxx = ∂²p/∂x²` on interior columns, zero in the boundary band.
pub fn fd_pxx<M, T, E>(
    pxx: &mut ScalarField<M, T>,
    p: &ScalarField<M, T>,
    dh: T,
    stencil: &Stencil,
    _tag: E,
) -> Result<()>
where
    M: MemorySpace,
    T: Scalar,
    E: KernelBackend<M>,
{
    check_pair(pxx, p, "fd_pxx")?;
    check_spacing(dh)?;
    let width = 2 * stencil.half_width() + 1;
    if p.nx() < width {
        return Err(Error::Argument(format!(
            "fd_pxx: nx = {} is narrower than the {width}-point stencil",
            p.nx()
        )));
    }
    E::fd_pxx(pxx, p, &stencil.taps(dh))
}

/// `pzz = ∂²p/∂z²` on interior rows, zero in the boundary band.
pub fn fd_pzz<M, T, E>(
    pzz: &mut ScalarField<M, T>,
    p: &ScalarField<M, T>,
    dh: T,
    stencil: &Stencil,
    _tag: E,
) -> Result<()>
where
    M: MemorySpace,
    T: Scalar,
    E: KernelBackend<M>,
{
    check_pair(pzz, p, "fd_pzz")?;
    check_spacing(dh)?;
    let width = 2 * stencil.half_width() + 1;
    if p.nz() < width {
        return Err(Error::Argument(format!(
            "fd_pzz: nz = {} is narrower than the {width}-point stencil",
            p.nz()
        )));
    }
    E::fd_pzz(pzz, p, &stencil.taps(dh))
}

/// Leapfrog time update `pnew = 2p - pold + dt²·v²·(pxx + pzz)`.
#[allow(clippy::too_many_arguments)]
pub fn fd_time<M, T, E>(
    pnew: &mut ScalarField<M, T>,
    p: &ScalarField<M, T>,
    pold: &ScalarField<M, T>,
    pxx: &ScalarField<M, T>,
    pzz: &ScalarField<M, T>,
    v: &ScalarField<M, T>,
    dt: T,
    _tag: E,
) -> Result<()>
where
    M: MemorySpace,
    T: Scalar,
    E: KernelBackend<M>,
{
    for (other, name) in [
        (p, "p"),
        (pold, "pold"),
        (pxx, "pxx"),
        (pzz, "pzz"),
        (v, "v"),
    ] {
        if !pnew.same_extents(other) {
            return Err(Error::Argument(format!(
                "fd_time: {name} is {}x{}, expected {}x{}",
                other.nz(),
                other.nx(),
                pnew.nz(),
                pnew.nx()
            )));
        }
    }
    if !(dt > T::zero()) {
        return Err(Error::Argument(format!(
            "fd_time: dt must be positive, got {dt}"
        )));
    }
    let inputs = TimeInputs {
        p,
        pold,
        pxx,
        pzz,
        v,
    };
    E::fd_time(pnew, inputs, dt * dt)
}

fn check_pair<M: MemorySpace, T: Scalar>(
    out: &ScalarField<M, T>,
    p: &ScalarField<M, T>,
    routine: &str,
) -> Result<()> {
    if !out.same_extents(p) {
        return Err(Error::Argument(format!(
            "{routine}: output is {}x{}, input is {}x{}",
            out.nz(),
            out.nx(),
            p.nz(),
            p.nx()
        )));
    }
    Ok(())
}

fn check_spacing<T: Scalar>(dh: T) -> Result<()> {
    if !(dh > T::zero()) || !dh.is_finite() {
        return Err(Error::Argument(format!(
            "grid spacing must be positive, got {dh}"
        )));
    }
    Ok(())
}
