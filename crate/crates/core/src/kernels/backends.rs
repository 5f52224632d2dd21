use rayon::prelude::*;

use super::{cpu, KernelBackend, Taps, TimeInputs};
use crate::containers::ScalarField;
use crate::spaces::{HostSpace, Serial, SimDevice, SimDeviceSpace, Threaded};
use crate::{Result, Scalar};

impl KernelBackend<HostSpace> for Serial {
    fn add_source<T: Scalar>(
        p: &mut ScalarField<HostSpace, T>,
        amplitude: T,
        index: usize,
    ) -> Result<()> {
        let s = p.as_mut_slice();
        s[index] = s[index] + amplitude;
        Ok(())
    }

    fn fd_pxx<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        p: &ScalarField<HostSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let nx = p.nx();
        cpu::pxx_rows(out.as_mut_slice(), p.as_slice(), nx, taps);
        Ok(())
    }

    fn fd_pzz<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        p: &ScalarField<HostSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let (nz, nx) = p.extents();
        cpu::pzz_rows(out.as_mut_slice(), p.as_slice(), nz, nx, 0, taps);
        Ok(())
    }

    fn fd_time<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        i: TimeInputs<'_, HostSpace, T>,
        dt2: T,
    ) -> Result<()> {
        cpu::time_rows(
            out.as_mut_slice(),
            i.p.as_slice(),
            i.pold.as_slice(),
            i.pxx.as_slice(),
            i.pzz.as_slice(),
            i.v.as_slice(),
            dt2,
        );
        Ok(())
    }
}

/// Rows per worker for a static partition of `nz` rows.
fn rows_per_block(nz: usize) -> usize {
    nz.div_ceil(rayon::current_num_threads()).max(1)
}

impl KernelBackend<HostSpace> for Threaded {
    fn add_source<T: Scalar>(
        p: &mut ScalarField<HostSpace, T>,
        amplitude: T,
        index: usize,
    ) -> Result<()> {
        // A single-point update; nothing to parallelize.
        Serial::add_source(p, amplitude, index)
    }

    fn fd_pxx<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        p: &ScalarField<HostSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let (nz, nx) = p.extents();
        let block = rows_per_block(nz) * nx;
        out.as_mut_slice()
            .par_chunks_mut(block)
            .zip(p.as_slice().par_chunks(block))
            .for_each(|(o, pin)| cpu::pxx_rows(o, pin, nx, taps));
        Ok(())
    }

    fn fd_pzz<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        p: &ScalarField<HostSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let (nz, nx) = p.extents();
        let rows = rows_per_block(nz);
        let pin = p.as_slice();
        out.as_mut_slice()
            .par_chunks_mut(rows * nx)
            .enumerate()
            .for_each(|(b, o)| cpu::pzz_rows(o, pin, nz, nx, b * rows, taps));
        Ok(())
    }

    fn fd_time<T: Scalar>(
        out: &mut ScalarField<HostSpace, T>,
        i: TimeInputs<'_, HostSpace, T>,
        dt2: T,
    ) -> Result<()> {
        let (nz, nx) = out.extents();
        let block = rows_per_block(nz) * nx;
        let (p, pold, pxx, pzz, v) = (
            i.p.as_slice(),
            i.pold.as_slice(),
            i.pxx.as_slice(),
            i.pzz.as_slice(),
            i.v.as_slice(),
        );
        out.as_mut_slice()
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(b, o)| {
                let r = b * block..b * block + o.len();
                cpu::time_rows(
                    o,
                    &p[r.clone()],
                    &pold[r.clone()],
                    &pxx[r.clone()],
                    &pzz[r.clone()],
                    &v[r],
                    dt2,
                );
            });
        Ok(())
    }
}

impl KernelBackend<SimDeviceSpace> for SimDevice {
    fn add_source<T: Scalar>(
        p: &mut ScalarField<SimDeviceSpace, T>,
        amplitude: T,
        index: usize,
    ) -> Result<()> {
        SimDeviceSpace::launch(&[], p.buffer_mut(), |_, out| {
            out[index] = out[index] + amplitude;
        })
    }

    fn fd_pxx<T: Scalar>(
        out: &mut ScalarField<SimDeviceSpace, T>,
        p: &ScalarField<SimDeviceSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let nx = p.nx();
        SimDeviceSpace::launch(&[p.buffer()], out.buffer_mut(), |ins, o| {
            cpu::pxx_rows(o, &ins[0], nx, taps)
        })
    }

    fn fd_pzz<T: Scalar>(
        out: &mut ScalarField<SimDeviceSpace, T>,
        p: &ScalarField<SimDeviceSpace, T>,
        taps: &Taps<T>,
    ) -> Result<()> {
        let (nz, nx) = p.extents();
        SimDeviceSpace::launch(&[p.buffer()], out.buffer_mut(), |ins, o| {
            cpu::pzz_rows(o, &ins[0], nz, nx, 0, taps)
        })
    }

    fn fd_time<T: Scalar>(
        out: &mut ScalarField<SimDeviceSpace, T>,
        i: TimeInputs<'_, SimDeviceSpace, T>,
        dt2: T,
    ) -> Result<()> {
        let inputs = [
            i.p.buffer(),
            i.pold.buffer(),
            i.pxx.buffer(),
            i.pzz.buffer(),
            i.v.buffer(),
        ];
        SimDeviceSpace::launch(&inputs, out.buffer_mut(), |ins, o| {
            cpu::time_rows(o, &ins[0], &ins[1], &ins[2], &ins[3], &ins[4], dt2)
        })
    }
}
