//! Scalar loops shared by every backend. Each function fills a block of
//! consecutive output rows, so the threaded backend can hand disjoint blocks
//! to its workers and the device backend can run the whole grid at once.

use super::Taps;
use crate::Scalar;

/// x-derivative for the rows in `out`; `p` holds the same rows.
pub(crate) fn pxx_rows<T: Scalar>(out: &mut [T], p: &[T], nx: usize, taps: &Taps<T>) {
    let h = taps.half_width();
    for (out_row, p_row) in out.chunks_exact_mut(nx).zip(p.chunks_exact(nx)) {
        out_row[..h].fill(T::zero());
        out_row[nx - h..].fill(T::zero());
        for j in h..nx - h {
            out_row[j] = taps.apply(|k| p_row[(j as isize + k) as usize]);
        }
    }
}

/// z-derivative for rows `row0..row0 + out.len() / nx`; `p` is the whole grid.
pub(crate) fn pzz_rows<T: Scalar>(
    out: &mut [T],
    p: &[T],
    nz: usize,
    nx: usize,
    row0: usize,
    taps: &Taps<T>,
) {
    let h = taps.half_width();
    for (local, out_row) in out.chunks_exact_mut(nx).enumerate() {
        let i = row0 + local;
        if i < h || i >= nz - h {
            out_row.fill(T::zero());
            continue;
        }
        for (j, o) in out_row.iter_mut().enumerate() {
            *o = taps.apply(|k| p[(i as isize + k) as usize * nx + j]);
        }
    }
}

/// Time update over matching slices.
pub(crate) fn time_rows<T: Scalar>(
    out: &mut [T],
    p: &[T],
    pold: &[T],
    pxx: &[T],
    pzz: &[T],
    v: &[T],
    dt2: T,
) {
    let two = T::from_f64(2.0);
    for (idx, o) in out.iter_mut().enumerate() {
        let vel = v[idx];
        *o = two * p[idx] - pold[idx] + dt2 * (vel * vel) * (pxx[idx] + pzz[idx]);
    }
}
