//! Host-only reference implementations and data generators shared by the
//! integration tests. Nothing here calls the library kernels.

#![allow(dead_code)]

use portwave::Scalar;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_field<T: Scalar>(rng: &mut StdRng, len: usize) -> Vec<T> {
    (0..len)
        .map(|_| T::from_f64(rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn bits<T: Scalar>(v: &[T]) -> Vec<u64> {
    v.iter().map(|x| x.bits()).collect()
}

/// Pair weights `c_k/dh²` for k = 1..=h, rounded the way a kernel in
/// precision `T` sees them.
pub fn weights<T: Scalar>(coefficients: &[f64], dh: T) -> Vec<T> {
    let h = coefficients.len() / 2;
    let inv = T::one() / (dh * dh);
    (1..=h)
        .map(|k| T::from_f64(coefficients[h - k]) * inv)
        .collect()
}

/// Second difference at one point in the documented evaluation order.
fn point<T: Scalar>(w: &[T], at: impl Fn(isize) -> T) -> T {
    let c = at(0);
    let twice = c + c;
    let mut acc = T::zero();
    for (k, &wk) in w.iter().enumerate() {
        let k = k as isize + 1;
        let term = wk * ((at(-k) + at(k)) - twice);
        acc = if k == 1 { term } else { acc + term };
    }
    acc
}

pub fn ref_pxx<T: Scalar>(p: &[T], nz: usize, nx: usize, c: &[f64], dh: T) -> Vec<T> {
    let w = weights(c, dh);
    let h = w.len();
    let mut out = vec![T::zero(); nz * nx];
    for i in 0..nz {
        for j in h..nx - h {
            out[i * nx + j] = point(&w, |k| p[i * nx + (j as isize + k) as usize]);
        }
    }
    out
}

pub fn ref_pzz<T: Scalar>(p: &[T], nz: usize, nx: usize, c: &[f64], dh: T) -> Vec<T> {
    let w = weights(c, dh);
    let h = w.len();
    let mut out = vec![T::zero(); nz * nx];
    for i in h..nz - h {
        for j in 0..nx {
            out[i * nx + j] = point(&w, |k| p[(i as isize + k) as usize * nx + j]);
        }
    }
    out
}

/// Textbook left-to-right sum `Σ c[k]·p[j-h+k] / dh²`, in f64.
pub fn textbook_pxx(p: &[f64], nz: usize, nx: usize, c: &[f64], dh: f64) -> Vec<f64> {
    let h = c.len() / 2;
    let mut out = vec![0.0; nz * nx];
    for i in 0..nz {
        for j in h..nx - h {
            let s: f64 = c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * p[i * nx + j - h + k])
                .sum();
            out[i * nx + j] = s / (dh * dh);
        }
    }
    out
}

pub fn ref_time<T: Scalar>(p: &[T], pold: &[T], pxx: &[T], pzz: &[T], v: &[T], dt: T) -> Vec<T> {
    let two = T::from_f64(2.0);
    let dt2 = dt * dt;
    (0..p.len())
        .map(|k| two * p[k] - pold[k] + dt2 * (v[k] * v[k]) * (pxx[k] + pzz[k]))
        .collect()
}

pub fn transpose<T: Copy>(a: &[T], nz: usize, nx: usize) -> Vec<T> {
    let mut t = Vec::with_capacity(a.len());
    for j in 0..nx {
        for i in 0..nz {
            t.push(a[i * nx + j]);
        }
    }
    t
}

/// Leapfrog stepper on host vectors: source, z and x derivatives, time
/// update, rotation of the three time levels.
pub struct RefStepper<T> {
    pub nz: usize,
    pub nx: usize,
    pub dh: T,
    pub dt: T,
    pub coefficients: Vec<f64>,
    pub src: (usize, usize),
    pub v: Vec<T>,
    pub p: Vec<T>,
    pub pold: Vec<T>,
}

impl<T: Scalar> RefStepper<T> {
    pub fn step(&mut self, amplitude: T) {
        let (nz, nx) = (self.nz, self.nx);
        let k = self.src.0 * nx + self.src.1;
        self.p[k] = self.p[k] + amplitude;
        let pzz = ref_pzz(&self.p, nz, nx, &self.coefficients, self.dh);
        let pxx = ref_pxx(&self.p, nz, nx, &self.coefficients, self.dh);
        let pnew = ref_time(&self.p, &self.pold, &pxx, &pzz, &self.v, self.dt);
        self.pold = std::mem::replace(&mut self.p, pnew);
    }
}

/// Runs `f` with allocation tracing on and asserts that every buffer it
/// allocated was released.
pub fn balanced<R>(f: impl FnOnce() -> R) -> R {
    let scope = portwave::spaces::trace::TraceScope::begin();
    let out = f();
    let delta = scope.delta();
    assert_eq!(delta.live_allocations(), 0, "leaked buffers: {delta:?}");
    assert_eq!(delta.live_bytes, 0, "leaked bytes: {delta:?}");
    out
}
