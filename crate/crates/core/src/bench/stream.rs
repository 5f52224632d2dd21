//! BabelStream-style bandwidth probes over `f64` arrays.
//!
//! One iteration runs, in order: copy `c = a`, mul `b = s·c`, add
//! `c = a + b`, triad `a = b + s·c`, dot `Σ a·b`. The first iteration is a
//! warm-up and is not timed. Afterwards the arrays are checked against a
//! scalar replay of the same sequence.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::spaces::{
    Accesses, DeviceBuffer, ExecutionSpace, HostBuffer, HostSpace, MemorySpace, Serial, SimDevice,
    SimDeviceSpace, SpaceOf, Threaded,
};
use crate::{Error, Result, Scalar};

/// Assumed last-level cache size when none is configured.
pub const DEFAULT_CACHE_BYTES: usize = 64 << 20;

const VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamOp {
    Copy,
    Mul,
    Add,
    Triad,
    Dot,
}

impl StreamOp {
    pub const ALL: [StreamOp; 5] = [
        StreamOp::Copy,
        StreamOp::Mul,
        StreamOp::Add,
        StreamOp::Triad,
        StreamOp::Dot,
    ];

    /// Arrays read or written per element.
    pub fn arrays_touched(self) -> usize {
        match self {
            StreamOp::Copy | StreamOp::Mul | StreamOp::Dot => 2,
            StreamOp::Add | StreamOp::Triad => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamOp::Copy => "copy",
            StreamOp::Mul => "mul",
            StreamOp::Add => "add",
            StreamOp::Triad => "triad",
            StreamOp::Dot => "dot",
        }
    }
}

impl fmt::Display for StreamOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamConfig {
    /// Elements per array.
    pub len: usize,
    /// Timed repetitions (the warm-up comes on top).
    pub reps: usize,
    /// Each array must be at least four times this size.
    pub cache_bytes: usize,
    pub init: [f64; 3],
    pub scalar: f64,
}

impl StreamConfig {
    pub fn new(len: usize, reps: usize) -> Self {
        StreamConfig {
            len,
            reps,
            cache_bytes: DEFAULT_CACHE_BYTES,
            init: [0.1, 0.2, 0.0],
            scalar: 0.4,
        }
    }

    pub fn array_bytes(&self) -> usize {
        self.len * f64::BYTES
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Argument(
                "stream repetitions must be at least 1".into(),
            ));
        }
        if self.array_bytes() < 4 * self.cache_bytes {
            return Err(Error::Argument(format!(
                "stream arrays of {} bytes do not exceed 4x the {}-byte cache",
                self.array_bytes(),
                self.cache_bytes
            )));
        }
        Ok(())
    }
}

/// Timing summary of one stream op.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamResult {
    pub op: StreamOp,
    /// Size of one array.
    pub array_bytes: usize,
    /// Bytes moved by one execution of the op.
    pub bytes_moved: usize,
    /// GB/s at the minimum time.
    pub best_rate_gbs: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub avg_s: f64,
}

impl StreamResult {
    pub fn avg_rate_gbs(&self) -> f64 {
        self.bytes_moved as f64 / self.avg_s / 1e9
    }
}

/// Triad best rate in GB/s, if present.
pub fn triad_bandwidth(results: &[StreamResult]) -> Option<f64> {
    results
        .iter()
        .find(|r| r.op == StreamOp::Triad)
        .map(|r| r.best_rate_gbs)
}

/// Stream kernels of one backend over buffers in `M`.
pub trait StreamBackend<M: MemorySpace>: Accesses<M> {
    /// `c = a`
    fn stream_copy<T: Scalar>(c: &mut M::Buffer<T>, a: &M::Buffer<T>) -> Result<()>;
    /// `b = s·c`
    fn stream_mul<T: Scalar>(b: &mut M::Buffer<T>, c: &M::Buffer<T>, s: T) -> Result<()>;
    /// `c = a + b`
    fn stream_add<T: Scalar>(
        c: &mut M::Buffer<T>,
        a: &M::Buffer<T>,
        b: &M::Buffer<T>,
    ) -> Result<()>;
    /// `a = b + s·c`
    fn stream_triad<T: Scalar>(
        a: &mut M::Buffer<T>,
        b: &M::Buffer<T>,
        c: &M::Buffer<T>,
        s: T,
    ) -> Result<()>;
    /// `Σ a·b`, accumulated in `f64`.
    fn stream_dot<T: Scalar>(a: &M::Buffer<T>, b: &M::Buffer<T>) -> Result<f64>;
}

fn dot_serial<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc + x.as_f64() * y.as_f64())
}

impl StreamBackend<HostSpace> for Serial {
    fn stream_copy<T: Scalar>(c: &mut HostBuffer<T>, a: &HostBuffer<T>) -> Result<()> {
        c.as_mut_slice().copy_from_slice(a.as_slice());
        Ok(())
    }

    fn stream_mul<T: Scalar>(b: &mut HostBuffer<T>, c: &HostBuffer<T>, s: T) -> Result<()> {
        for (o, x) in b.as_mut_slice().iter_mut().zip(c.as_slice()) {
            *o = s * *x;
        }
        Ok(())
    }

    fn stream_add<T: Scalar>(
        c: &mut HostBuffer<T>,
        a: &HostBuffer<T>,
        b: &HostBuffer<T>,
    ) -> Result<()> {
        for ((o, x), y) in c
            .as_mut_slice()
            .iter_mut()
            .zip(a.as_slice())
            .zip(b.as_slice())
        {
            *o = *x + *y;
        }
        Ok(())
    }

    fn stream_triad<T: Scalar>(
        a: &mut HostBuffer<T>,
        b: &HostBuffer<T>,
        c: &HostBuffer<T>,
        s: T,
    ) -> Result<()> {
        for ((o, x), y) in a
            .as_mut_slice()
            .iter_mut()
            .zip(b.as_slice())
            .zip(c.as_slice())
        {
            *o = *x + s * *y;
        }
        Ok(())
    }

    fn stream_dot<T: Scalar>(a: &HostBuffer<T>, b: &HostBuffer<T>) -> Result<f64> {
        Ok(dot_serial(a.as_slice(), b.as_slice()))
    }
}

fn block_len(len: usize) -> usize {
    len.div_ceil(rayon::current_num_threads()).max(1)
}

impl StreamBackend<HostSpace> for Threaded {
    fn stream_copy<T: Scalar>(c: &mut HostBuffer<T>, a: &HostBuffer<T>) -> Result<()> {
        let n = block_len(a.len());
        c.as_mut_slice()
            .par_chunks_mut(n)
            .zip(a.as_slice().par_chunks(n))
            .for_each(|(o, x)| o.copy_from_slice(x));
        Ok(())
    }

    fn stream_mul<T: Scalar>(b: &mut HostBuffer<T>, c: &HostBuffer<T>, s: T) -> Result<()> {
        let n = block_len(c.len());
        b.as_mut_slice()
            .par_chunks_mut(n)
            .zip(c.as_slice().par_chunks(n))
            .for_each(|(o, x)| {
                for (o, x) in o.iter_mut().zip(x) {
                    *o = s * *x;
                }
            });
        Ok(())
    }

    fn stream_add<T: Scalar>(
        c: &mut HostBuffer<T>,
        a: &HostBuffer<T>,
        b: &HostBuffer<T>,
    ) -> Result<()> {
        let n = block_len(a.len());
        c.as_mut_slice()
            .par_chunks_mut(n)
            .zip(a.as_slice().par_chunks(n))
            .zip(b.as_slice().par_chunks(n))
            .for_each(|((o, x), y)| {
                for ((o, x), y) in o.iter_mut().zip(x).zip(y) {
                    *o = *x + *y;
                }
            });
        Ok(())
    }

    fn stream_triad<T: Scalar>(
        a: &mut HostBuffer<T>,
        b: &HostBuffer<T>,
        c: &HostBuffer<T>,
        s: T,
    ) -> Result<()> {
        let n = block_len(b.len());
        a.as_mut_slice()
            .par_chunks_mut(n)
            .zip(b.as_slice().par_chunks(n))
            .zip(c.as_slice().par_chunks(n))
            .for_each(|((o, x), y)| {
                for ((o, x), y) in o.iter_mut().zip(x).zip(y) {
                    *o = *x + s * *y;
                }
            });
        Ok(())
    }

    fn stream_dot<T: Scalar>(a: &HostBuffer<T>, b: &HostBuffer<T>) -> Result<f64> {
        let n = block_len(a.len());
        Ok(a.as_slice()
            .par_chunks(n)
            .zip(b.as_slice().par_chunks(n))
            .map(|(x, y)| dot_serial(x, y))
            .sum())
    }
}

impl StreamBackend<SimDeviceSpace> for SimDevice {
    fn stream_copy<T: Scalar>(c: &mut DeviceBuffer<T>, a: &DeviceBuffer<T>) -> Result<()> {
        SimDeviceSpace::launch(&[a], c, |ins, o| o.copy_from_slice(&ins[0]))
    }

    fn stream_mul<T: Scalar>(b: &mut DeviceBuffer<T>, c: &DeviceBuffer<T>, s: T) -> Result<()> {
        SimDeviceSpace::launch(&[c], b, |ins, o| {
            for (o, x) in o.iter_mut().zip(&ins[0]) {
                *o = s * *x;
            }
        })
    }

    fn stream_add<T: Scalar>(
        c: &mut DeviceBuffer<T>,
        a: &DeviceBuffer<T>,
        b: &DeviceBuffer<T>,
    ) -> Result<()> {
        SimDeviceSpace::launch(&[a, b], c, |ins, o| {
            for ((o, x), y) in o.iter_mut().zip(&ins[0]).zip(&ins[1]) {
                *o = *x + *y;
            }
        })
    }

    fn stream_triad<T: Scalar>(
        a: &mut DeviceBuffer<T>,
        b: &DeviceBuffer<T>,
        c: &DeviceBuffer<T>,
        s: T,
    ) -> Result<()> {
        SimDeviceSpace::launch(&[b, c], a, |ins, o| {
            for ((o, x), y) in o.iter_mut().zip(&ins[0]).zip(&ins[1]) {
                *o = *x + s * *y;
            }
        })
    }

    fn stream_dot<T: Scalar>(a: &DeviceBuffer<T>, b: &DeviceBuffer<T>) -> Result<f64> {
        SimDeviceSpace::launch_reduce(&[a, b], |ins| dot_serial(&ins[0], &ins[1]))
    }
}

#[derive(Default)]
struct Times(Vec<f64>);

impl Times {
    fn record<R>(&mut self, timed: bool, f: impl FnOnce() -> Result<R>) -> Result<R> {
        let start = Instant::now();
        let out = f()?;
        if timed {
            self.0.push(start.elapsed().as_secs_f64());
        }
        Ok(out)
    }

    fn summarize(&self, op: StreamOp, array_bytes: usize) -> StreamResult {
        let min_s = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        let max_s = self.0.iter().copied().fold(0.0, f64::max);
        let avg_s = self.0.iter().sum::<f64>() / self.0.len() as f64;
        let bytes_moved = op.arrays_touched() * array_bytes;
        StreamResult {
            op,
            array_bytes,
            bytes_moved,
            best_rate_gbs: bytes_moved as f64 / min_s / 1e9,
            min_s,
            max_s,
            avg_s,
        }
    }
}

fn relative_error(value: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        value.abs()
    } else {
        ((value - expected) / expected).abs()
    }
}

/// Runs the five stream ops on backend `E` and verifies the final arrays.
pub fn run_stream<E>(cfg: &StreamConfig) -> Result<Vec<StreamResult>>
where
    E: ExecutionSpace + StreamBackend<SpaceOf<E>>,
{
    cfg.validate()?;
    type Buf<E> = <SpaceOf<E> as MemorySpace>::Buffer<f64>;
    let alloc = |init: f64| -> Result<Buf<E>> {
        let mut buf = SpaceOf::<E>::allocate::<f64>(cfg.len)?;
        SpaceOf::<E>::copy_from_host(&mut buf, &vec![init; cfg.len], cfg.len)?;
        Ok(buf)
    };
    let [ia, ib, ic] = cfg.init;
    let (mut a, mut b, mut c) = (alloc(ia)?, alloc(ib)?, alloc(ic)?);
    let s = cfg.scalar;

    let mut times: [Times; 5] = Default::default();
    let mut dot = 0.0;
    for iter in 0..=cfg.reps {
        let timed = iter > 0;
        times[0].record(timed, || E::stream_copy(&mut c, &a))?;
        times[1].record(timed, || E::stream_mul(&mut b, &c, s))?;
        times[2].record(timed, || E::stream_add(&mut c, &a, &b))?;
        times[3].record(timed, || E::stream_triad(&mut a, &b, &c, s))?;
        dot = times[4].record(timed, || E::stream_dot(&a, &b))?;
    }

    let (mut ga, mut gb, mut gc) = (ia, ib, ic);
    for _ in 0..=cfg.reps {
        gc = ga;
        gb = s * gc;
        gc = ga + gb;
        ga = gb + s * gc;
    }
    let gold_dot = ga * gb * cfg.len as f64;

    let mut host = vec![0.0f64; cfg.len];
    for (name, buf, gold) in [("a", &a, ga), ("b", &b, gb), ("c", &c, gc)] {
        SpaceOf::<E>::copy_to_host(&mut host, buf, cfg.len)?;
        let worst = host
            .iter()
            .map(|&v| relative_error(v, gold))
            .fold(0.0, f64::max);
        if !(worst <= VERIFY_TOLERANCE) {
            return Err(Error::Verification(format!(
                "array {name}: relative error {worst:e} against expected {gold}"
            )));
        }
    }
    let dot_err = relative_error(dot, gold_dot);
    if !(dot_err <= VERIFY_TOLERANCE) {
        return Err(Error::Verification(format!(
            "dot: relative error {dot_err:e}, got {dot}, expected {gold_dot}"
        )));
    }

    let array_bytes = cfg.array_bytes();
    Ok(StreamOp::ALL
        .iter()
        .zip(&times)
        .map(|(&op, t)| t.summarize(op, array_bytes))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(len: usize, reps: usize) -> StreamConfig {
        StreamConfig {
            cache_bytes: 1024,
            ..StreamConfig::new(len, reps)
        }
    }

    fn triad_closed_form<E: ExecutionSpace + StreamBackend<SpaceOf<E>>>() {
        let n = 1000;
        let mk = |v: f64| {
            let mut buf = SpaceOf::<E>::allocate::<f64>(n).unwrap();
            SpaceOf::<E>::copy_from_host(&mut buf, &vec![v; n], n).unwrap();
            buf
        };
        let (mut a, b, c) = (mk(0.0), mk(1.0), mk(2.0));
        E::stream_triad(&mut a, &b, &c, 3.0).unwrap();
        let mut out = vec![0.0; n];
        SpaceOf::<E>::copy_to_host(&mut out, &a, n).unwrap();
        assert!(out.iter().all(|&v| v == 7.0));
    }

    #[test]
    fn triad_gives_seven() {
        triad_closed_form::<Serial>();
        triad_closed_form::<Threaded>();
        triad_closed_form::<SimDevice>();
    }

    #[test]
    fn copy_makes_a_equal_c() {
        let n = 64;
        let mut a = HostSpace::allocate::<f64>(n).unwrap();
        a.as_mut_slice()
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = i as f64);
        let mut c = HostSpace::allocate::<f64>(n).unwrap();
        Threaded::stream_copy(&mut c, &a).unwrap();
        assert_eq!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn all_backends_verify() {
        for results in [
            run_stream::<Serial>(&small(4096, 3)).unwrap(),
            run_stream::<Threaded>(&small(4096, 3)).unwrap(),
            run_stream::<SimDevice>(&small(4096, 3)).unwrap(),
        ] {
            assert_eq!(results.len(), 5);
            for r in &results {
                assert!(r.best_rate_gbs > 0.0);
                assert!(r.best_rate_gbs >= r.avg_rate_gbs());
                assert!(r.min_s <= r.avg_s && r.avg_s <= r.max_s);
                assert_eq!(r.bytes_moved, r.op.arrays_touched() * 4096 * 8);
            }
        }
    }

    #[test]
    fn rejects_small_arrays_and_zero_reps() {
        let cfg = StreamConfig::new(1024, 2);
        assert!(matches!(
            run_stream::<Serial>(&cfg),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            run_stream::<Serial>(&small(4096, 0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn bytes_accounting() {
        assert_eq!(StreamOp::Copy.arrays_touched(), 2);
        assert_eq!(StreamOp::Mul.arrays_touched(), 2);
        assert_eq!(StreamOp::Add.arrays_touched(), 3);
        assert_eq!(StreamOp::Triad.arrays_touched(), 3);
        assert_eq!(StreamOp::Dot.arrays_touched(), 2);
    }
}
