//! Memory Spaces (where data lives) and Execution Spaces (what processes it).
//!
//! A memory space is a zero-sized type exposing five operations: `allocate`,
//! `release`, `copy`, `copy_from_host` and `copy_to_host`. Applications start
//! by filling host arrays and moving them into containers with
//! `copy_from_host`, and end by pulling results back with `copy_to_host`;
//! nothing else crosses the host/device boundary.

mod exec;
mod host;
mod simdevice;
pub mod trace;

pub use exec::{
    check_compatibility, Accesses, ExecutionSpace, Serial, SimDevice, SpaceOf, Threaded,
};
pub use host::{HostBuffer, HostSpace};
pub use simdevice::{DeviceBuffer, SimDeviceSpace, DEVICE_MASK};

pub use crate::kernels::{Backend, KernelBackend};

use crate::{Error, Result, Scalar};

/// A place where buffers of [`Scalar`] elements can live.
///
/// Buffers are owning handles: dropping one releases its storage. Copy
/// operations require non-overlapping source and destination; overlapping
/// ranges within one buffer are a precondition violation with unspecified
/// results.
pub trait MemorySpace: Copy + Default + Send + Sync + std::fmt::Debug + 'static {
    type Buffer<T: Scalar>: Send + Sync + std::fmt::Debug;

    /// Short name used in diagnostics and reports.
    const NAME: &'static str;

    /// Reserves `count` elements with unspecified contents.
    fn allocate<T: Scalar>(count: usize) -> Result<Self::Buffer<T>>;

    /// Reserves `count` elements set to `+0.0`, without any host transfer.
    fn allocate_zeroed<T: Scalar>(count: usize) -> Result<Self::Buffer<T>>;

    /// Releases a buffer. Equivalent to dropping it.
    fn release<T: Scalar>(buf: Self::Buffer<T>) {
        drop(buf);
    }

    /// Copies the first `count` elements of `src` into `dst`, both in this space.
    fn copy<T: Scalar>(
        dst: &mut Self::Buffer<T>,
        src: &Self::Buffer<T>,
        count: usize,
    ) -> Result<()>;

    /// Copies `count` host elements into `dst`.
    fn copy_from_host<T: Scalar>(dst: &mut Self::Buffer<T>, src: &[T], count: usize) -> Result<()>;

    /// Copies `count` elements of `src` back into host memory.
    fn copy_to_host<T: Scalar>(dst: &mut [T], src: &Self::Buffer<T>, count: usize) -> Result<()>;

    /// Capacity of a buffer in elements.
    fn len<T: Scalar>(buf: &Self::Buffer<T>) -> usize;

    /// Identity of the underlying storage; stable for the buffer's lifetime.
    fn handle_id<T: Scalar>(buf: &Self::Buffer<T>) -> u64;
}

pub(crate) fn check_copy_bounds(
    space: &'static str,
    dst_len: usize,
    src_len: usize,
    count: usize,
) -> Result<()> {
    if count > dst_len || count > src_len {
        return Err(Error::Bounds(format!(
            "{space} copy of {count} elements exceeds capacity (dst {dst_len}, src {src_len})"
        )));
    }
    Ok(())
}
