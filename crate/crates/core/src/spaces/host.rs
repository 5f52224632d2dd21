use std::fmt;

use super::trace::{self, CopyKind};
use super::{check_copy_bounds, MemorySpace};
use crate::{Error, Result, Scalar};

/// The program's main address space.
///
/// `copy`, `copy_from_host` and `copy_to_host` share one implementation: a
/// plain host-to-host element copy. Host buffers carry no registry, so a
/// handle from a different space cannot be detected here; the type system
/// rules that case out instead.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HostSpace;

/// Buffer resident in [`HostSpace`]; directly readable and writable.
pub struct HostBuffer<T: Scalar> {
    data: Vec<T>,
    traced: bool,
}

impl<T: Scalar> HostBuffer<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

impl<T: Scalar> fmt::Debug for HostBuffer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HostBuffer")
            .field("ptr", &self.data.as_ptr())
            .field("len", &self.data.len())
            .finish()
    }
}

impl<T: Scalar> Drop for HostBuffer<T> {
    fn drop(&mut self) {
        trace::on_release(self.data.len() * T::BYTES, self.traced);
    }
}

fn host_copy<T: Scalar>(dst: &mut [T], src: &[T], count: usize) -> Result<()> {
    check_copy_bounds(HostSpace::NAME, dst.len(), src.len(), count)?;
    dst[..count].copy_from_slice(&src[..count]);
    Ok(())
}

impl MemorySpace for HostSpace {
    type Buffer<T: Scalar> = HostBuffer<T>;
    const NAME: &'static str = "host";

    fn allocate<T: Scalar>(count: usize) -> Result<HostBuffer<T>> {
        let bytes = count.checked_mul(T::BYTES).ok_or(Error::OutOfMemory {
            space: Self::NAME,
            bytes: usize::MAX,
        })?;
        let mut data = Vec::new();
        data.try_reserve_exact(count)
            .map_err(|_| Error::OutOfMemory {
                space: Self::NAME,
                bytes,
            })?;
        // Contents are unspecified by contract; zeroing keeps this safe Rust.
        data.resize(count, T::zero());
        let traced = trace::on_allocate(bytes);
        Ok(HostBuffer { data, traced })
    }

    fn allocate_zeroed<T: Scalar>(count: usize) -> Result<HostBuffer<T>> {
        Self::allocate(count)
    }

    fn copy<T: Scalar>(dst: &mut HostBuffer<T>, src: &HostBuffer<T>, count: usize) -> Result<()> {
        host_copy(&mut dst.data, &src.data, count)?;
        trace::on_copy(CopyKind::Within);
        Ok(())
    }

    fn copy_from_host<T: Scalar>(dst: &mut HostBuffer<T>, src: &[T], count: usize) -> Result<()> {
        host_copy(&mut dst.data, src, count)?;
        trace::on_copy(CopyKind::FromHost);
        Ok(())
    }

    fn copy_to_host<T: Scalar>(dst: &mut [T], src: &HostBuffer<T>, count: usize) -> Result<()> {
        host_copy(dst, &src.data, count)?;
        trace::on_copy(CopyKind::ToHost);
        Ok(())
    }

    fn len<T: Scalar>(buf: &HostBuffer<T>) -> usize {
        buf.data.len()
    }

    fn handle_id<T: Scalar>(buf: &HostBuffer<T>) -> u64 {
        buf.data.as_ptr() as usize as u64
    }
}
