//! Generic containers whose storage is bound to a Memory Space.

use std::fmt;
use std::marker::PhantomData;

use crate::spaces::{HostSpace, MemorySpace};
use crate::{Error, Result, Scalar};

/// A 2D grid of scalars, `nz` rows by `nx` columns, stored row-major with z
/// as the slow axis in memory space `M`.
///
/// Extents are host metadata and can be read without touching `M`. Fields
/// are move-only; there is exactly one owner of the underlying buffer.
pub struct ScalarField<M: MemorySpace, T: Scalar> {
    nz: usize,
    nx: usize,
    data: M::Buffer<T>,
    _space: PhantomData<M>,
}

impl<M: MemorySpace, T: Scalar> ScalarField<M, T> {
    /// Allocates an `nz × nx` field with unspecified contents.
    pub fn new(nz: usize, nx: usize) -> Result<Self> {
        let len = checked_extent(nz, nx)?;
        Ok(Self::from_buffer(nz, nx, M::allocate(len)?))
    }

    /// Allocates an `nz × nx` field set to zero.
    pub fn zeros(nz: usize, nx: usize) -> Result<Self> {
        let len = checked_extent(nz, nx)?;
        Ok(Self::from_buffer(nz, nx, M::allocate_zeroed(len)?))
    }

    /// Allocates a field and fills it from host data in one go.
    pub fn from_host(nz: usize, nx: usize, src: &[T]) -> Result<Self> {
        let mut field = Self::new(nz, nx)?;
        field.fill_from_host(src)?;
        Ok(field)
    }

    fn from_buffer(nz: usize, nx: usize, data: M::Buffer<T>) -> Self {
        ScalarField {
            nz,
            nx,
            data,
            _space: PhantomData,
        }
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn len(&self) -> usize {
        self.nz * self.nx
    }

    /// Always false; extents are at least 1×1.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.nz, self.nx)
    }

    pub fn buffer(&self) -> &M::Buffer<T> {
        &self.data
    }

    pub fn buffer_mut(&mut self) -> &mut M::Buffer<T> {
        &mut self.data
    }

    /// Storage identity, for handle-level comparisons.
    pub fn handle_id(&self) -> u64 {
        M::handle_id(&self.data)
    }

    /// Copies `src` (exactly `nz·nx` elements, row-major) into the field.
    pub fn fill_from_host(&mut self, src: &[T]) -> Result<()> {
        if src.len() != self.len() {
            return Err(Error::Bounds(format!(
                "host array of {} elements does not match {}x{} field",
                src.len(),
                self.nz,
                self.nx
            )));
        }
        M::copy_from_host(&mut self.data, src, src.len())
    }

    /// Copies the field contents into `dst`, which must hold `nz·nx` elements.
    pub fn copy_to_host_slice(&self, dst: &mut [T]) -> Result<()> {
        if dst.len() != self.len() {
            return Err(Error::Bounds(format!(
                "host array of {} elements does not match {}x{} field",
                dst.len(),
                self.nz,
                self.nx
            )));
        }
        M::copy_to_host(dst, &self.data, dst.len())
    }

    /// Returns a fresh host array with the field contents.
    pub fn read_to_host(&self) -> Result<Vec<T>> {
        let mut out = Vec::new();
        out.try_reserve_exact(self.len())
            .map_err(|_| Error::OutOfMemory {
                space: HostSpace::NAME,
                bytes: self.len() * T::BYTES,
            })?;
        out.resize(self.len(), T::zero());
        self.copy_to_host_slice(&mut out)?;
        Ok(out)
    }

    /// Exchanges the buffers of two equally sized fields. No element copies.
    pub fn swap(&mut self, other: &mut Self) -> Result<()> {
        if self.extents() != other.extents() {
            return Err(Error::Argument(format!(
                "cannot swap {}x{} field with {}x{} field",
                self.nz, self.nx, other.nz, other.nx
            )));
        }
        std::mem::swap(&mut self.data, &mut other.data);
        Ok(())
    }

    pub(crate) fn same_extents(&self, other: &Self) -> bool {
        self.extents() == other.extents()
    }
}

impl<T: Scalar> ScalarField<HostSpace, T> {
    /// Direct view of a host-resident field.
    pub fn as_slice(&self) -> &[T] {
        self.data.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        self.data.as_mut_slice()
    }
}

impl<M: MemorySpace, T: Scalar> fmt::Debug for ScalarField<M, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("space", &M::NAME)
            .field("precision", &T::NAME)
            .field("nz", &self.nz)
            .field("nx", &self.nx)
            .field("data", &self.data)
            .finish()
    }
}

/// Swaps the buffers of `a` and `b`; see [`ScalarField::swap`].
pub fn field_swap<M: MemorySpace, T: Scalar>(
    a: &mut ScalarField<M, T>,
    b: &mut ScalarField<M, T>,
) -> Result<()> {
    a.swap(b)
}

fn checked_extent(nz: usize, nx: usize) -> Result<usize> {
    if nz == 0 || nx == 0 {
        return Err(Error::Argument(format!(
            "field extents must be at least 1x1, got {nz}x{nx}"
        )));
    }
    nz.checked_mul(nx)
        .ok_or_else(|| Error::Argument(format!("field extents {nz}x{nx} overflow")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::trace::TraceScope;
    use crate::spaces::SimDeviceSpace;

    fn round_trip_index_order<M: MemorySpace>() {
        let src: Vec<f32> = (0..12).map(|v| v as f32).collect();
        let field = ScalarField::<M, f32>::from_host(3, 4, &src).unwrap();
        let back = field.read_to_host().unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(back[i * 4 + j], (i * 4 + j) as f32);
            }
        }
    }

    #[test]
    fn minimal_extents() {
        let f = ScalarField::<HostSpace, f64>::new(1, 1).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn zero_extent_rejected() {
        let err = ScalarField::<HostSpace, f32>::new(0, 5).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
        assert!(ScalarField::<SimDeviceSpace, f32>::new(5, 0).is_err());
    }

    #[test]
    fn fill_read_row_major() {
        round_trip_index_order::<HostSpace>();
        round_trip_index_order::<SimDeviceSpace>();
    }

    #[test]
    fn fill_zeros() {
        let mut f = ScalarField::<SimDeviceSpace, f64>::new(4, 4).unwrap();
        f.fill_from_host(&[0.0; 16]).unwrap();
        assert!(f.read_to_host().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fill_length_mismatch() {
        let mut f = ScalarField::<HostSpace, f32>::new(3, 4).unwrap();
        let err = f.fill_from_host(&[0.0; 11]).unwrap_err();
        assert!(matches!(err, Error::Bounds(_)));
    }

    #[test]
    fn zeros_are_zero_on_device() {
        let f = ScalarField::<SimDeviceSpace, f32>::zeros(3, 5).unwrap();
        let back = f.read_to_host().unwrap();
        assert!(back.iter().all(|v| v.to_bits() == 0));
    }

    #[test]
    fn large_device_field_is_one_registry_entry() {
        let scope = TraceScope::begin();
        let f = ScalarField::<SimDeviceSpace, f32>::new(1000, 2000).unwrap();
        assert_eq!(scope.delta().allocations, 1);
        assert_eq!(
            SimDeviceSpace::registered_bytes(f.handle_id()),
            Some(2_000_000 * 4)
        );
        drop(f);
        assert_eq!(scope.live_allocations(), 0);
    }

    #[test]
    fn swap_exchanges_handles_without_copies() {
        let scope = TraceScope::begin();
        let mut a = ScalarField::<SimDeviceSpace, f32>::from_host(1, 2, &[1.0, 2.0]).unwrap();
        let mut b = ScalarField::<SimDeviceSpace, f32>::from_host(1, 2, &[3.0, 4.0]).unwrap();
        let (ida, idb) = (a.handle_id(), b.handle_id());
        let copies = scope.delta().total_copies();
        field_swap(&mut a, &mut b).unwrap();
        assert_eq!(scope.delta().total_copies(), copies);
        assert_eq!(a.read_to_host().unwrap(), vec![3.0, 4.0]);
        assert_eq!(b.read_to_host().unwrap(), vec![1.0, 2.0]);
        assert_eq!((a.handle_id(), b.handle_id()), (idb, ida));
        field_swap(&mut a, &mut b).unwrap();
        assert_eq!((a.handle_id(), b.handle_id()), (ida, idb));
        drop((a, b));
        assert_eq!(scope.live_allocations(), 0);
    }

    #[test]
    fn swap_extent_mismatch() {
        let mut a = ScalarField::<HostSpace, f32>::new(2, 3).unwrap();
        let mut b = ScalarField::<HostSpace, f32>::new(3, 2).unwrap();
        assert!(matches!(a.swap(&mut b), Err(Error::Argument(_))));
    }
}
