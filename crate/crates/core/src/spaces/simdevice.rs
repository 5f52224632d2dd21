//! A simulated discrete device memory.
//!
//! Buffers live in a process-global arena, addressed by opaque ids and never
//! handed out as host pointers. Every stored byte is XOR-ed with
//! [`DEVICE_MASK`], so any host code that reads device storage without going
//! through [`MemorySpace::copy_to_host`] or a device kernel sees garbage.

use std::collections::HashMap;
use std::fmt;
use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex, RwLock};

use super::trace::{self, CopyKind};
use super::{check_copy_bounds, MemorySpace};
use crate::{Error, Result, Scalar};

/// Byte pattern applied to everything stored in the arena.
pub const DEVICE_MASK: u8 = 0xA5;

type Storage = Arc<RwLock<Vec<u8>>>;

struct Arena {
    next_id: AtomicU64,
    buffers: Mutex<HashMap<u64, Storage>>,
}

static ARENA: LazyLock<Arena> = LazyLock::new(|| Arena {
    next_id: AtomicU64::new(1),
    buffers: Mutex::new(HashMap::new()),
});

impl Arena {
    fn insert(&self, bytes: Vec<u8>) -> u64 {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        self.buffers
            .lock()
            .unwrap()
            .insert(id, Arc::new(RwLock::new(bytes)));
        id
    }

    fn get(&self, id: u64) -> Result<Storage> {
        self.buffers
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or(Error::InvalidHandle {
                space: SimDeviceSpace::NAME,
                id,
            })
    }

    fn remove(&self, id: u64) {
        self.buffers.lock().unwrap().remove(&id);
    }
}

/// Memory space backed by the masked device arena.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimDeviceSpace;

/// Handle to a buffer in [`SimDeviceSpace`]. Holds no host-visible data.
pub struct DeviceBuffer<T: Scalar> {
    id: u64,
    len: usize,
    owned: bool,
    traced: bool,
    _elem: PhantomData<fn() -> T>,
}

impl<T: Scalar> DeviceBuffer<T> {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Fabricates a handle the registry never issued. Test hook for the
    /// invalid-handle paths; dropping it does not touch the arena.
    #[doc(hidden)]
    pub fn forged(id: u64, len: usize) -> Self {
        DeviceBuffer {
            id,
            len,
            owned: false,
            traced: false,
            _elem: PhantomData,
        }
    }

    fn storage(&self) -> Result<Storage> {
        ARENA.get(self.id)
    }
}

impl<T: Scalar> fmt::Debug for DeviceBuffer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeviceBuffer")
            .field("id", &self.id)
            .field("len", &self.len)
            .finish()
    }
}

impl<T: Scalar> Drop for DeviceBuffer<T> {
    fn drop(&mut self) {
        if self.owned {
            ARENA.remove(self.id);
            trace::on_release(self.len * T::BYTES, self.traced);
        }
    }
}

fn encode_into<T: Scalar>(bytes: &mut [u8], values: &[T]) {
    for (chunk, v) in bytes.chunks_exact_mut(T::BYTES).zip(values) {
        v.write_le(chunk);
        for b in chunk {
            *b ^= DEVICE_MASK;
        }
    }
}

fn decode_into<T: Scalar>(values: &mut [T], bytes: &[u8]) {
    let mut scratch = [0u8; 8];
    for (v, chunk) in values.iter_mut().zip(bytes.chunks_exact(T::BYTES)) {
        for (s, b) in scratch.iter_mut().zip(chunk) {
            *s = b ^ DEVICE_MASK;
        }
        *v = T::read_le(&scratch);
    }
}

impl SimDeviceSpace {
    /// The raw stored bytes of `buf`, exactly as a host pointer dereference
    /// into device memory would see them. Test hook.
    pub fn raw_bytes<T: Scalar>(buf: &DeviceBuffer<T>) -> Result<Vec<u8>> {
        let storage = buf.storage()?;
        let bytes = storage.read().unwrap();
        Ok(bytes.clone())
    }

    /// Size in bytes of the registry entry with this id, if it exists.
    pub fn registered_bytes(id: u64) -> Option<usize> {
        ARENA
            .buffers
            .lock()
            .unwrap()
            .get(&id)
            .map(|s| s.read().unwrap().len())
    }

    /// Number of buffers currently registered process-wide.
    pub fn registered_buffers() -> usize {
        ARENA.buffers.lock().unwrap().len()
    }

    /// Runs `kernel` over unmasked views of `inputs` and `output`, then
    /// stores the output back into the arena. Models a kernel launch: the
    /// data never leaves the device through the copy API.
    pub(crate) fn launch<T: Scalar, R>(
        inputs: &[&DeviceBuffer<T>],
        output: &mut DeviceBuffer<T>,
        kernel: impl FnOnce(&[Vec<T>], &mut [T]) -> R,
    ) -> Result<R> {
        let views = Self::unmasked_views(inputs)?;
        let out_storage = output.storage()?;
        let mut out_view = vec![T::zero(); output.len];
        decode_into(&mut out_view, &out_storage.read().unwrap());
        let result = kernel(&views, &mut out_view);
        encode_into(&mut out_storage.write().unwrap(), &out_view);
        Ok(result)
    }

    /// Read-only launch, for reductions.
    pub(crate) fn launch_reduce<T: Scalar, R>(
        inputs: &[&DeviceBuffer<T>],
        kernel: impl FnOnce(&[Vec<T>]) -> R,
    ) -> Result<R> {
        let views = Self::unmasked_views(inputs)?;
        Ok(kernel(&views))
    }

    fn unmasked_views<T: Scalar>(inputs: &[&DeviceBuffer<T>]) -> Result<Vec<Vec<T>>> {
        inputs
            .iter()
            .map(|buf| {
                let storage = buf.storage()?;
                let mut view = vec![T::zero(); buf.len];
                decode_into(&mut view, &storage.read().unwrap());
                Ok(view)
            })
            .collect()
    }

    fn alloc_with<T: Scalar>(count: usize, fill: u8) -> Result<DeviceBuffer<T>> {
        let bytes = count.checked_mul(T::BYTES).ok_or(Error::OutOfMemory {
            space: Self::NAME,
            bytes: usize::MAX,
        })?;
        let mut storage = Vec::new();
        storage
            .try_reserve_exact(bytes)
            .map_err(|_| Error::OutOfMemory {
                space: Self::NAME,
                bytes,
            })?;
        storage.resize(bytes, fill);
        let id = ARENA.insert(storage);
        let traced = trace::on_allocate(bytes);
        Ok(DeviceBuffer {
            id,
            len: count,
            owned: true,
            traced,
            _elem: PhantomData,
        })
    }
}

impl MemorySpace for SimDeviceSpace {
    type Buffer<T: Scalar> = DeviceBuffer<T>;
    const NAME: &'static str = "simdevice";

    fn allocate<T: Scalar>(count: usize) -> Result<DeviceBuffer<T>> {
        Self::alloc_with(count, 0)
    }

    fn allocate_zeroed<T: Scalar>(count: usize) -> Result<DeviceBuffer<T>> {
        // +0.0 is all-zero bits, which the arena stores as the mask itself.
        Self::alloc_with(count, DEVICE_MASK)
    }

    fn copy<T: Scalar>(
        dst: &mut DeviceBuffer<T>,
        src: &DeviceBuffer<T>,
        count: usize,
    ) -> Result<()> {
        let src_storage = src.storage()?;
        let dst_storage = dst.storage()?;
        check_copy_bounds(Self::NAME, dst.len, src.len, count)?;
        if src.id != dst.id {
            let n = count * T::BYTES;
            let from = src_storage.read().unwrap();
            dst_storage.write().unwrap()[..n].copy_from_slice(&from[..n]);
        }
        trace::on_copy(CopyKind::Within);
        Ok(())
    }

    fn copy_from_host<T: Scalar>(dst: &mut DeviceBuffer<T>, src: &[T], count: usize) -> Result<()> {
        let storage = dst.storage()?;
        check_copy_bounds(Self::NAME, dst.len, src.len(), count)?;
        encode_into(
            &mut storage.write().unwrap()[..count * T::BYTES],
            &src[..count],
        );
        trace::on_copy(CopyKind::FromHost);
        Ok(())
    }

    fn copy_to_host<T: Scalar>(dst: &mut [T], src: &DeviceBuffer<T>, count: usize) -> Result<()> {
        let storage = src.storage()?;
        check_copy_bounds(Self::NAME, dst.len(), src.len, count)?;
        decode_into(
            &mut dst[..count],
            &storage.read().unwrap()[..count * T::BYTES],
        );
        trace::on_copy(CopyKind::ToHost);
        Ok(())
    }

    fn len<T: Scalar>(buf: &DeviceBuffer<T>) -> usize {
        buf.len
    }

    fn handle_id<T: Scalar>(buf: &DeviceBuffer<T>) -> u64 {
        buf.id
    }
}
