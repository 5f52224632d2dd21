use std::fmt::{Debug, Display};

use num_traits::Float;

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// Floating-point element type stored in fields. Implemented for `f32` and
/// `f64` only.
pub trait Scalar:
    Float + Default + Debug + Display + Send + Sync + 'static + sealed::Sealed
{
    /// Size of one element in bytes.
    const BYTES: usize;
    /// Short name used in reports (`f32` / `f64`).
    const NAME: &'static str;

    fn from_f64(value: f64) -> Self;
    fn as_f64(self) -> f64;
    /// Nearest `f32`; the identity (bit for bit) on `f32`.
    fn narrow_f32(self) -> f32;
    /// Writes the little-endian encoding into `out[..Self::BYTES]`.
    fn write_le(self, out: &mut [u8]);
    /// Reads a little-endian encoding from `bytes[..Self::BYTES]`.
    fn read_le(bytes: &[u8]) -> Self;
    /// Raw IEEE-754 bits, widened to 64 bits.
    fn bits(self) -> u64;
}

impl Scalar for f32 {
    const BYTES: usize = 4;
    const NAME: &'static str = "f32";

    fn from_f64(value: f64) -> Self {
        value as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn narrow_f32(self) -> f32 {
        self
    }
    fn write_le(self, out: &mut [u8]) {
        out[..4].copy_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes[..4].try_into().unwrap())
    }
    fn bits(self) -> u64 {
        self.to_bits() as u64
    }
}

impl Scalar for f64 {
    const BYTES: usize = 8;
    const NAME: &'static str = "f64";

    fn from_f64(value: f64) -> Self {
        value
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn narrow_f32(self) -> f32 {
        self as f32
    }
    fn write_le(self, out: &mut [u8]) {
        out[..8].copy_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().unwrap())
    }
    fn bits(self) -> u64 {
        self.to_bits()
    }
}
