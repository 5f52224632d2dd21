//! Memory Spaces, Execution Spaces and the generic building blocks composed
//! on top of them: containers, tag-dispatched routines and the acoustic
//! `WaveSimulator` algorithm.
//!
//! Data placement is decided by a [`MemorySpace`] type parameter, processing
//! by an [`ExecutionSpace`] tag. Every tag names exactly one accessible
//! memory space and the compiler rejects any routine call that pairs a tag
//! with data it cannot reach.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod containers;
mod error;
pub mod io;
pub mod kernels;
mod scalar;
pub mod simulator;
pub mod spaces;

pub use containers::ScalarField;
pub use error::{Error, Result};
pub use kernels::{Backend, KernelBackend};
pub use scalar::Scalar;
pub use spaces::{
    ExecutionSpace, HostSpace, MemorySpace, Serial, SimDevice, SimDeviceSpace, Threaded,
};
