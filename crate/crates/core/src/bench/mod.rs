//! Memory-bandwidth measurement and roofline records for the stencil kernels.

mod roofline;
mod stream;

pub use roofline::{
    count_kernel_costs, run_roofline, write_roofline_csv, write_roofline_file, KernelCost,
    KernelName, RooflineConfig, RooflineRecord, ROOFLINE_CSV_HEADER,
};
pub use stream::{
    run_stream, triad_bandwidth, StreamBackend, StreamConfig, StreamOp, StreamResult,
    DEFAULT_CACHE_BYTES,
};
