//! Host-side file formats. All multi-byte values are little-endian.

mod snapshot;
mod velocity;

pub use snapshot::{
    read_field_file, read_manifest, read_snapshot, snapshot_file_name, write_field_file,
    write_snapshot, ManifestRow, SnapshotWriter, MANIFEST_FILE,
};
pub use velocity::{
    decode_velocity_model, encode_velocity_model, read_velocity_model, write_velocity_model,
    VelocityModel, VELOCITY_MAGIC, VELOCITY_VERSION,
};
