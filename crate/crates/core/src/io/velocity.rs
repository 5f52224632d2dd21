//! Velocity model files.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "PPVM"
//! 4       4           version, u32 = 1
//! 8       4           nz, u32
//! 12      4           nx, u32
//! 16      8           dh, f64
//! 24      4·nz·nx     velocities, f32, row-major, z slow
//! ```

use std::path::Path;

use crate::{Error, Result};

pub const VELOCITY_MAGIC: [u8; 4] = *b"PPVM";
pub const VELOCITY_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct VelocityModel {
    pub nz: usize,
    pub nx: usize,
    pub dh: f64,
    pub data: Vec<f32>,
}

impl VelocityModel {
    pub fn constant(nz: usize, nx: usize, dh: f64, v: f32) -> Self {
        VelocityModel {
            nz,
            nx,
            dh,
            data: vec![v; nz * nx],
        }
    }

    pub fn max_velocity(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }
}

pub fn encode_velocity_model(model: &VelocityModel) -> Result<Vec<u8>> {
    if model.data.len() != model.nz * model.nx {
        return Err(Error::Argument(format!(
            "velocity model has {} samples for {}x{} extents",
            model.data.len(),
            model.nz,
            model.nx
        )));
    }
    let extent = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Argument(format!("extent {n} does not fit in u32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * model.data.len());
    out.extend_from_slice(&VELOCITY_MAGIC);
    out.extend_from_slice(&VELOCITY_VERSION.to_le_bytes());
    out.extend_from_slice(&extent(model.nz)?.to_le_bytes());
    out.extend_from_slice(&extent(model.nx)?.to_le_bytes());
    out.extend_from_slice(&model.dh.to_le_bytes());
    for v in &model.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parses and validates a model; `path` is only used in error messages.
pub fn decode_velocity_model(bytes: &[u8], path: &Path) -> Result<VelocityModel> {
    let format = |reason: String| Error::Format {
        path: path.into(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(Error::Length {
            path: path.into(),
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if bytes[..4] != VELOCITY_MAGIC {
        return Err(format(format!("bad magic {:?}", &bytes[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VELOCITY_VERSION {
        return Err(format(format!("unsupported version {version}")));
    }
    let nz = u32_at(8) as usize;
    let nx = u32_at(12) as usize;
    let dh = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if nz == 0 || nx == 0 {
        return Err(format(format!("empty extents {nz}x{nx}")));
    }
    if !(dh > 0.0 && dh.is_finite()) {
        return Err(Error::Domain(format!(
            "grid spacing must be positive, got {dh}"
        )));
    }
    let expected = HEADER_LEN + 4 * nz * nx;
    if bytes.len() != expected {
        return Err(Error::Length {
            path: path.into(),
            expected,
            found: bytes.len(),
        });
    }
    let data: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some((idx, v)) = data
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::Domain(format!(
            "velocity must be positive, found {v} at sample {idx}"
        )));
    }
    Ok(VelocityModel { nz, nx, dh, data })
}

pub fn read_velocity_model(path: impl AsRef<Path>) -> Result<VelocityModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_velocity_model(&bytes, path)
}

pub fn write_velocity_model(path: impl AsRef<Path>, model: &VelocityModel) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_velocity_model(model)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
