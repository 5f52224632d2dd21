//! Wavefield snapshots: raw `f32` little-endian files `snap_NNNNNN.bin`
//! (row-major, z slow) plus a `snapshots.csv` manifest with one row per file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub const MANIFEST_FILE: &str = "snapshots.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub step: usize,
    pub time_s: f64,
    pub file: String,
    pub min: f32,
    pub max: f32,
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snap_{step:06}.bin")
}

/// Writes `data` as raw little-endian `f32`.
pub fn write_field_file<T: Scalar>(path: &Path, data: &[T]) -> Result<()> {
    let mut bytes = Vec::with_capacity(4 * data.len());
    for v in data {
        bytes.extend_from_slice(&v.narrow_f32().to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a raw `f32` file, optionally checking its element count.
pub fn read_field_file(path: &Path, expected_len: Option<usize>) -> Result<Vec<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 || expected_len.is_some_and(|n| n * 4 != bytes.len()) {
        return Err(Error::Length {
            path: path.into(),
            expected: expected_len.map_or(bytes.len() / 4 * 4, |n| n * 4),
            found: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Reads the manifest of `dir`; a missing manifest is an empty set.
pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestRow>> {
    let path = dir.join(MANIFEST_FILE);
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|row| row.map_err(|e| csv_error(&path, e)))
        .collect()
}

/// Reads the snapshot file named in `row`.
pub fn read_snapshot(dir: &Path, row: &ManifestRow) -> Result<Vec<f32>> {
    read_field_file(&dir.join(&row.file), None)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.into(),
            reason: format!("{other:?}"),
        },
    }
}

fn write_manifest(dir: &Path, rows: &[ManifestRow]) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if rows.is_empty() {
        w.write_record(["step", "time_s", "file", "min", "max"])
            .map_err(|e| csv_error(&path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Snapshot directory writer. Keeps the manifest in memory and rewrites it
/// after every snapshot, so the directory is consistent after each call.
#[derive(Debug)]
pub struct SnapshotWriter {
    dir: PathBuf,
    rows: Vec<ManifestRow>,
}

impl SnapshotWriter {
    /// Creates `dir` if needed and starts an empty manifest.
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_manifest(&dir, &[])?;
        Ok(SnapshotWriter {
            dir,
            rows: Vec::new(),
        })
    }

    /// Continues an existing directory, keeping its manifest rows.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let rows = read_manifest(&dir)?;
        Ok(SnapshotWriter { dir, rows })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn rows(&self) -> &[ManifestRow] {
        &self.rows
    }

    /// Writes one snapshot. A second write for the same step replaces the
    /// file and its manifest row.
    pub fn write<T: Scalar>(
        &mut self,
        step: usize,
        time_s: f64,
        field: &[T],
        nz: usize,
        nx: usize,
    ) -> Result<ManifestRow> {
        if field.len() != nz * nx {
            return Err(Error::Bounds(format!(
                "snapshot of {} samples does not match {nz}x{nx}",
                field.len()
            )));
        }
        let file = snapshot_file_name(step);
        write_field_file(&self.dir.join(&file), field)?;
        let (min, max) = field
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| {
                let v = v.narrow_f32();
                (lo.min(v), hi.max(v))
            });
        let row = ManifestRow {
            step,
            time_s,
            file,
            min,
            max,
        };
        self.rows.retain(|r| r.step != step);
        self.rows.push(row.clone());
        self.rows.sort_by_key(|r| r.step);
        write_manifest(&self.dir, &self.rows)?;
        Ok(row)
    }
}

/// Appends one snapshot to the set in `dir`.
pub fn write_snapshot<T: Scalar>(
    dir: &Path,
    step: usize,
    time_s: f64,
    field: &[T],
    nz: usize,
    nx: usize,
) -> Result<ManifestRow> {
    SnapshotWriter::open(dir)?.write(step, time_s, field, nz, nx)
}
