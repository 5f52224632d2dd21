use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("out of memory: failed to reserve {bytes} bytes in {space}")]
    OutOfMemory { space: &'static str, bytes: usize },

    #[error("invalid buffer handle {id:#x} for {space}")]
    InvalidHandle { space: &'static str, id: u64 },

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unstable configuration: CFL ratio {ratio:.6} exceeds limit {limit:.6}")]
    Stability { ratio: f64, limit: f64 },

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("length error in {path}: expected {expected} bytes, found {found}")]
    Length {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("benchmark verification failed: {0}")]
    Verification(String),

    #[error("missing dependency: {0}")]
    Dependency(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
