use std::path::PathBuf;

/// Coarse classification of an [`Error`], used by callers that map failures
/// onto process exit codes or HTTP responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// No proposal passed the pseudo-ground-truth overlap test.
    NoForeground,
    /// A file or record does not conform to its declared format, or an
    /// input value is out of range.
    Format,
    /// Two rasters that must share dimensions do not.
    Dimension,
    /// Underlying filesystem failure.
    Io,
    /// Anything else (violated preconditions, internal invariants).
    Other,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {found_width}x{found_height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        found_width: usize,
        found_height: usize,
    },

    #[error("no proposal overlaps the motion mask above the threshold in frame {frame}")]
    NoForegroundFound { frame: usize },

    #[error("{0}")]
    Format(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("search window {window_w}x{window_h} smaller than query block {block_w}x{block_h}")]
    WindowTooSmall {
        window_w: usize,
        window_h: usize,
        block_w: usize,
        block_h: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. } => ErrorKind::Dimension,
            Error::NoForegroundFound { .. } => ErrorKind::NoForeground,
            Error::Format(_) => ErrorKind::Format,
            Error::Io { .. } => ErrorKind::Io,
            Error::EmptyInput(_) | Error::WindowTooSmall { .. } => ErrorKind::Other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that two rasters agree on both dimensions.
pub(crate) fn check_dims(
    expected: (usize, usize),
    found: (usize, usize),
) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            found_width: found.0,
            found_height: found.1,
        });
    }
    Ok(())
}
