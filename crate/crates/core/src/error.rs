use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("pump envelope vanishes on the frequency grid")]
    DegenerateEnvelope,

    #[error("state has no support after {0}")]
    EmptyOverlap(&'static str),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("dispersion fit has no zero-dispersion point inside the data span")]
    NoFold,

    #[error("dispersion fit failed: {0}")]
    Fit(String),

    #[error("value {value} outside valid range [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("delay {delay_ps} ps lies below the fold minimum {min_ps} ps")]
    UnphysicalDelay { delay_ps: f64, min_ps: f64 },

    #[error("wavelength resolution diverges at zero local dispersion ({wavelength_nm} nm)")]
    DivergentResolution { wavelength_nm: f64 },

    #[error("stream alignment: {0}")]
    StreamAlignment(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("no baseline plateau: {0}")]
    Baseline(String),

    #[error("malformed data in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
