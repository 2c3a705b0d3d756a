use thiserror::Error;

/// Errors produced by the imaging, bench and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported grid size {side}: {reason}")]
    UnsupportedSize { side: usize, reason: &'static str },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("autocorrelation is undefined for a zero-energy input")]
    ZeroEnergy,

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid region mask: {0}")]
    Mask(String),

    #[error("background region has zero standard deviation")]
    DegenerateBackground,

    #[error("malformed {format} data: {message}")]
    Format { format: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
