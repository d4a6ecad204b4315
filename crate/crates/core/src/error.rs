use thiserror::Error;

/// Errors raised by the laboratory. Each variant maps to a stable
/// machine-readable code used by the command-line front-end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A point or map left the open unit disk.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller violated an operation contract (length mismatch, bad index range, ...).
    #[error("contract error: {0}")]
    Contract(String),
    /// Exponent combination routed to the wrong regime (p <= q versus q < p).
    #[error("regime error: {0}")]
    Regime(String),
    /// Parameters outside the range an operation supports.
    #[error("out of scope: {0}")]
    OutOfScope(String),
    /// Degree caps or other configuration limits exceeded.
    #[error("configuration error: {0}")]
    Config(String),
    /// A grid is too coarse for the requested region.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// An iteration failed to contract.
    #[error("divergence: {0}")]
    Divergence(String),
    /// Malformed input file or value.
    #[error("input error: {0}")]
    Input(String),
    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub fn code(&self) -> &'static str {
        match self {
            LabError::Domain(_) => "DOMAIN",
            LabError::Contract(_) => "CONTRACT",
            LabError::Regime(_) => "REGIME",
            LabError::OutOfScope(_) => "OUT_OF_SCOPE",
            LabError::Config(_) => "CONFIG",
            LabError::Resolution(_) => "RESOLUTION",
            LabError::Divergence(_) => "DIVERGENCE",
            LabError::Input(_) => "INPUT",
            LabError::Io(_) => "IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
