use thiserror::Error;

/// Errors produced by estimator, scanning, and calibration routines.
#[derive(Debug, Error)]
pub enum CimError {
    /// Input data violates a precondition (length, finiteness, range).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A configuration value is out of its legal domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Null-model calibration could not produce a usable fit.
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
}

pub type Result<T> = std::result::Result<T, CimError>;
