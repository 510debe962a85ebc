use std::io;
use std::path::{Path, PathBuf};

use photocert::decoy::DecoyError;
use photocert::hbt::{HbtError, RecordError};
use photocert::keyrate::KeyRateError;
use photocert::photon_model::ModelError;
use photocert::stats_bounds::BoundsError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad flags, config values or model parameters.
    pub const VALIDATION: i32 = 2;
    /// Measured data inconsistent with any physical source or channel.
    pub const CALIBRATION_ALARM: i32 = 3;
    /// Files that cannot be read or written, or would be overwritten.
    pub const IO: i32 = 4;
    /// Input data that is malformed, empty or too sparse to use.
    pub const INPUT_DATA: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("calibration alarm: {0}")]
    CalibrationAlarm(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} exists; pass --force to overwrite")]
    OutputExists(PathBuf),
    #[error("{0}")]
    InputData(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::CalibrationAlarm(_) => exit::CALIBRATION_ALARM,
            CliError::Io { .. } | CliError::OutputExists(_) => exit::IO,
            CliError::InputData(_) => exit::INPUT_DATA,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches the file name to a record-file error.
    pub fn records(path: &Path, err: RecordError) -> Self {
        match err {
            RecordError::Io(source) => CliError::io(path, source),
            parse => CliError::InputData(format!("{}: {parse}", path.display())),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<HbtError> for CliError {
    fn from(e: HbtError) -> Self {
        match e {
            HbtError::EmptyStream
            | HbtError::NonIncreasingIndex { .. }
            | HbtError::InsufficientCounts { .. } => CliError::InputData(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::InfeasibleConstraints { .. } => CliError::CalibrationAlarm(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DecoyError> for CliError {
    fn from(e: DecoyError) -> Self {
        match e {
            DecoyError::InfeasibleObservations => CliError::CalibrationAlarm(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<KeyRateError> for CliError {
    fn from(e: KeyRateError) -> Self {
        match e {
            KeyRateError::Decoy(d) => d.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}
