//! Input parsing and report output.

mod config;
mod measurements;
mod params;
mod report;
mod touchstone;

pub use config::RunConfig;
pub use measurements::{parse_csv_measurements, CsvMeasurementSchema, IngestedDataset, RowIssue, ValidationMode};
pub use params::{load_params, parse_params, ParamRegistry, RegistryEntry, BUNDLED_PARAMS};
pub use report::{read_json_report, write_report, Report, ReportFormat, RunInfo};
pub use touchstone::{
    parse_touchstone, sweep_from_response, write_touchstone, DataFormat, FrequencyUnit, TouchstoneOptions,
    TouchstoneSweep, TwoPortPoint,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::multipath::MultipathError;

/// Position in a text input, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{at}: malformed option line: {message}")]
    MalformedOptionLine { at: Location, message: String },
    #[error("{at}: Touchstone version 2 keywords are not supported (v1 only)")]
    UnsupportedVersion { at: Location },
    #[error("{at}: frequency {freq_hz} Hz does not increase over the previous row")]
    NonMonotonicFrequency { at: Location, freq_hz: f64 },
    #[error("{at}: frequency step {found_hz} Hz differs from grid step {expected_hz} Hz")]
    NonUniformGrid { at: Location, expected_hz: f64, found_hz: f64 },
    #[error("{at}: expected {expected} values per two-port row, found {found}")]
    RowArityError { at: Location, expected: usize, found: usize },
    #[error("{at}: cannot parse '{token}' as a number")]
    InvalidNumber { at: Location, token: String },
    #[error("no data rows")]
    NoData,
    #[error("input is empty")]
    EmptyFile,
    #[error("missing column '{column}' in header")]
    MissingColumn { column: String },
    #[error("line {line}: {column}: {message}")]
    ValueOutOfRange { line: usize, column: String, message: String },
    #[error("line {line}: {column}: {message}")]
    InvalidValue { line: usize, column: String, message: String },
    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: section [{section}] is missing required field '{field}'")]
    MissingRequiredField { line: usize, section: String, field: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Multipath(#[from] MultipathError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    /// Line number of the offending input, when known.
    pub fn line(&self) -> Option<usize> {
        use IngestError::*;
        match self {
            MalformedOptionLine { at, .. }
            | UnsupportedVersion { at }
            | NonMonotonicFrequency { at, .. }
            | NonUniformGrid { at, .. }
            | RowArityError { at, .. }
            | InvalidNumber { at, .. } => Some(at.line),
            ValueOutOfRange { line, .. }
            | InvalidValue { line, .. }
            | DuplicateKey { line, .. }
            | MissingRequiredField { line, .. }
            | Syntax { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<Vec<u8>, IngestError> {
    std::fs::read(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })
}
