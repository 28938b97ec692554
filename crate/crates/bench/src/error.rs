use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad configuration or arguments, detected before anything runs.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dpsynth_core::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("csv output failure: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    /// Process exit status: 1 for configuration errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

/// Short stable identifier of a core error, for the `error` column.
pub fn error_code(err: &dpsynth_core::Error) -> &'static str {
    use dpsynth_core::Error as E;
    match err {
        E::ContinuousDomain => "ContinuousDomain",
        E::DiscreteDomain => "DiscreteDomain",
        E::CapExceeded { .. } => "CapExceeded",
        E::DegreeOutOfRange { .. } => "DegreeOutOfRange",
        E::DomainMismatch(_) => "DomainMismatch",
        E::InvalidDomain(_) => "InvalidDomain",
        E::InvalidDataset(_) => "InvalidDataset",
        E::InvalidDensity(_) => "InvalidDensity",
        E::ParameterOutOfRange { .. } => "ParameterOutOfRange",
        E::NonpositiveEpsilon(_) => "NonpositiveEpsilon",
        E::IndexOutOfRange { .. } => "IndexOutOfRange",
        E::Infeasible => "Infeasible",
        E::IterationLimit(_) => "IterationLimit",
        E::SupportMismatch => "SupportMismatch",
        E::AbsoluteContinuityViolation(_) => "AbsoluteContinuityViolation",
        E::ZeroMass(_) => "ZeroMass",
        E::MissingExtremes(_) => "MissingExtremes",
        E::RangeViolation(_) => "RangeViolation",
        E::ZeroExpected(_) => "ZeroExpected",
        E::DimensionMismatch { .. } => "DimensionMismatch",
        E::Csv { .. } | E::CsvFormat(_) => "Csv",
        E::Io(_) => "Io",
        _ => "Other",
    }
}
