use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the synthesis pipeline.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("operation requires a discrete domain, got a continuous one")]
    ContinuousDomain,
    #[error("operation requires a continuous domain, got a discrete one")]
    DiscreteDomain,
    #[error("domain enumeration of {size} points exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: usize },
    #[error("marginal degree {degree} outside 1..={dim}")]
    DegreeOutOfRange { degree: usize, dim: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("parameter `{name}` = {value} out of range: {expected}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("epsilon must be positive, got {0}")]
    NonpositiveEpsilon(f64),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("linear program reported infeasible (numerical breakdown)")]
    Infeasible,
    #[error("simplex stopped after {0} pivots without reaching optimality")]
    IterationLimit(usize),
    #[error("densities are not defined over the same support")]
    SupportMismatch,
    #[error("absolute continuity violated at support index {0}")]
    AbsoluteContinuityViolation(usize),
    #[error("reference density has zero mass at support index {0}")]
    ZeroMass(usize),
    #[error("missing density extremes: {0}")]
    MissingExtremes(&'static str),
    #[error("query `{0}` takes values outside {{0, 1}}")]
    RangeViolation(String),
    #[error("expected proportion at category {0} is not strictly positive")]
    ZeroExpected(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("csv row {row}, column {column}: {message}")]
    Csv { row: usize, column: usize, message: String },
    #[error(transparent)]
    CsvFormat(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_range(name: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value, expected })
    }
}
