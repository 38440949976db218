use thiserror::Error;

/// Errors raised by the numerical library.
///
/// Variants split into configuration/validation problems and numerical
/// failures; the CLI maps the former to exit code 2 and the latter to 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {alpha:?} outside the domain of chart {chart}")]
    OutsideChart { chart: usize, alpha: [f64; 2] },

    #[error("degenerate geometry on chart {chart}: {reason}")]
    Geometry { chart: usize, reason: String },

    #[error("kernel evaluated at its singularity x = 0")]
    Singularity,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("convergence failure: {reason}; series = {series:?}")]
    Convergence { reason: String, series: Vec<(f64, f64)> },

    #[error("fixed-point solver failed: {0}")]
    Solver(String),

    #[error("iterate left chart {chart}; a chart transition is required")]
    ChartTransition { chart: usize },

    #[error("classification error: {0}")]
    Classification(String),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical breakdown.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Kernel(_) | Error::Parse(_) | Error::Config { .. })
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
