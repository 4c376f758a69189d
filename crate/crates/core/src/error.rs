use std::fmt;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = AoiError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AoiError {
    #[error("invalid configuration: {}", ViolationList(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// The scenario is valid but the requested quantity is unbounded or undefined,
    /// e.g. no packet ever arrives or no source is ever actually active.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("enumeration of {assignments} level assignments exceeds the limit of {limit}")]
    EnumerationTooLarge { assignments: f64, limit: u64 },

    #[error("root bracket [{lo}, {hi}] has no sign change")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("stationary distribution did not converge: {0}")]
    NonConvergence(String),

    #[error("no average AoI: user 1 completed {deliveries} deliveries in {slots} slots")]
    NoDeliveries { deliveries: usize, slots: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("csv output failed: {0}")]
    Csv(String),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl From<csv::Error> for AoiError {
    fn from(err: csv::Error) -> Self {
        AoiError::Csv(err.to_string())
    }
}

impl From<std::io::Error> for AoiError {
    fn from(err: std::io::Error) -> Self {
        AoiError::Csv(err.to_string())
    }
}
