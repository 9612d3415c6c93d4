use thiserror::Error;

/// Errors produced by state construction and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid mode index {index} for a {mode_count}-mode system")]
    InvalidMode { index: usize, mode_count: usize },

    #[error("mode pair ({0}, {0}) is degenerate")]
    DegeneratePair(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid mode list: {0}")]
    InvalidModeList(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("state is not physical: {0}")]
    NotPhysical(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("grid must contain at least one point")]
    EmptyGrid,

    #[error("Fock space too large: {amplitudes} amplitudes exceeds the limit of {limit}")]
    FockSpaceTooLarge { amplitudes: usize, limit: usize },

    #[error("Fock truncation insufficient: norm deficit {deficit:.3e} exceeds {limit:.0e}")]
    TruncationInsufficient { deficit: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
