use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid UAV profile: {0}")]
    InvalidProfile(String),

    #[error("invalid FL hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unresolved tie at subregion {subregion} after {rounds} calibration rounds")]
    UnresolvedTie { subregion: String, rounds: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("enumeration refused: instance size {size} exceeds cap {cap}")]
    EnumerationTooLarge { size: usize, cap: usize },
}
