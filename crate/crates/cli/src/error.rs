//! CLI error type with the exit-code contract: 0 success, 1 runtime or
//! numerical failure, 2 usage, configuration, or data error.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("missing value for cell (t={t}, i={i}, j={j})")]
    MissingValue { t: usize, i: usize, j: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] matfact::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::MissingValue { .. }
            | CliError::Config(_)
            | CliError::Io(_) => 2,
            CliError::Core(core) => match core {
                // data, shape, and configuration problems
                matfact::Error::ShapeMismatch { .. }
                | matfact::Error::NonFinite { .. }
                | matfact::Error::Dim(_)
                | matfact::Error::Config(_)
                | matfact::Error::InsufficientData(_) => 2,
                // numerical failures at runtime
                matfact::Error::RankDeficient
                | matfact::Error::NotSymmetric
                | matfact::Error::EigenNoConverge
                | matfact::Error::ZeroMatrix
                | matfact::Error::DegenerateTau
                | matfact::Error::CovNotPd => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
