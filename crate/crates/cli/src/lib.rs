//! Experiment harness around the `asyadmm` library.

pub mod config;
pub mod experiment;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Solver(#[from] asyadmm::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Solver(asyadmm::Error::InvalidParameter(_))
            | CliError::Solver(asyadmm::Error::NotStronglyConnected)
            | CliError::Solver(asyadmm::Error::TooFewNodes { .. })
            | CliError::Solver(asyadmm::Error::InvalidProbability(_)) => 2,
            _ => 1,
        }
    }
}
