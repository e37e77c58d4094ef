//! Experiment runner for `qframe`: reads a JSON config, runs one of the
//! converge, conserve, thermo or battery experiments, and writes CSV/JSON
//! artifacts.
//!
//! Exit status: 0 when every check passes, 1 on an invariant violation
//! (a proven bound exceeded, a second-law margin below slack, a conservation
//! failure), 2 when the config or inputs are unusable.

use std::path::{Path, PathBuf};

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, Mode, Overrides};
pub use run::{run, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qframe::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
