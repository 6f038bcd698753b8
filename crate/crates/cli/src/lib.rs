//! Scenario runner for the transversality toolkit.
//!
//! Scenarios are TOML files describing a pair of sets and/or an optimization
//! problem together with a list of analyses. Running a scenario produces a
//! JSON report (schema in `schema/report-v1.schema.json`) plus CSV traces.

pub mod analysis;
pub mod corpus;
pub mod hilbert;
pub mod report;
pub mod scenario;

pub use analysis::{implication_chain, Analysis, AnalysisOutcome, ChainReport};
pub use corpus::{run_corpus, CorpusRow, CorpusSummary};
pub use hilbert::{hilbert_cube_scaling, HilbertRow};
pub use report::{round_significant, AnalysisRecord, Report, REPORT_FORMAT};
pub use scenario::{BudgetSpec, Overrides, Scenario, SCENARIO_VERSION};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] transversal_core::Error),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit codes of the command-line tool.
pub mod exit {
    pub const CLEAN: i32 = 0;
    pub const DISCREPANCY: i32 = 1;
    pub const CONFIG: i32 = 2;
}
