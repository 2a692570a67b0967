//! Scenario runner for `satlab`.
//!
//! A scenario is a TOML file naming a manifold (or a manifold sequence),
//! solver settings and the checks to run. Running it writes one CSV per
//! check plus `summary.csv` and `verdict.txt` into the output directory.
//!
//! Exit codes: 0 when every verdict passes, 1 when some verdict fails,
//! 2 for configuration errors and unknown names, 3 for solver failures
//! (the residual history is written next to the other outputs).

pub mod bundled;
pub mod describe;
pub mod runner;
pub mod scenario;

pub use bundled::{bundled, bundled_names, find_bundled, suggest};
pub use describe::describe;
pub use runner::{run_scenario, RunOptions, RunReport, Verdict};
pub use scenario::{Check, Scenario};

use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("unknown scenario `{name}`{}", suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownScenario { name: String, suggestion: Option<String> },
    #[error("solver failure in {check}: {message}\nresidual history: {}", history.display())]
    Solver { check: String, message: String, history: PathBuf },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownScenario { .. } => EXIT_CONFIG,
            CliError::Solver { .. } => EXIT_SOLVER,
        }
    }
}
