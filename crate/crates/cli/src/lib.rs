//! Experiment harness for the cut-DG solver: configuration, runs, error
//! norms, convergence sweeps, property suites and canned experiments.

pub mod config;
pub mod norms;
pub mod reproduce;
pub mod run;
pub mod verify;

use cutdg_core::CutDgError;

pub use config::RunConfig;
pub use norms::{compute_errors, ErrorNorms};
pub use run::{convergence_sweep, run, run_to_dir, ConvergenceRow, ErrorReport, Experiment, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] CutDgError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status: 2 for configuration errors, 3 for invariant
    /// violations, 4 for any other abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Solver(CutDgError::UnknownProblem(_)) => 2,
            Self::Solver(e) if e.is_invariant_violation() => 3,
            _ => 4,
        }
    }
}
