//! Dense primal-dual interior-point solver for block-diagonal semidefinite
//! programs with free variables.
//!
//! Programs are stated in the standard primal form of [`SdpProblem`] and
//! solved by [`solve`], which runs a homogeneous self-dual embedding so that
//! infeasibility is reported as a status rather than as a failure.

mod diagnostics;
mod problem;
mod solver;

pub use diagnostics::{condition_report, ConditionReport};
pub use problem::{Constraint, LinearForm, MatEntry, SdpProblem};
pub use solver::{residuals, solve, IterateInfo, Residuals, SdpSolution, SdpStatus, Settings};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("malformed program: {0}")]
    Structure(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
