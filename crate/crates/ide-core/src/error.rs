//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors reported by model construction, discretization and experiments.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition on inputs
    /// (domain violations, length mismatches, missing boundary data, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A linear system arising from collocation could not be solved reliably.
    #[error("collocation system is singular or ill-conditioned (pivot-ratio estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },

    /// A NaN or infinity appeared during evaluation.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    /// A mathematical precondition of the requested operation does not hold
    /// for the given model parameters.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iteration reached its step limit before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A rate experiment produced differences from which no finite rate can
    /// be formed (vanishing or non-finite error norms).
    #[error("degenerate rate experiment at level n={level}: {reason}")]
    Degenerate { level: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
