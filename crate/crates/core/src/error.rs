use alloc::string::String;

use crate::params::{Model, State};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter violates one of its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state {state:?} for {model:?}: {reason}")]
    InvalidState {
        model: Model,
        state: State,
        reason: &'static str,
    },

    /// The computation needs a positive recurrent chain.
    #[error("unstable parameters: lambda = {lambda} is not below the effective service rate {effective_rate}")]
    Unstable { lambda: f64, effective_rate: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("truncation too small: estimated tail mass {tail_mass:e} exceeds {limit:e}")]
    TruncationTooSmall { tail_mass: f64, limit: f64 },

    #[error("singular system: {0}")]
    Singular(&'static str),

    #[error("degenerate case: {0}")]
    Degenerate(&'static str),

    #[error("methods disagree: {what} ({a:e} vs {b:e})")]
    Disagreement { what: &'static str, a: f64, b: f64 },

    #[error("non-positive horizontal drift {0:e}; the twisted free process does not escape")]
    NonPositiveDrift(f64),

    #[error("empty window: {0}")]
    EmptyWindow(&'static str),

    #[error("sum not converged: {0}")]
    NotConverged(String),
}
