//! Crate-wide error type.

use crate::integrator::Trajectory;

/// Errors produced by graph construction, objective oracles, dynamics
/// evaluation, integration, and configuration parsing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid edge: {0}")]
    InvalidEdge(String),

    #[error("graph is not connected: {0}")]
    NotConnected(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid benchmark: {0}")]
    InvalidBenchmark(String),

    #[error("invalid initialization: {0}")]
    InvalidInit(String),

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("minimizer oracle failed after {iterations} iterations (gradient norm {residual:.3e})")]
    OracleFailure { residual: f64, iterations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A state component left the admissible range or became non-finite.
    /// When raised by a full integration the partial trajectory up to the
    /// blow-up is attached so callers can persist it.
    #[error("state diverged at t = {time} (component {component})")]
    Divergence {
        time: f64,
        component: usize,
        partial: Option<Box<Trajectory>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
