use thiserror::Error;

/// Errors raised by the numerical and combinatorial pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("integration failed at t = {t}: step size underflow")]
    StepUnderflow { t: f64, last_state: Vec<f64> },

    #[error("trajectory diverged at t = {t}")]
    Divergence { t: f64, last_state: Vec<f64> },

    #[error("trapping region certification failed: {0}")]
    Certification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("bracket [{lo}, {hi}] does not contain a sign change of the {criterion} criterion")]
    Bracket { lo: f64, hi: f64, criterion: String },

    #[error("no descending section crossing before t = {t_max} at r = {r}")]
    NoCrossing { r: f64, t_max: f64 },

    #[error("inconclusive criterion at r = {r}: {reason}")]
    Inconclusive { r: f64, reason: String },

    #[error("grid budget exceeded: {cubes} cubes requested, budget is {budget}")]
    BudgetExceeded { cubes: u64, budget: u64 },

    #[error("isolation failure for Morse node {node}: {reason}; increase the grid depth")]
    Isolation { node: usize, reason: String },

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("empty cube set")]
    EmptyCubeSet,

    #[error("ambiguous symbol at crossing {index}: |x| = {x:e} inside the dead band")]
    AmbiguousSymbol { index: usize, x: f64 },

    #[error("periodic orbit not found: {0}")]
    NotFound(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
