use std::ops::Range;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("psi is not strictly increasing: {0}")]
    NonMonotone(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error in `{snippet}` (bytes {}..{}): {message}", span.start, span.end)]
    Eval {
        span: Range<usize>,
        snippet: String,
        message: String,
    },

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("picard iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        update_norms: Vec<f64>,
        ratios: Vec<f64>,
    },

    #[error("non-finite iterate at node {node} (t = {t})")]
    NonFiniteIterate { node: usize, t: f64 },
}
