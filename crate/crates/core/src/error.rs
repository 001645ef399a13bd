use std::path::PathBuf;

use thiserror::Error;

use crate::cloop::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (exit status 2 at the CLI).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with arguments of the wrong kind or shape.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("linear solve failed: {reason} (rows={rows}, cols={cols}, condition estimate {condition:.3e})")]
    Solver {
        reason: String,
        rows: usize,
        cols: usize,
        condition: f64,
    },

    #[error("kernel solve did not converge: {0}")]
    Convergence(String),

    /// Non-finite value produced by a fixed-point iterate.
    #[error("fixed-point iterate {iterate} is not finite")]
    Diverged { iterate: usize },

    /// Non-finite state during time marching; carries everything recorded so far.
    #[error("numerical blow-up at step {step} (t = {time}), fixed-point iterate {iterate}")]
    BlowUp {
        step: usize,
        time: f64,
        iterate: usize,
        partial: Box<Trajectory>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cache entry not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("malformed kernel cache file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
