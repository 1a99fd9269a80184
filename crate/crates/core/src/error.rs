use std::path::PathBuf;

use crate::newton_krylov::SolveStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite value at point index {index} (component {component})")]
    NonFinite { index: usize, component: usize },

    #[error("axis {0} out of range (expected 0, 1 or 2)")]
    AxisOutOfRange(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonlinear solve failed after {} Newton iterations (residual {:.3e})", .stats.newton_iters, .stats.final_residual_norm)]
    SolverFailure { stats: SolveStats },

    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("snapshot format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
