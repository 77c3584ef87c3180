use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is singular at pivot row {row}: {detail}")]
    Singular { row: usize, detail: String },

    #[error("unsupported quadrature degree {0} (at most 5)")]
    UnsupportedQuadrature(usize),

    #[error("mesh parse error in {file} line {line}: {msg}")]
    MeshParse { file: String, line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("periodic identification failed: vertex {vertex} at ({x}, {y}) has no partner")]
    UnmatchedPeriodicVertex { vertex: usize, x: f64, y: f64 },

    #[error("boundary condition error: {0}")]
    Boundary(String),

    #[error("field/space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("Newton did not converge at step {step} (t = {time}) after {iterations} iterations, last residual {residual:.3e}")]
    NewtonDiverged { step: usize, time: f64, iterations: usize, residual: f64 },

    #[error("POD basis has rank 0 (all snapshots vanish)")]
    RankZero,

    #[error("requested {requested} modes but basis rank is {rank}")]
    RankExceeded { requested: usize, rank: usize },

    #[error("time grids do not match: {0}")]
    TimeGridMismatch(String),

    #[error("format error in {field}: {msg}")]
    Format { field: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn format(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format { field: field.into(), msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
