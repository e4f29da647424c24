//! Error type shared by every stage of the pipeline.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = VltError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum VltError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample {value} at column {i}, row {j}")]
    NonFinite { i: usize, j: usize, value: f64 },

    #[error("fields live on different grids (n={left} vs n={right})")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid direction ({d1}, {d2}): {reason}")]
    InvalidDirection { d1: f64, d2: f64, reason: &'static str },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("wrong equation type: expected {expected}, got {actual} (a={a}, b={b})")]
    Classification {
        expected: &'static str,
        actual: &'static str,
        a: f64,
        b: f64,
    },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("CFL condition violated: Courant number {courant:.4} > 1; use a refinement factor of at least {required_refine}")]
    Cfl { courant: f64, required_refine: usize },

    #[error("direction at {theta_deg:.4} deg is singular of type 1 (xi . gamma_{branch} = {dot:e})")]
    SingularType1 {
        theta_deg: f64,
        branch: usize,
        dot: f64,
    },

    #[error("direction at {theta_deg:.4} deg is singular of type 2 (det Q = {det:e})")]
    SingularType2 { theta_deg: f64, det: f64 },

    #[error("sinogram error: {0}")]
    Sinogram(String),

    #[error("reference field has zero norm")]
    ZeroReference,

    #[error("invalid argument: {0}")]
    Argument(String),
}

impl VltError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VltError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical solver (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            VltError::SolverDiverged { .. } | VltError::Cfl { .. } | VltError::SingularType2 { .. }
        )
    }
}
