use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition does not hold (shapes, grid fit, parameters).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out of tabulation range: ({x}, {y})")]
    OutOfTabulationRange { x: f64, y: f64 },

    /// Krylov iteration stopped before reaching the requested tolerance.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e}){}", .column.map(|c| format!(" in column {c}")).unwrap_or_default())]
    NonConvergence {
        iterations: usize,
        residual: f64,
        column: Option<usize>,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("no scattering data: {0}")]
    NoScatteringData(String),

    #[error("M# not PSD — data inconsistent with real contrasts (min eigenvalue {min_eig:e}, threshold {threshold:e})")]
    NotPsd { min_eig: f64, threshold: f64 },

    #[error("calibration indeterminate — adjust annulus or grid (m_plus = {m_plus}, m_minus = {m_minus})")]
    CalibrationIndeterminate { m_plus: usize, m_minus: usize },

    #[error("no sign-definite comparison found")]
    NoSignDefinite,

    #[error("division by zero eigenvalue with zero regularization")]
    ZeroEigenvalue,

    #[error("convention mismatch: {0}")]
    ConventionMismatch(String),

    #[error("parse error in {file}, line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("checksum mismatch for {0}")]
    Checksum(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Singular(_)
                | Error::Eigen(_)
                | Error::NotPsd { .. }
                | Error::CalibrationIndeterminate { .. }
                | Error::NoSignDefinite
                | Error::ZeroEigenvalue
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
