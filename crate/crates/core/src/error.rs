use std::path::PathBuf;

/// Errors produced by the numerical kernel and the layers built on it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid subsystem shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not Hermitian (skew residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("eigenvalue {value:e} below floor {floor:e}")]
    EigenvalueBelowFloor { value: f64, floor: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("noise parameter {0} outside [0, 1]")]
    InvalidAlpha(f64),

    #[error("not a quantum channel: min eigenvalue {min_eig:e}, trace-preservation residual {tp_residual:e}")]
    NotCptp { min_eig: f64, tp_residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("random channel draw failed after {attempts} attempts")]
    RandomDrawFailed { attempts: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed channel file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn mismatch(op: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
