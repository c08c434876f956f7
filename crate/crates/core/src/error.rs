use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weight is not quadrature-integrable: {0}")]
    Integrability(String),

    #[error("phase-space function is not finite at node z = {re} + {im}i")]
    NodeEvaluation { re: f64, im: f64 },

    #[error("moment c_{gamma} diverges for this fiducial vector ({reason})")]
    DivergentMoment { gamma: f64, reason: String },

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("density operator check failed: {0}")]
    NotDensity(String),

    #[error("operation requires a diagonal seed operator")]
    NotDiagonal,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QuantError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QuantError {
    QuantError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
