use thiserror::Error;

/// Errors produced by the numerical routines and the file front end.
#[derive(Debug, Error)]
pub enum WhipError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("singular pivot b[{index}] = {value:e}")]
    SingularPivot { index: usize, value: f64 },

    #[error("degenerate plane: Gram determinant {denominator:e}")]
    DegeneratePlane { denominator: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("sign check failed: {0}")]
    SignCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl WhipError {
    /// True for failures caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WhipError::SingularPivot { .. }
                | WhipError::NonFinite { .. }
                | WhipError::Cfl { .. }
                | WhipError::SignCheck(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, WhipError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(WhipError::LengthMismatch { expected, found });
    }
    Ok(())
}
