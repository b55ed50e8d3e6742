//! Error type shared by every analysis module.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("division by the zero rational function")]
    DivisionByZeroFunction,

    #[error("evaluation at a pole: entry ({row}, {col}) at s = {s}")]
    PoleEvaluation { row: usize, col: usize, s: Complex64 },

    #[error("matrix is {rows}x{cols}, a square matrix is required")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular (determinant is identically zero)")]
    SingularMatrix,

    #[error("ill-posed interconnection: det(I + PU) is identically zero")]
    SingularLoop,

    #[error("transfer matrix is identically zero")]
    ZeroMatrix,

    #[error("transfer matrix is not proper (entry ({row}, {col}) grows without bound)")]
    NotProper { row: usize, col: usize },

    #[error("determinant curve passes within {distance:e} of the origin")]
    CurvePassesThroughOrigin { distance: f64 },

    #[error("eigenvalue computation failed at omega = {omega}")]
    EigenSolveFailure { omega: f64 },

    #[error("eigenvalue branches cannot be closed: endpoint gap {gap:e}")]
    ClosureFailure { gap: f64 },

    #[error("curve passes within {distance:e} of the point {point}")]
    PointOnCurve { point: Complex64, distance: f64 },

    #[error("nominal closed loop is not stable")]
    NominalUnstable,

    #[error("operand is not stable; its H-infinity norm is undefined")]
    UnstableOperand,

    #[error("repeated pole on the imaginary axis at {pole}")]
    RepeatedAxisPole { pole: Complex64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
