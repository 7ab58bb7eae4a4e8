use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("infeasible state")]
    Infeasible,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("newton solve did not converge after {iterations} iterations (step norm {step_norm:e})")]
    NewtonFailed { iterations: usize, step_norm: f64 },

    #[error("pole of R at z = {0}")]
    Pole(Complex64),

    #[error("blended state is infeasible")]
    InfeasibleBlend,

    #[error("stiffness matrix is indefinite at rest (min eigenvalue {0:e})")]
    IndefiniteStiffness(f64),

    #[error("collision did not resolve within {0} steps")]
    NonTermination(usize),

    #[error("reference integration drifted by {0:e} in relative energy; use a smaller dt_ref")]
    UnstableReference(f64),

    #[error("{method} is not supported here: {reason}")]
    Unsupported { method: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
