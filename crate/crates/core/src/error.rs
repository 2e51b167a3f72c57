use thiserror::Error;

use crate::problem::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Kernel argument outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid problem: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// Point outside the admissible cone, or a log argument that underflowed.
    #[error("cone violation: {0}")]
    ConeViolation(String),

    #[error("solution type {n} out of range 0..={m}")]
    TypeOutOfRange { n: usize, m: usize },

    #[error("dimension mismatch: expected {expected} free boundaries, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "minimizer did not converge after {iterations} iterations (gradient max-norm {grad_norm:e}, last iterate {last:?})"
    )]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last: Vec<f64>,
    },

    /// The analytic Hessian failed to factor. Strict convexity rules this out
    /// on the cone, so seeing it means a bug or a non-finite input.
    #[error("Hessian is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("explicit scheme became unstable at step {step}: {detail}")]
    Unstable { step: usize, detail: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("malformed problem document: {0}")]
    Document(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
