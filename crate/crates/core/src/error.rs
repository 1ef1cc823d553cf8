//! Error type shared by every module.
//!
//! Error payloads carry `f64` summaries rather than generic scalars so the
//! enum stays a single concrete type regardless of the working precision.

use thiserror::Error;

/// A point on a partially computed continuation branch, kept in the error
/// payload so a stuck run still reports everything it established.
#[derive(Debug, Clone)]
pub struct PartialBranchPoint {
    pub lambda: f64,
    pub residual: f64,
    pub jac_sign: i8,
    pub alpha_norm: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fractional exponent mismatch: state has alpha={state_alpha}, context wants alpha={want_alpha}")]
    AlphaMismatch { state_alpha: f64, want_alpha: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("trajectory diverged at step {step}: alpha-norm {norm:.3e} exceeds guard {guard:.3e}")]
    Divergence { step: usize, norm: f64, guard: f64 },

    #[error("iteration did not converge after {iters} steps: residual {residual:.3e} > tol {tol:.3e}")]
    NonConvergence {
        iters: usize,
        residual: f64,
        tol: f64,
        /// Last iterate, for diagnosis and restart.
        last: Vec<f64>,
    },

    #[error("jacobian column {col} failed: {source}")]
    JacobianColumn {
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate zero set: min |det DG| = {min_abs_det:.3e} at or below threshold {threshold:.3e}")]
    Degenerate { min_abs_det: f64, threshold: f64 },

    #[error("inadmissible boundary: min residual {min_residual:.3e} on the sphere is below {threshold:.3e}")]
    BoundaryZero {
        min_residual: f64,
        threshold: f64,
    },

    #[error("inconclusive degree computation: {0}")]
    Inconclusive(String),

    #[error("coverage violation: {0}")]
    Coverage(String),

    #[error("resonance detected: averaged asymptotic slope {f_inf_mean:.6} is within {tol:.3e} of eigenvalues {offending:?}")]
    Resonance {
        f_inf_mean: f64,
        tol: f64,
        offending: Vec<usize>,
    },

    #[error("continuation stuck at lambda={lambda:.6}: step underflow below {min_step:.3e} ({got} points computed)", got = partial.len())]
    ContinuationStuck {
        lambda: f64,
        min_step: f64,
        partial: Vec<PartialBranchPoint>,
    },

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a config-schema violation with a JSON-pointer style path.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}
