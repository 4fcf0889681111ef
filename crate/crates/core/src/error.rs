use thiserror::Error;

/// Errors produced by the solvers, diagnostics and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in field at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("singular system: zero pivot at row {pivot}")]
    Singular { pivot: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("divergence in stage `{stage}` (sup-norm {sup_norm:e})")]
    Divergence { stage: &'static str, sup_norm: f64 },

    #[error("non-differentiable point |p| = {norm} (too close to 1)")]
    NonDifferentiable { norm: f64 },

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("config error at line {line}, key `{key}`: {reason}")]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(param(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}
