use thiserror::Error;

#[derive(Debug, Error)]
pub enum QetuError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("phase solver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    Convergence { best_residual: f64, iterations: usize },
    #[error("post-selection failed: outcome probability {probability:.3e}")]
    Projection { probability: f64 },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QetuError>;
