use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("no crossing of FER threshold {threshold} in [{lo} m, {hi} m]")]
    NoCrossing { threshold: f64, lo: f64, hi: f64 },

    #[error("retry loop diverges: equivalent failure probability is 1")]
    RetryDivergence,

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
