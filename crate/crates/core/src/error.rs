use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation {value} at position {index} lies outside the model support ({detail})")]
    Support {
        index: usize,
        value: f64,
        detail: String,
    },

    #[error(
        "sample variance proxy mu2 - mu1^2 = {gap:.6} is not positive (mu1 = {mu1:.6}, mu2 = {mu2:.6}); \
         the scale estimator is undefined for this weight shape, choose different (a, b)"
    )]
    NegativeVarianceProxy { mu1: f64, mu2: f64, gap: f64 },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no sign change found while bracketing the root in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
