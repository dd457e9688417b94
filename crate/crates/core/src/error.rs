use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {m}x{n}: both must be at least 1")]
    Dimensions { m: usize, n: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("negative entry {value} at ({row}, {col}); profiles hold standard deviations")]
    Negative { row: usize, col: usize, value: f64 },

    #[error("empty vector")]
    Empty,

    #[error("invalid exponent pair p*={p_star}, q={q}: need 1 <= p* <= 2 <= q <= inf")]
    Pair { p_star: f64, q: f64 },

    #[error("exponent {0} out of range: {1}")]
    Exponent(f64, &'static str),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
