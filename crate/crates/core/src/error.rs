use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Combinatorial search guard violated.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An exponent `a_k / T_k` exceeded the representable range.
    #[error("power exponent saturated: {exponent} exceeds {cap}")]
    Saturation { exponent: f64, cap: f64 },

    /// Overheads consumed the whole frame.
    #[error("degenerate frame: {0}")]
    Degenerate(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
