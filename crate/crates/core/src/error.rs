use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input to an operation (dimension mismatch, out-of-range parameter).
    #[error("argument error: {0}")]
    Argument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown model '{name}' (available: {available})")]
    UnknownModel { name: String, available: String },

    #[error("singular lattice basis: |triple product| = {0:e}")]
    SingularBasis(f64),

    #[error("degenerate start point: |grad| = {grad:e} below threshold {threshold:e}")]
    DegenerateStart { grad: f64, threshold: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("computation failed: {0}")]
    Computation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Short machine-readable tag used by the CLI and the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Parse { .. } => "parse",
            Error::UnknownModel { .. } => "unknown_model",
            Error::SingularBasis(_) => "singular_basis",
            Error::DegenerateStart { .. } => "degenerate_start",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Computation(_) => "computation",
            Error::Io(_) => "io",
        }
    }
}
