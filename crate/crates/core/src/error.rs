use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box dimensions: {0}")]
    InvalidDims(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("cell ({0}, {1}, {2}) is outside the box")]
    OutOfBox(i32, i32, i32),
    #[error("not a valid interface: {0}")]
    InvalidInterface(String),
    #[error("invalid standard wall collection: {0}")]
    InvalidCollection(String),
    #[error("face set is not simply connected")]
    NotSimplyConnected,
    #[error("infeasible constraint: {0}")]
    Infeasible(String),
    #[error("oracle request too large: {0}")]
    OracleTooLarge(String),
    #[error("audit mismatch at step {step}: {detail}")]
    AuditMismatch { step: u64, detail: String },
    #[error("threshold {threshold:.6} not crossed for h up to {max_h}")]
    ThresholdNotCrossed { threshold: f64, max_h: u32 },
    #[error("degenerate alpha table: {0}")]
    DegenerateTable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidDims(_) | Error::InvalidQuery(_) => 2,
            Error::Infeasible(_) | Error::ThresholdNotCrossed { .. } => 3,
            Error::OracleTooLarge(_) => 4,
            Error::Io { .. } => 5,
            Error::Validation(_) => 6,
            Error::AuditMismatch { .. } => 7,
            _ => 1,
        }
    }
}
