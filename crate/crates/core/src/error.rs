use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("coordinate arity mismatch: model expects {expected}, element has {found}")]
    Arity { expected: usize, found: usize },

    #[error("invalid group model: {0}")]
    InvalidModel(String),

    #[error("window of {requested} elements exceeds cap of {cap}")]
    WindowCap { requested: u128, cap: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("set oracle undefined at {0}")]
    OracleUndefined(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),

    #[error("certificate rejected: {0}")]
    Rejected(String),
}

impl Error {
    /// Stable machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Arity { .. } => "arity",
            Error::InvalidModel(_) => "model",
            Error::WindowCap { .. } => "window_cap",
            Error::Empty(_) => "empty",
            Error::OracleUndefined(_) => "oracle_undefined",
            Error::Parameter(_) => "parameter",
            Error::Schema(_) => "schema",
            Error::Budget(_) => "budget",
            Error::Rejected(_) => "rejected",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
