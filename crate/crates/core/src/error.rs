use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum ShapError {
    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Data(String),

    #[error("enumeration over {requested} features exceeds the cap of {cap}; use the kernel or permutation baseline, or an ensemble explainer")]
    EnumerationCap { requested: usize, cap: usize },

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("protocol error: {message} (payload: {excerpt})")]
    Protocol { message: String, excerpt: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ShapError {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            ShapError::Dimension { .. } => "dimension",
            ShapError::Config(_) => "config",
            ShapError::Domain(_) => "domain",
            ShapError::Data(_) => "data",
            ShapError::EnumerationCap { .. } => "enumeration_cap",
            ShapError::Degenerate(_) => "degenerate",
            ShapError::Transport(_) => "transport",
            ShapError::Protocol { .. } => "protocol",
            ShapError::Io(_) => "io",
            ShapError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, ShapError>;
