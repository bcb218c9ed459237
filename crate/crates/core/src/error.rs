use thiserror::Error;

/// Errors surfaced by the exact engine.
///
/// Everything here is a *loud* rejection: the engine never degrades to
/// approximate answers when an input falls outside its supported range.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field GF({p}^{k}): {reason}")]
    UnsupportedField { p: u32, k: u32, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("unsupported group spec `{spec}`: {reason}")]
    UnsupportedSpec { spec: String, reason: String },

    #[error("enumeration cap exceeded: reached {reached} elements (cap {cap})")]
    CapExceeded { reached: u64, cap: u64 },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("subset is not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("subgroup is not normal: {0}")]
    NotNormal(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("not an automorphism: {0}")]
    BadAutomorphism(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("search inconclusive: {0}")]
    Inconclusive(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
