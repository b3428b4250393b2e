use thiserror::Error;

/// Errors produced by network construction, evaluation and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty matrix: {0}")]
    EmptyMatrix(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered in layer {layer}")]
    NonFinite { layer: usize },

    #[error("unknown activation tag `{0}`")]
    UnknownActivation(String),

    #[error("activation `{tag}` has {sigma_one} at 1; bias augmentation needs a nonzero value")]
    UnsupportedNormalization { tag: String, sigma_one: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("k = {k} is below the admissible threshold k0 = {k0}")]
    KTooSmall { k: u64, k0: f64 },

    #[error("activation assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("budget (W, K) infeasible: need W >= {c1:.6} and K >= {c2:.6} * W = {min_k:.6}")]
    Infeasible { c1: f64, c2: f64, min_k: f64 },

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid network document at `{path}`: {reason}")]
    InvalidDocument { path: String, reason: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
