use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {re}+{im}i lies outside the closed unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("inner symbol (extreme)")]
    ExtremeSymbol,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("recovery failed: {0}")]
    Recovery(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
