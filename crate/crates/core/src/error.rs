use thiserror::Error;

use crate::providers::IntegralKey;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("coefficient eps^{e} hbar^{h} lies outside the truncation window")]
    OutOfWindow { e: u32, h: u32 },
    #[error("phase frames differ")]
    FrameMismatch,
    #[error("not in the image of the q/u bridge: {0}")]
    NotInImage(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("missing intersection data for {} key(s): {}", .missing.len(), fmt_keys(.missing))]
    Coverage { missing: Vec<IntegralKey> },
    #[error("incomparable elements: {0}")]
    Incomparable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("intersection table: {0}")]
    Table(String),
}

fn fmt_keys(keys: &[IntegralKey]) -> String {
    keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn coverage(key: IntegralKey) -> Self {
        Error::Coverage { missing: vec![key] }
    }
}
