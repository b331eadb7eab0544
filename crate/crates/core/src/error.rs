use thiserror::Error;

use crate::chaos::Truncation;

pub type Result<T> = std::result::Result<T, ChaosError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: Truncation, right: Truncation },

    #[error("multi-index {index} lies outside the truncation {trunc}")]
    OutsideTruncation { index: String, trunc: Truncation },

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    #[error("singularity exponent {0} is not integrable (must exceed -1)")]
    NonIntegrable(f64),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl ChaosError {
    pub(crate) fn domain(name: &'static str, value: f64, domain: impl Into<String>) -> Self {
        ChaosError::Domain {
            name,
            value,
            domain: domain.into(),
        }
    }
}
