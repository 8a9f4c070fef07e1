use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CuError {
    #[error("domain mismatch: expected `{expected}`, found `{found}`")]
    DomainMismatch { expected: String, found: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not representable: {0}")]
    Representation(String),
    #[error("sequence is not Cauchy within depth {depth}: comparison fails on {failing}")]
    NotCauchy { depth: usize, failing: String },
    #[error("missing certificate: {0}")]
    MissingCertificate(String),
    #[error("prefix too short: {reason} (need at least {required} stages)")]
    PrefixTooShort { reason: String, required: usize },
    #[error("search exhausted at bound {bound}: {what}")]
    Exhausted { bound: usize, what: String },
}

pub type Result<T> = std::result::Result<T, CuError>;

pub(crate) fn check_same(expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CuError::DomainMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}
