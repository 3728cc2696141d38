use thiserror::Error;

/// Errors raised across the crate.
///
/// Configuration and input errors are separated from numeric failures so
/// front-ends can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("duplicate quantity `{0}`")]
    DuplicateQuantity(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("non-finite power sample at index {0}")]
    NonFinitePower(usize),

    #[error(
        "speed tracking diverged at t = {t}: |v - v_ref| = {error} exceeded {bound} for longer than {window} s"
    )]
    TrackingDivergence { t: f64, error: f64, bound: f64, window: f64 },

    #[error("similitude sanity check failed: {0}")]
    SanityCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical model rather than of its inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::NonFinitePower(_)
                | Error::TrackingDivergence { .. }
                | Error::SanityCheck(_)
        )
    }

    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
