use thiserror::Error;

/// Errors raised by the library.
///
/// Failed verifications are *not* errors: they are reported through
/// [`crate::report::Report`] so that callers see every metric. These variants
/// cover malformed input, exceeded caps and numerical breakdown.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} needs {requested}, which exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
