use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("length mismatch in {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("malformed waveform dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(what: &'static str, detail: impl Into<String>) -> Result<T> {
    Err(Error::Invalid {
        what,
        detail: detail.into(),
    })
}
