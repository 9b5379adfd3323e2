//! Error type shared across the crate.

/// Errors produced by encoders, decoders, the channel and the sweep harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A map or decoder input fell outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched dimensions, invalid parameters, or a spec/family mismatch.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A simulation or CLI configuration failed validation.
    #[error("configuration error: {0}")]
    Config(String),
    /// I/O failure while reading configuration or writing results.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
