use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An operator that should be a density (or a Bloch vector that should
    /// map to one) is not.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A hierarchy member became non-finite or exceeded the norm guard.
    #[error("numerical blowup in auxiliary operator ({n1}, {n2}) at t = {time}")]
    Blowup { n1: usize, n2: usize, time: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn state(reason: impl Into<String>) -> Self {
        Error::InvalidState(reason.into())
    }
}
