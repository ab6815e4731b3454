use thiserror::Error;

/// Errors raised by every kernelscope operation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A bound exceeds what a table or configured cap can hold.
    #[error("capacity: {0}")]
    Capacity(String),
    /// An argument lies outside the operation's domain.
    #[error("domain: {0}")]
    Domain(String),
    /// An index-style request ran past available data (e.g. nth prime beyond the sieve).
    #[error("range: {0}")]
    Range(String),
    /// A profile verdict did not permit the requested construction.
    #[error("verdict: {0}")]
    Verdict(String),
    /// Internal consistency check failed after construction.
    #[error("construction: {0}")]
    Construction(String),
    /// A numerical routine failed to converge or meet its residual.
    #[error("numeric: {0}")]
    Numeric(String),
    /// Requested tolerance cannot be reached in the working range.
    #[error("precision: {0}")]
    Precision(String),
    /// The zero-counting contour passed too close to a zero.
    #[error("contour: {0}")]
    Contour(String),
    /// Malformed import data.
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// True for errors that come from resource or precision limits rather than bad input.
    pub fn is_capacity_like(&self) -> bool {
        matches!(
            self,
            Error::Capacity(_) | Error::Precision(_) | Error::Numeric(_) | Error::Contour(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
