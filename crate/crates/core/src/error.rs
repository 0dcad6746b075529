use thiserror::Error;

/// Errors raised by the parking-function toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid permutation word: {0}")]
    InvalidPermutation(String),

    #[error("invalid Lehmer code: entry {index} = {value} is outside [1, {index}]")]
    InvalidLehmerCode { index: usize, value: usize },

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("floating-point overflow while computing {0}; use the log-domain variant")]
    Overflow(&'static str),

    #[error("n = {n} exceeds the enumeration guard n <= {max}")]
    TooLarge { n: usize, max: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("incompatible experiment configuration: {0}")]
    Incompatible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::OutOfRange {
            what,
            value: value as i64,
            lo: lo as i64,
            hi: hi as i64,
        });
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive number",
        });
    }
    Ok(())
}
