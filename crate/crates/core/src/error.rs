use core::fmt;

use crate::events::ConditionId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its invariant.
    InvalidConfig { field: &'static str, reason: &'static str },
    /// Profile with zero (or non-finite) total power.
    DegenerateProfile,
    /// The condition function is identically zero for this bank.
    DegenerateCondition(ConditionId),
    /// Every regressor of the `p` fit vanished.
    FitDegenerate,
    /// Asked for more samples than there are events.
    SampleSize { requested: usize, available: usize },
    /// Malformed transform or pipeline input.
    InvalidInput(&'static str),
    /// Sampling rate too low for the highest frequency of interest.
    Aliasing { rate: f64, required: f64 },
    /// `modified_bank` was applied to something other than the default bank.
    NotDefaultBank,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig { field, reason } => write!(f, "invalid config `{field}`: {reason}"),
            Error::DegenerateProfile => f.write_str("degenerate beam profile: total power is zero"),
            Error::DegenerateCondition(c) => {
                write!(f, "condition {c} is identically zero for this mirror bank")
            }
            Error::FitDegenerate => f.write_str("cannot fit p: all product-term regressors vanish"),
            Error::SampleSize { requested, available } => {
                write!(f, "requested {requested} samples but only {available} are available")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Aliasing { rate, required } => {
                write!(f, "sampling rate {rate} Hz aliases; need more than {required} Hz")
            }
            Error::NotDefaultBank => f.write_str("modified bank requires the default bank as its base"),
        }
    }
}

impl core::error::Error for Error {}
