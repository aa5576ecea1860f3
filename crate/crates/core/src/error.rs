use alloc::boxed::Box;
use core::fmt;

/// Errors raised by the simulation and optimization routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A chain needs at least two sites and exactly `n_sites - 1` couplings.
    InvalidChain { n_sites: usize, n_couplings: usize },
    /// A 1-based site index outside `1..=n_sites`.
    InvalidSite { index: usize, n_sites: usize },
    /// Operands of incompatible dimension.
    Shape { expected: usize, found: usize },
    /// Non-finite values appeared while integrating.
    Divergence { step: usize, time: f64 },
    /// Pulse evaluated outside its horizon.
    Domain { t: f64, horizon: f64 },
    /// A scalar parameter violates its documented range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Finite-difference probe failed for one coordinate.
    Gradient { coordinate: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidChain { n_sites, n_couplings } => write!(
                f,
                "invalid chain: {n_sites} sites with {n_couplings} couplings (need at least 2 sites and n_sites - 1 couplings)"
            ),
            Error::InvalidSite { index, n_sites } => {
                write!(f, "site index {index} outside 1..={n_sites}")
            }
            Error::Shape { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Divergence { step, time } => {
                write!(f, "integration diverged at step {step} (t = {time})")
            }
            Error::Domain { t, horizon } => {
                write!(f, "time {t} outside pulse horizon [0, {horizon}]")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for parameter `{name}`")
            }
            Error::Gradient { coordinate, source } => {
                write!(f, "gradient probe failed for coordinate {coordinate}: {source}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Gradient { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
