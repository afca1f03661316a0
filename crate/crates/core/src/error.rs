use alloc::string::String;
use core::fmt;

/// Errors raised by the interpolation library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A quadrature degree or polynomial degree beyond the configured cap.
    Capability {
        requested: usize,
        max: usize,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    NotOnBoundary {
        point: [f64; 2],
    },
    OutsideElement {
        point: [f64; 2],
    },
    InvalidArgument(String),
    /// The boundary potential failed to close at a vertex.
    InconsistentFlux {
        defect: f64,
    },
    /// A least-squares fit did not certify polynomial membership.
    MembershipViolation {
        residual: f64,
        threshold: f64,
    },
    SolverFailure {
        residual: f64,
        threshold: f64,
    },
    NonZeroMean {
        mean: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capability { requested, max } => {
                write!(f, "degree {requested} exceeds configured maximum {max}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range (len {len})")
            }
            Error::NotOnBoundary { point } => {
                write!(
                    f,
                    "point ({}, {}) is not on the boundary",
                    point[0], point[1]
                )
            }
            Error::OutsideElement { point } => {
                write!(
                    f,
                    "point ({}, {}) lies outside the element",
                    point[0], point[1]
                )
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InconsistentFlux { defect } => {
                write!(f, "boundary potential closure defect {defect:e}")
            }
            Error::MembershipViolation {
                residual,
                threshold,
            } => write!(
                f,
                "fit residual {residual:e} exceeds membership threshold {threshold:e}"
            ),
            Error::SolverFailure {
                residual,
                threshold,
            } => write!(f, "solver residual {residual:e} exceeds {threshold:e}"),
            Error::NonZeroMean { mean } => write!(f, "input has nonzero mean {mean:e}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
