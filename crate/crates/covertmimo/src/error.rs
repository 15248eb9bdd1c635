//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Errors produced by channel construction, divergence evaluation, the
/// covariance solvers and the Monte Carlo drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    InvalidArgument(String),
    /// A `SystemConfig` field is out of range.
    InvalidConfig(String),
    /// The channel has no usable eigenmode for the requested operation.
    DegenerateChannel(String),
    /// Beamforming geometry is degenerate (e.g. parallel directions).
    DegenerateGeometry(String),
    /// The requested closed form does not exist in this parameter regime.
    InvalidRegime(String),
    /// An iterative solver ran out of iterations; carries the last residual.
    Convergence { context: String, residual: f64 },
    /// A dense linear algebra kernel failed to converge or lost definiteness.
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::DegenerateChannel(msg) => write!(f, "degenerate channel: {msg}"),
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
            Error::InvalidRegime(msg) => write!(f, "invalid regime: {msg}"),
            Error::Convergence { context, residual } => {
                write!(f, "no convergence in {context} (last residual {residual:e})")
            }
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
