use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of a function.
    #[error("{function}: argument {value} outside domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// Invalid ensemble parameters, disk configuration or options.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An iterative method exhausted its iteration budget.
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    /// Requested cumulant order is not supported.
    #[error("cumulant order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    /// Too few Monte Carlo samples for the requested estimate.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    /// b = n1/n2 needs n1 or n2 above the configured cap.
    #[error("rational representation {n1}/{n2} exceeds cap {cap}")]
    CapExceeded { n1: u64, n2: u64, cap: u64 },
    /// Least-squares basis is numerically rank deficient.
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    /// Every residual is dominated by numerical noise.
    #[error("all residuals below the noise floor; no rate can be fitted")]
    BelowNoise,
    /// Numerical corruption detected (e.g. a non-positive log argument).
    #[error("internal numerical fault: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
