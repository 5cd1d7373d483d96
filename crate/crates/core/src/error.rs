use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration hit its term cap before meeting its target.
    #[error("convergence error: {what} (best value {value:e}, bound {bound:e})")]
    Convergence { what: String, value: f64, bound: f64 },

    /// A log-space quantity left the representable range.
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// Cancellation in the alternating series destroyed more digits than the
    /// requested accuracy allows.
    #[error(
        "precision loss: rounding error estimate {estimate:e} exceeds target {target:e} \
         (value {value:e}); loosen the target or move closer to the bulk of the distribution"
    )]
    PrecisionLoss { value: f64, estimate: f64, target: f64 },

    /// A grid or quadrature rule was too coarse for the requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {x}")))
    }
}
