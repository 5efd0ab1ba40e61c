use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The integrand produced a NaN or infinity at an interior node.
    #[error("integrand is not finite at x = {abscissa:e}")]
    NonFinite { abscissa: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The spectral measure does not span the space, or a direction has
    /// vanishing scale.
    #[error("degenerate spectral measure: {0}")]
    Degenerate(String),

    /// tan(πα/2) is too large to form a parameterization shift.
    #[error("alpha = {alpha} is too close to 1 for a shift conversion")]
    NearUnitAlpha { alpha: f64 },

    #[error("route {route} is not available: {reason}")]
    Route { route: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
