use thiserror::Error;

/// Errors raised by the common-randomness toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The joint density is singular (|rho| = 1), so density ratios do not exist.
    #[error("density ratio undefined for perfectly correlated sources; use the perfect-correlation scheme")]
    DegenerateDensity,

    /// A codebook configuration collapses to a trivial binning.
    #[error("degenerate codebook: {0}")]
    DegenerateCodebook(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("{what} did not converge (achieved tolerance {achieved:e})")]
    Numerical { what: &'static str, achieved: f64 },

    /// The codebook would exceed the scalar budget.
    #[error("codebook of {n1} x {n2} codewords of length {n} exceeds the budget of {budget} scalars")]
    BudgetExceeded { n1: u64, n2: u64, n: usize, budget: u64 },

    /// An operation was called on a source it does not apply to.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
