use thiserror::Error;

/// Errors raised by the numerical laboratory.
///
/// The variants are grouped so that a front end can map them onto exit
/// statuses: structural and precondition problems are configuration errors,
/// convergence problems are numerical errors, and budget overflows are
/// resource errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A branch image is not a union of partition elements, or a branch is
    /// not injective on its element.
    #[error("structural error: {0}")]
    Structural(String),

    /// The map does not expand every vector after the `C1 = 1` normalization.
    #[error(
        "normalization error: minimal expansion {min_expansion} <= 1; \
         pass to an induced iterate (first-return map) before analysing this system"
    )]
    Normalization { min_expansion: f64 },

    /// A point lies outside the image of the requested inverse branch.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method failed to reach its tolerance.
    #[error("numerical error: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    /// A precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A measured quantity contradicts a bound derived from the measured constants.
    #[error("inconsistent constants: {0}")]
    Inconsistent(String),

    /// Word enumeration would exceed the configured budget.
    #[error(
        "resource budget exceeded: {words} words needed, budget is {budget}; \
         compose smaller powers instead (each composition adds one interpolation)"
    )]
    Budget { words: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numerical(what: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            what: what.into(),
            residual,
        }
    }
}
