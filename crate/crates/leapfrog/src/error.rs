use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("non-finite value in ODE state at t = {t}")]
    NonFinite { t: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("event not found before t = {0}")]
    EventNotFound(f64),

    /// A forcing term has energy on the kernel of `∂θ − ℋ`.
    #[error("degenerate mode: |f(l={l}, j={j})| = {magnitude:e} exceeds {tol:e}")]
    DegenerateMode { l: i64, j: i64, magnitude: f64, tol: f64 },

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("near-singular monodromy: {0}")]
    NearSingular(String),

    #[error("simulation aborted: {0}")]
    Simulation(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter(_))
    }
}
