use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// The reactivity sits on (or within tolerance of) a pole of the capacitance.
    #[error("pole error: kappa = {kappa} is within tolerance of the pole -mu = {pole}")]
    Pole { kappa: f64, pole: f64 },
    /// A root could not be bracketed in the requested interval.
    #[error("bracketing failure: {0}")]
    Bracketing(String),
    /// An iterative or spectral computation did not deliver what was asked.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// Two patch centers are closer than the separation threshold.
    #[error("separation violation: patches {i} and {j} are {distance} apart (threshold {threshold})")]
    Separation { i: usize, j: usize, distance: f64, threshold: f64 },
    /// Structurally invalid input (bad layout, wrong sizes, unsupported option).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A feature of the problem the theory does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
    /// A serialized file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Pole { .. } | Error::Bracketing(_) | Error::Convergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
