use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or parameter is invalid (grid sizes, tolerances, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The obstacle height is at or above the solvability threshold.
    #[error("no solution: obstacle height {height} is not below the threshold c* = {threshold}")]
    NoSolution { height: f64, threshold: f64 },

    /// An iterative or quadrature procedure failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Two grid functions do not share the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A time integrator became unstable.
    #[error("instability: {0}")]
    Instability(String),

    /// The initial datum of a flow does not satisfy the admissibility conditions.
    #[error("inadmissible initial datum: {0}")]
    Inadmissible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
