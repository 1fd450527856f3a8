//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not reach the requested tolerance: {0}")]
    Quadrature(String),

    #[error("root-finding failed: {0}")]
    RootFind(String),

    #[error("degenerate nonlinearity: {0}")]
    DegenerateNonlinearity(String),

    #[error("{0} is not invertible: {1}")]
    NotInvertible(&'static str, String),

    #[error("integrand returned a negative or non-finite value at {at}: {value}")]
    BadIntegrand { at: f64, value: f64 },

    #[error("Picard iteration did not converge within {max_iter} iterations (last residuals: {history:?})")]
    NonConvergence { max_iter: usize, history: Vec<f64> },

    #[error("finite-radius blow-up detected: solution exceeded the overflow guard near r = {gamma_estimate}")]
    FiniteBlowup { gamma_estimate: f64 },

    #[error("ODE integration step size collapsed at r = {at}")]
    StepCollapse { at: f64 },

    #[error("solver integrity check failed: {0}")]
    SolverIntegrity(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("monotone iteration escaped the sub/supersolution bracket: {0}")]
    BracketEscape(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
