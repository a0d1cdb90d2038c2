use thiserror::Error;

/// Errors raised by the evaluators, solvers and the sweep front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("quadrature did not reach tolerance {tolerance:e} within {refinements} refinements (estimate {estimate:e})")]
    NonConvergence {
        tolerance: f64,
        refinements: usize,
        estimate: f64,
    },

    #[error("bracketing violation: f({lo}) = {f_lo:e} and f({hi}) = {f_hi:e} have the same sign")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
