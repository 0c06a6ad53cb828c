use thiserror::Error;

/// Errors produced by the solvers, the analytic formulas and the sweep driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("observation {observation} has zero likelihood under action {action} at belief {beta}")]
    ZeroLikelihood {
        beta: f64,
        action: i8,
        observation: u8,
    },

    #[error("no convergence after {max_sweeps} sweeps (last residual {residual:e})")]
    IterationLimit { max_sweeps: usize, residual: f64 },

    #[error("theta = {0} is outside the range covered by the closed-form solution")]
    DegenerateTheta(f64),

    #[error("information ratio undefined: delta = {delta:e} with zero information")]
    DegenerateRatio { delta: f64, info: f64 },

    #[error("policy never switches action")]
    NoBoundary,

    #[error("policy switches action {count} times")]
    MultipleBoundaries { count: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

pub(crate) fn check_discount(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "discount must lie in [0, 1)",
        });
    }
    Ok(())
}
