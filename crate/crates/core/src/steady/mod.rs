//! Per-sample steady-state energy-comfort optimization.

mod newton;
mod residuals;
mod solver;

pub use crate::model::smooth_sqrt;
pub use newton::{newton, NewtonOptions, NewtonOutcome};
pub use residuals::{Candidate, Decoded, HeatSpec, Layout, BALANCE_SCALE};
pub use solver::{
    optimize_sample, prefer, ComfortRequirement, PmvEvaluator, Rejection, SteadySolver,
    SteadyStateSolution,
};

use crate::comfort::ComfortError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum SteadyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Comfort(#[from] ComfortError),
    #[error("invalid comfort requirement [{psi_min}, {psi_max}]")]
    InvalidRequirement { psi_min: f64, psi_max: f64 },
    #[error("no steady solution: {0}")]
    NoSolution(String),
}

#[cfg(test)]
mod tests;
