//! Year-round evaluation, Pareto sweeps and control-law extraction.

pub mod envelope;
mod extract;
mod segment;
mod sweep;
mod weights;

pub use envelope::{EnvelopeMethod, Side};
pub use extract::{
    extract_control, fit_cooling_profile, fit_curtain_thresholds, fit_heating_profile,
    fit_threshold, setpoint_points, ExtractedControl, ThresholdFit, MIN_FIT_POINTS,
};
pub use segment::{segment_and_average, Sample, Segment, MIN_SEGMENT};
pub use sweep::{
    dominated_pairs, is_looser, pareto_sweep, solve_all, summarize, ParetoRow, SweepCell,
    BOUND_ACTIVE_TOL,
};
pub use weights::{annual_mean, days_in_month, sample_weights, Weights, YearLength};

use crate::dynamics::SimError;
use crate::steady::SteadyError;

#[derive(Debug, thiserror::Error)]
pub enum AnnualError {
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("sample {id}: {source}")]
    Sample { id: String, source: SteadyError },
    #[error("{values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },
    #[error("only {count} {mode} points, fit refused")]
    TooFewPoints { mode: &'static str, count: usize },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
