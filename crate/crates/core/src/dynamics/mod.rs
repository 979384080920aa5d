//! Closed-loop simulation of the dynamic model.

mod controller;
mod metrics;
mod sim;

pub use controller::{
    curtain_rule, mode_fsm_step, Actuation, CausalConfig, Controller, ControllerState,
    CurtainThresholds, Decision, ModeProfiles, PiController, ReplaySegment, SetpointProfile,
};
pub use metrics::{comfort_metric, mean_power, moving_average, time_average, COMFORT_HALF_WINDOW};
pub use sim::{
    depot_init, EnergyAudit, MissionTrace, SimOptions, Simulator, Trajectory, TrajectoryPoint,
};

use crate::comfort::ComfortError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Comfort(#[from] ComfortError),
    #[error("state left the plausible range at t = {t} s: {source}")]
    Implausible { t: f64, source: ModelError },
    #[error("mission trace has no samples")]
    EmptyTrace,
    #[error("timestamps not strictly increasing at sample {0}")]
    NonMonotonicTime(usize),
    #[error("no controller segment covers t = {0} s")]
    MissingSegment(f64),
    #[error("invalid controller: {0}")]
    InvalidController(String),
    #[error("invalid simulation options: {0}")]
    InvalidOptions(String),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("metric undefined: {0}")]
    MetricUndefined(String),
}
