//! Steady-state predictions checked against closed-loop simulation.
//!
//! A mission is cut into hourly segments, each segment is optimized in
//! steady state, and the solutions are replayed as feed-forward decisions
//! and PI setpoints in the dynamic model. Mean power and the comfort metric
//! of both views are reported side by side.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annual::{segment_and_average, AnnualError, ExtractedControl, Segment};
use crate::dynamics::{
    comfort_metric, mean_power, CausalConfig, Controller, MissionTrace, ReplaySegment, Simulator,
    Trajectory,
};
use crate::steady::{ComfortRequirement, SteadySolver, SteadyStateSolution};

/// Length of the steady-state segments [s].
pub const SEGMENT_LENGTH: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub psi_min: f64,
    pub psi_max: f64,
    /// Duration-weighted mean of the segment solutions [W].
    pub steady_mean_power: f64,
    pub dynamic_mean_power: f64,
    /// Largest |PMV| among the segment solutions.
    pub steady_comfort: f64,
    pub dynamic_comfort: f64,
    pub segments: usize,
    pub infeasible_segments: usize,
}

impl ValidationRow {
    /// `|P_dyn − P_steady| / P_dyn`.
    pub fn power_gap(&self) -> f64 {
        (self.dynamic_mean_power - self.steady_mean_power).abs() / self.dynamic_mean_power.abs().max(1e-9)
    }

    /// Excess of the dynamic comfort metric over the box half-width.
    pub fn comfort_excess(&self) -> f64 {
        self.dynamic_comfort - 0.5 * (self.psi_max - self.psi_min)
    }
}

/// Segment solutions laid out to cover the whole mission: the first
/// segment starts at zero and the last one runs to the end, absorbing any
/// dropped short tail.
pub fn replay_segments(segments: &[Segment], solutions: &[SteadyStateSolution], duration: f64) -> Vec<ReplaySegment> {
    let n = segments.len();
    segments
        .iter()
        .zip(solutions)
        .enumerate()
        .map(|(i, (s, sol))| ReplaySegment {
            start: if i == 0 { 0.0 } else { s.start },
            end: if i + 1 == n { duration } else { segments[i + 1].start },
            solution: sol.clone(),
        })
        .collect()
}

/// Steady solutions of every segment plus the duration-weighted power.
pub fn steady_segments(
    trace: &MissionTrace,
    solver: &SteadySolver,
    req: &ComfortRequirement,
) -> Result<(Vec<Segment>, Vec<SteadyStateSolution>), AnnualError> {
    let segments = segment_and_average(trace, SEGMENT_LENGTH)?;
    let solutions = segments
        .iter()
        .map(|s| solver.optimize_sample(&s.disturbance, req))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((segments, solutions))
}

/// Replays the steady solutions of `req` in the dynamic model.
pub fn replay_mission(
    trace: &MissionTrace,
    solver: &SteadySolver,
    sim: &Simulator,
    req: &ComfortRequirement,
) -> Result<(ValidationRow, Trajectory), AnnualError> {
    let (segments, solutions) = steady_segments(trace, solver, req)?;
    let replay = replay_segments(&segments, &solutions, trace.duration());
    let traj = sim.simulate(trace, Controller::Replay(replay.clone()))?;
    let total: f64 = replay.iter().map(|r| r.end - r.start).sum();
    let steady_mean_power = replay
        .iter()
        .map(|r| (r.end - r.start) * r.solution.p_hvac)
        .sum::<f64>()
        / total;
    let row = ValidationRow {
        psi_min: req.psi_min,
        psi_max: req.psi_max,
        steady_mean_power,
        dynamic_mean_power: mean_power(&traj.points)?,
        steady_comfort: solutions.iter().map(|s| s.psi.abs()).fold(0.0, f64::max),
        dynamic_comfort: comfort_metric(&traj.points)?,
        segments: segments.len(),
        infeasible_segments: solutions.iter().filter(|s| !s.feasible).count(),
    };
    Ok((row, traj))
}

/// One validation row per comfort requirement.
pub fn validate_mission(
    trace: &MissionTrace,
    solver: &SteadySolver,
    sim: &Simulator,
    requirements: &[ComfortRequirement],
) -> Result<Vec<ValidationRow>, AnnualError> {
    requirements
        .par_iter()
        .map(|req| replay_mission(trace, solver, sim, req).map(|(row, _)| row))
        .collect()
}

/// Runs the mission under the extracted setpoint-profile controller.
pub fn causal_mission(
    trace: &MissionTrace,
    sim: &Simulator,
    control: &ExtractedControl,
    radiant_with_heating: bool,
) -> Result<Trajectory, AnnualError> {
    let ctrl = Controller::Causal(CausalConfig {
        profiles: control.profiles.clone(),
        curtains: control.curtains,
        radiant_with_heating,
    });
    Ok(sim.simulate(trace, ctrl)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{celsius_to_kelvin, DesignVariant, Disturbance, ModelConstants};
    use chrono::{DateTime, Duration};

    #[test]
    fn replay_covers_the_mission() {
        let t0 = DateTime::parse_from_rfc3339("2022-01-10T06:00:00+01:00").unwrap();
        let samples = (0..=7400)
            .step_by(10)
            .map(|s| {
                let mut d = Disturbance::quiescent(t0 + Duration::seconds(s), celsius_to_kelvin(0.0));
                d.n_pass = 15.0;
                d
            })
            .collect();
        let trace = MissionTrace::new("m", samples).unwrap();
        let c = ModelConstants::default().with_design(DesignVariant::hp());
        let solver = SteadySolver::new(c.clone()).unwrap();
        let req = ComfortRequirement::symmetric(1.0).unwrap();
        let (segs, sols) = steady_segments(&trace, &solver, &req).unwrap();
        assert_eq!(segs.len(), 2);
        let replay = replay_segments(&segs, &sols, trace.duration());
        assert_eq!(replay[0].start, 0.0);
        assert_eq!(replay[0].end, 3600.0);
        assert_eq!(replay[1].end, 7400.0);
    }
}
