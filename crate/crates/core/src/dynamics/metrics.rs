use super::sim::TrajectoryPoint;
use super::SimError;

/// Half-width of the comfort smoothing window [s].
pub const COMFORT_HALF_WINDOW: f64 = 450.0;

/// Time-averaged HVAC power over the trajectory, trapezoidal rule [W].
pub fn mean_power(points: &[TrajectoryPoint]) -> Result<f64, SimError> {
    let times: Vec<f64> = points.iter().map(|p| p.t).collect();
    let values: Vec<f64> = points.iter().map(|p| p.p_hvac).collect();
    time_average(&times, &values)
}

/// Trapezoidal time average of `values` sampled at `times`.
pub fn time_average(times: &[f64], values: &[f64]) -> Result<f64, SimError> {
    match values.len() {
        0 => Err(SimError::EmptyTrajectory),
        1 => Ok(values[0]),
        n => {
            let span = times[n - 1] - times[0];
            if !(span > 0.0) {
                return Err(SimError::EmptyTrajectory);
            }
            let mut integral = 0.0;
            for i in 1..n {
                integral += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
            }
            Ok(integral / span)
        }
    }
}

/// Centered moving average over `[t − half, t + half]`, shrinking at the edges.
pub fn moving_average(times: &[f64], values: &[f64], half: f64) -> Vec<f64> {
    let n = values.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + values[i];
    }
    let (mut lo, mut hi) = (0, 0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        while times[lo] < times[i] - half {
            lo += 1;
        }
        while hi < n && times[hi] <= times[i] + half {
            hi += 1;
        }
        out.push((prefix[hi] - prefix[lo]) / (hi - lo) as f64);
    }
    out
}

/// Largest magnitude of the 15-minute smoothed PMV over instants with at
/// least one passenger on board.
pub fn comfort_metric(points: &[TrajectoryPoint]) -> Result<f64, SimError> {
    if points.iter().any(|p| p.psi.is_nan()) {
        return Err(SimError::MetricUndefined("PMV not recorded".into()));
    }
    let times: Vec<f64> = points.iter().map(|p| p.t).collect();
    let psi: Vec<f64> = points.iter().map(|p| p.psi).collect();
    let smooth = moving_average(&times, &psi, COMFORT_HALF_WINDOW);
    points
        .iter()
        .zip(&smooth)
        .filter(|(p, _)| p.n_pass >= 1.0)
        .map(|(_, s)| s.abs())
        .reduce(f64::max)
        .ok_or_else(|| SimError::MetricUndefined("no passenger on board".into()))
}
