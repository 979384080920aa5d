//! Causal control laws distilled from steady-state solutions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::envelope::{fit_envelope, EnvelopeMethod, Side};
use super::AnnualError;
use crate::dynamics::{CurtainThresholds, ModeProfiles, SetpointProfile};
use crate::model::{kelvin_to_celsius, Disturbance, HvacMode};
use crate::steady::SteadyStateSolution;

/// Fits need at least this many points of a mode.
pub const MIN_FIT_POINTS: usize = 10;

/// Breakpoint candidates scanned for the cooling profile.
const BREAKPOINT_SCAN: usize = 81;

/// Fitted heating quadratic over ambient temperature (°C).
pub fn fit_heating_profile(points: &[(f64, f64)], method: EnvelopeMethod) -> Result<SetpointProfile, AnnualError> {
    check_points(points, "heating")?;
    let a = DMatrix::from_fn(points.len(), 3, |i, j| points[i].0.powi(j as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let th = fit_envelope(&a, &y, Side::Upper, method)?;
    let mut profile = SetpointProfile::Quadratic {
        a: th[0],
        b: th[1],
        c: th[2],
    };
    if method == EnvelopeMethod::ConstrainedLeastSquares {
        shift_into_envelope(&mut profile, points, Side::Upper);
    }
    Ok(profile)
}

/// Fitted two-piece linear cooling profile over ambient temperature (°C).
pub fn fit_cooling_profile(points: &[(f64, f64)], method: EnvelopeMethod) -> Result<SetpointProfile, AnnualError> {
    check_points(points, "cooling")?;
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    let lo = xs[xs.len() / 10];
    let hi = xs[xs.len() - 1 - xs.len() / 10];
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let mut best: Option<(f64, SetpointProfile)> = None;
    for k in 0..BREAKPOINT_SCAN {
        let bp = if hi > lo {
            lo + (hi - lo) * k as f64 / (BREAKPOINT_SCAN - 1) as f64
        } else {
            lo
        };
        let a = DMatrix::from_fn(points.len(), 3, |i, j| {
            let dx = points[i].0 - bp;
            match j {
                0 => 1.0,
                1 => dx.min(0.0),
                _ => dx.max(0.0),
            }
        });
        let Ok(th) = fit_envelope(&a, &y, Side::Lower, method) else {
            continue;
        };
        let sse = (&a * &th - &y).norm_squared();
        if best.as_ref().is_none_or(|(s, _)| sse < *s) {
            best = Some((
                sse,
                SetpointProfile::Hinge {
                    breakpoint: bp,
                    value: th[0],
                    slope_left: th[1],
                    slope_right: th[2],
                },
            ));
        }
        if hi <= lo {
            break;
        }
    }
    let (_, mut profile) = best.ok_or_else(|| AnnualError::Fit("no cooling breakpoint fitted".into()))?;
    if method == EnvelopeMethod::ConstrainedLeastSquares {
        shift_into_envelope(&mut profile, points, Side::Lower);
    }
    Ok(profile)
}

fn check_points(points: &[(f64, f64)], mode: &'static str) -> Result<(), AnnualError> {
    if points.len() < MIN_FIT_POINTS {
        return Err(AnnualError::TooFewPoints {
            mode,
            count: points.len(),
        });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(AnnualError::InvalidInput(format!("non-finite {mode} point")));
    }
    Ok(())
}

/// Moves the profile's offset until the envelope property holds exactly
/// under the profile's own evaluation; removes round-off of the solver.
fn shift_into_envelope(profile: &mut SetpointProfile, points: &[(f64, f64)], side: Side) {
    for _ in 0..64 {
        let excess = points
            .iter()
            .map(|&(x, y)| match side {
                Side::Upper => y - profile.eval_celsius(x),
                Side::Lower => profile.eval_celsius(x) - y,
            })
            .fold(0.0, f64::max);
        if excess <= 0.0 {
            return;
        }
        let step = excess.max(f64::EPSILON * 64.0) * if side == Side::Upper { 1.0 } else { -1.0 };
        match profile {
            SetpointProfile::Quadratic { a, .. } => *a += step,
            SetpointProfile::Hinge { value, .. } => *value += step,
            SetpointProfile::Constant { value } => *value += step,
        }
    }
}

/// Threshold on a temperature difference separating curtain-on from
/// curtain-off samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub threshold: f64,
    pub misclassification: f64,
    pub samples: usize,
    /// Set when every sample has the same decision: `Some(true)` if all
    /// are on. The threshold then only marks the edge of the data.
    pub single_class: Option<bool>,
}

/// Threshold minimizing misclassification of `on = Δ > θ` over
/// `(Δ, on)` pairs; ties resolve to the lowest threshold.
pub fn fit_threshold(data: &[(f64, bool)]) -> Result<ThresholdFit, AnnualError> {
    if data.is_empty() {
        return Err(AnnualError::TooFewPoints {
            mode: "curtain",
            count: 0,
        });
    }
    let mut sorted: Vec<(f64, bool)> = data.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let on_total = sorted.iter().filter(|d| d.1).count();
    if on_total == 0 || on_total == n {
        log::warn!("curtain decisions are all {}", if on_total == 0 { "off" } else { "on" });
        let threshold = if on_total == 0 { sorted[n - 1].0 } else { sorted[0].0 - 1e-6 };
        return Ok(ThresholdFit {
            threshold,
            misclassification: 0.0,
            samples: n,
            single_class: Some(on_total == n),
        });
    }
    // Threshold below everything: every "off" is misclassified.
    let mut errors = n - on_total;
    let mut best = (errors, sorted[0].0 - 1e-6);
    let mut i = 0;
    while i < n {
        let x = sorted[i].0;
        while i < n && sorted[i].0 == x {
            if sorted[i].1 {
                errors += 1;
            } else {
                errors -= 1;
            }
            i += 1;
        }
        let theta = if i < n { 0.5 * (x + sorted[i].0) } else { x };
        if errors < best.0 {
            best = (errors, theta);
        }
    }
    Ok(ThresholdFit {
        threshold: best.1,
        misclassification: best.0 as f64 / n as f64,
        samples: n,
        single_class: None,
    })
}

/// Heating and cooling curtain thresholds from solutions with open doors.
pub fn fit_curtain_thresholds(
    samples: &[(Disturbance, SteadyStateSolution)],
) -> Result<(ThresholdFit, ThresholdFit), AnnualError> {
    let pick = |mode: HvacMode| -> Vec<(f64, bool)> {
        samples
            .iter()
            .filter(|(d, s)| s.feasible && s.inputs.mode == mode && d.door_fraction > 0.0)
            .map(|(d, s)| (mode.sign() * (s.state.t_cab - d.t_amb), s.inputs.air_curtain))
            .collect()
    };
    Ok((fit_threshold(&pick(HvacMode::Heating))?, fit_threshold(&pick(HvacMode::Cooling))?))
}

/// Setpoint profiles and curtain thresholds for a causal controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedControl {
    pub profiles: ModeProfiles,
    pub curtains: CurtainThresholds,
    pub heating_fit: ThresholdFit,
    pub cooling_fit: ThresholdFit,
    /// Ambient range of the fitted points [°C].
    pub ambient_range: (f64, f64),
}

/// Equilibrium `(ambient, cabin)` points in °C of feasible solutions in `mode`.
pub fn setpoint_points(samples: &[(Disturbance, SteadyStateSolution)], mode: HvacMode) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|(_, s)| s.feasible && s.inputs.mode == mode)
        .map(|(d, s)| (kelvin_to_celsius(d.t_amb), kelvin_to_celsius(s.state.t_cab)))
        .collect()
}

/// Fits both profiles and thresholds; curtain thresholds fall back to
/// "never" when the design has no curtains in the data.
pub fn extract_control(
    samples: &[(Disturbance, SteadyStateSolution)],
    method: EnvelopeMethod,
    hysteresis: f64,
) -> Result<ExtractedControl, AnnualError> {
    let heating = fit_heating_profile(&setpoint_points(samples, HvacMode::Heating), method)?;
    let cooling = fit_cooling_profile(&setpoint_points(samples, HvacMode::Cooling), method)?;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (d, _)| {
        let t = kelvin_to_celsius(d.t_amb);
        (lo.min(t), hi.max(t))
    });
    let profiles = ModeProfiles {
        heating,
        cooling,
        hysteresis,
    };
    profiles.validate(lo, hi)?;
    let (heating_fit, cooling_fit) = fit_curtain_thresholds(samples)?;
    Ok(ExtractedControl {
        profiles,
        curtains: CurtainThresholds {
            heating: heating_fit.threshold,
            cooling: cooling_fit.threshold,
        },
        heating_fit,
        cooling_fit,
        ambient_range: (lo, hi),
    })
}
