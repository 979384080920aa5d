use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::{celsius_to_kelvin, kelvin_to_celsius, HvacMode};
use crate::steady::SteadyStateSolution;

/// Proportional-integral controller on the cabin temperature with
/// conditional integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiController {
    /// Proportional gain [W/K].
    pub kp: f64,
    /// Integral time [s].
    pub ti: f64,
    /// Accumulated error [K s].
    pub integral: f64,
    /// Whether the last output hit a limit.
    pub saturated: bool,
}

impl Default for PiController {
    fn default() -> Self {
        Self::new(2000.0, 100.0)
    }
}

impl PiController {
    pub fn new(kp: f64, ti: f64) -> Self {
        Self {
            kp,
            ti,
            integral: 0.0,
            saturated: false,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.saturated = false;
    }

    /// Output in `[lo, hi]` for the error `setpoint - measured`. The
    /// integrator only advances when the resulting output stays inside
    /// the limits.
    pub fn step(&mut self, setpoint: f64, measured: f64, dt: f64, lo: f64, hi: f64) -> f64 {
        let e = setpoint - measured;
        let candidate = self.integral + e * dt;
        let raw = self.kp * (e + candidate / self.ti);
        if raw >= lo && raw <= hi {
            self.integral = candidate;
            self.saturated = false;
            return raw;
        }
        self.saturated = true;
        (self.kp * (e + self.integral / self.ti)).clamp(lo, hi)
    }

    /// Output limits of the signed unit power in `mode`.
    pub fn limits(mode: HvacMode, p_max: f64) -> (f64, f64) {
        match mode {
            HvacMode::Heating => (0.0, p_max),
            HvacMode::Cooling => (-p_max, 0.0),
            HvacMode::Passive => (0.0, 0.0),
        }
    }
}

/// Cabin setpoint as a function of ambient temperature, coefficients in °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetpointProfile {
    Constant { value: f64 },
    /// `a + b·T + c·T²`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// Two linear pieces joined continuously at `breakpoint`:
    /// `value + slope_left·(T − breakpoint)` below, `slope_right` above.
    Hinge {
        breakpoint: f64,
        value: f64,
        slope_left: f64,
        slope_right: f64,
    },
}

impl SetpointProfile {
    pub fn eval_celsius(&self, t_amb: f64) -> f64 {
        match *self {
            SetpointProfile::Constant { value } => value,
            SetpointProfile::Quadratic { a, b, c } => a + b * t_amb + c * t_amb * t_amb,
            SetpointProfile::Hinge {
                breakpoint,
                value,
                slope_left,
                slope_right,
            } => {
                let dt = t_amb - breakpoint;
                value + if dt < 0.0 { slope_left * dt } else { slope_right * dt }
            }
        }
    }

    /// Setpoint [K] at ambient temperature [K].
    pub fn eval(&self, t_amb: f64) -> f64 {
        celsius_to_kelvin(self.eval_celsius(kelvin_to_celsius(t_amb)))
    }
}

/// Heating and cooling setpoint profiles with the hysteresis half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfiles {
    pub heating: SetpointProfile,
    pub cooling: SetpointProfile,
    /// Half-width of the switching band [K].
    pub hysteresis: f64,
}

impl ModeProfiles {
    /// Rejects profiles whose heating setpoint exceeds the cooling setpoint
    /// anywhere on `[t_lo, t_hi]` (°C).
    pub fn validate(&self, t_lo: f64, t_hi: f64) -> Result<(), SimError> {
        if !(self.hysteresis >= 0.0) {
            return Err(SimError::InvalidController(format!(
                "hysteresis {}",
                self.hysteresis
            )));
        }
        let n = 400;
        for i in 0..=n {
            let t = t_lo + (t_hi - t_lo) * i as f64 / n as f64;
            let (h, c) = (self.heating.eval_celsius(t), self.cooling.eval_celsius(t));
            if !(h.is_finite() && c.is_finite()) || h > c {
                return Err(SimError::InvalidController(format!(
                    "heating setpoint {h:.2} °C above cooling setpoint {c:.2} °C at ambient {t:.1} °C"
                )));
            }
        }
        Ok(())
    }
}

/// Hysteresis state machine for the operating mode. Heating and cooling
/// are only entered from and left to passive.
pub fn mode_fsm_step(current: HvacMode, t_cab: f64, t_amb: f64, p: &ModeProfiles) -> HvacMode {
    let heat = p.heating.eval(t_amb);
    let cool = p.cooling.eval(t_amb);
    match current {
        HvacMode::Passive if t_cab < heat - p.hysteresis => HvacMode::Heating,
        HvacMode::Passive if t_cab > cool + p.hysteresis => HvacMode::Cooling,
        HvacMode::Heating if t_cab > heat + p.hysteresis => HvacMode::Passive,
        HvacMode::Cooling if t_cab < cool - p.hysteresis => HvacMode::Passive,
        m => m,
    }
}

/// Temperature-difference thresholds for switching the air curtains on [K].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurtainThresholds {
    pub heating: f64,
    pub cooling: f64,
}

/// Air curtains are on in heating when the cabin is warmer than ambient by
/// more than the heating threshold, mirrored in cooling.
pub fn curtain_rule(mode: HvacMode, t_cab: f64, t_amb: f64, th: &CurtainThresholds) -> bool {
    match mode {
        HvacMode::Heating => t_cab - t_amb > th.heating,
        HvacMode::Cooling => t_amb - t_cab > th.cooling,
        HvacMode::Passive => false,
    }
}

/// Discrete decisions of a controller for one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub mode: HvacMode,
    pub air_curtain: bool,
    pub radiant: bool,
    pub actuation: Actuation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Actuation {
    /// PI tracking of a cabin temperature [K].
    Track(f64),
    /// Constant unit power [W].
    Fixed(f64),
    Off,
}

/// Setpoint-profile controller usable online: mode from the state
/// machine, curtains from the thresholds, radiant panels with heating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalConfig {
    pub profiles: ModeProfiles,
    pub curtains: CurtainThresholds,
    /// Switch the radiant panels on whenever heating, if installed.
    pub radiant_with_heating: bool,
}

/// One steady solution applied from `start` (seconds from mission start).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySegment {
    pub start: f64,
    pub end: f64,
    pub solution: SteadyStateSolution,
}

/// Controller variants of the closed-loop simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    /// Hourly steady-state solutions as feed-forward decisions and setpoints.
    Replay(Vec<ReplaySegment>),
    Causal(CausalConfig),
    /// Constant inputs, no feedback.
    Fixed {
        mode: HvacMode,
        p_hc: f64,
        air_curtain: bool,
        radiant: bool,
    },
}

/// Controller with its internal state during a run.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub controller: Controller,
    pub mode: HvacMode,
    segment: usize,
}

impl ControllerState {
    pub fn new(controller: Controller) -> Result<Self, SimError> {
        if let Controller::Replay(segments) = &controller {
            if segments.is_empty() {
                return Err(SimError::MissingSegment(0.0));
            }
            for w in segments.windows(2) {
                if w[1].start != w[0].end {
                    return Err(SimError::MissingSegment(w[0].end));
                }
            }
        }
        Ok(Self {
            controller,
            mode: HvacMode::Passive,
            segment: 0,
        })
    }

    /// Decision at time `t` [s from start] for the measured cabin temperature.
    pub fn decide(&mut self, t: f64, t_cab: f64, t_amb: f64) -> Result<Decision, SimError> {
        match &self.controller {
            Controller::Fixed {
                mode,
                p_hc,
                air_curtain,
                radiant,
            } => Ok(Decision {
                mode: *mode,
                air_curtain: *air_curtain,
                radiant: *radiant,
                actuation: if *mode == HvacMode::Passive {
                    Actuation::Off
                } else {
                    Actuation::Fixed(*p_hc)
                },
            }),
            Controller::Replay(segments) => {
                while self.segment + 1 < segments.len() && t >= segments[self.segment].end {
                    self.segment += 1;
                }
                let seg = &segments[self.segment];
                if t < seg.start || t > seg.end {
                    return Err(SimError::MissingSegment(t));
                }
                let s = &seg.solution;
                self.mode = s.inputs.mode;
                Ok(Decision {
                    mode: s.inputs.mode,
                    air_curtain: s.inputs.air_curtain,
                    radiant: s.inputs.radiant,
                    actuation: if s.inputs.mode == HvacMode::Passive {
                        Actuation::Off
                    } else {
                        Actuation::Track(s.state.t_cab)
                    },
                })
            }
            Controller::Causal(cfg) => {
                self.mode = mode_fsm_step(self.mode, t_cab, t_amb, &cfg.profiles);
                let actuation = match self.mode {
                    HvacMode::Heating => Actuation::Track(cfg.profiles.heating.eval(t_amb)),
                    HvacMode::Cooling => Actuation::Track(cfg.profiles.cooling.eval(t_amb)),
                    HvacMode::Passive => Actuation::Off,
                };
                Ok(Decision {
                    mode: self.mode,
                    air_curtain: curtain_rule(self.mode, t_cab, t_amb, &cfg.curtains),
                    radiant: cfg.radiant_with_heating && self.mode == HvacMode::Heating,
                    actuation,
                })
            }
        }
    }
}
