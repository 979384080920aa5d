use chrono::{DateTime, Duration, FixedOffset};
use serde::{Deserialize, Serialize};

use super::controller::{Actuation, Controller, ControllerState, PiController};
use super::SimError;
use crate::comfort::{CabinComfort, ClothingModel, ComfortContext};
use crate::model::{
    air_curtain_power, boundary_flow, boundary_throughput, celsius_to_kelvin, heat_flows,
    reservoir_balances, solar_altitude, ControlInput, Disturbance, DoorModel, HvacMode,
    ModelConstants, ThermalState,
};

/// Time-ordered disturbance samples of one bus mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionTrace {
    pub id: String,
    pub samples: Vec<Disturbance>,
}

impl MissionTrace {
    pub fn new(id: impl Into<String>, samples: Vec<Disturbance>) -> Result<Self, SimError> {
        if samples.is_empty() {
            return Err(SimError::EmptyTrace);
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].timestamp <= w[0].timestamp {
                return Err(SimError::NonMonotonicTime(i + 1));
            }
        }
        for d in &samples {
            d.validate()?;
        }
        Ok(Self {
            id: id.into(),
            samples,
        })
    }

    pub fn start(&self) -> DateTime<FixedOffset> {
        self.samples[0].timestamp
    }

    /// Seconds from the first to the last sample.
    pub fn duration(&self) -> f64 {
        self.offset_of(&self.samples[self.samples.len() - 1])
    }

    /// Seconds from mission start to sample `d`.
    pub fn offset_of(&self, d: &Disturbance) -> f64 {
        (d.timestamp - self.start()).num_milliseconds() as f64 / 1000.0
    }

    /// Sample intervals longer than `max_gap` seconds, as `(index, length)`.
    pub fn gaps(&self, max_gap: f64) -> Vec<(usize, f64)> {
        self.samples
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| {
                let dt = (w[1].timestamp - w[0].timestamp).num_milliseconds() as f64 / 1000.0;
                (dt > max_gap).then_some((i, dt))
            })
            .collect()
    }
}

/// Sample-and-hold lookup of a trace during a forward sweep in time.
struct HoldCursor<'a> {
    trace: &'a MissionTrace,
    index: usize,
}

impl<'a> HoldCursor<'a> {
    fn at(&mut self, t: f64) -> Disturbance {
        let s = &self.trace.samples;
        while self.index + 1 < s.len() && self.trace.offset_of(&s[self.index + 1]) <= t {
            self.index += 1;
        }
        let mut d = s[self.index].clone();
        d.timestamp = self.trace.start() + Duration::milliseconds((t * 1000.0).round() as i64);
        d
    }
}

/// Initial state after leaving the depot: every temperature halfway between
/// ambient and 20 °C.
pub fn depot_init(t_amb: f64) -> ThermalState {
    let base = celsius_to_kelvin(20.0);
    ThermalState::isothermal((t_amb - base) * 0.5 + base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    /// Integration step [s]; must divide the control period.
    pub dt: f64,
    /// Controller and recording period [s].
    pub control_period: f64,
    pub kp: f64,
    pub ti: f64,
    /// Limit on the unit power used when the design sets none [W].
    pub unlimited_power: f64,
    /// Evaluate the cabin-average PMV at every record.
    pub record_pmv: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 1.0,
            control_period: 1.0,
            kp: 2000.0,
            ti: 100.0,
            unlimited_power: 50_000.0,
            record_pmv: true,
        }
    }
}

/// One recorded instant; inputs are those applied over the following period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Seconds since mission start.
    pub t: f64,
    pub state: ThermalState,
    pub inputs: ControlInput,
    /// PI setpoint [K], NaN when not tracking.
    pub setpoint: f64,
    pub t_amb: f64,
    pub n_pass: f64,
    pub door_fraction: f64,
    pub p_aircurt: f64,
    pub p_hvac: f64,
    /// Cabin-average PMV, NaN when not evaluated.
    pub psi: f64,
}

/// Stored-energy change against the integrated boundary flows [J].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub stored_change: f64,
    /// Boundary flows integrated with the RK4 stage weights.
    pub boundary_rk4: f64,
    /// Boundary flows integrated with the trapezoidal rule per step.
    pub boundary_trapezoid: f64,
    /// Integral of the magnitudes of all boundary flows.
    pub gross_throughput: f64,
}

impl EnergyAudit {
    /// `|ΔE − ∫boundary|` relative to the gross throughput, trapezoidal.
    pub fn relative_residual(&self) -> f64 {
        (self.stored_change - self.boundary_trapezoid).abs() / self.gross_throughput.max(1e-300)
    }

    pub fn relative_residual_rk4(&self) -> f64 {
        (self.stored_change - self.boundary_rk4).abs() / self.gross_throughput.max(1e-300)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub mission_id: String,
    pub start: DateTime<FixedOffset>,
    pub points: Vec<TrajectoryPoint>,
    pub audit: EnergyAudit,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// Closed-loop simulator of the full dynamic model.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub constants: ModelConstants,
    pub cabin: CabinComfort,
    pub clothing: ClothingModel,
    pub options: SimOptions,
}

struct Derivative {
    rates: [f64; 6],
    boundary: f64,
    throughput: f64,
}

impl Simulator {
    pub fn new(constants: ModelConstants) -> Result<Self, SimError> {
        constants.validate()?;
        let cabin = CabinComfort::sampled(&constants)?;
        Ok(Self {
            constants,
            cabin,
            clothing: ClothingModel::default(),
            options: SimOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SimOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_cabin(mut self, cabin: CabinComfort) -> Self {
        self.cabin = cabin;
        self
    }

    pub fn with_clothing(mut self, clothing: ClothingModel) -> Self {
        self.clothing = clothing;
        self
    }

    fn derivative(
        &self,
        s: &ThermalState,
        u: &ControlInput,
        d: &Disturbance,
        beta: f64,
    ) -> Result<Derivative, SimError> {
        let c = &self.constants;
        let f = heat_flows(s, u, d, beta, c, DoorModel::Exact)?;
        let net = reservoir_balances(&f, u.p_rh, s.q_hc);
        Ok(Derivative {
            rates: [
                net[0] / c.cap_rh,
                net[1] / c.cap_interior,
                net[2] / c.cap_cabin,
                net[3] / c.cap_shell_inner,
                net[4] / c.cap_shell_outer,
                (f.q_hc_ss - s.q_hc) / c.tau_vcc,
            ],
            boundary: boundary_flow(&f, u.p_rh, s.q_hc),
            throughput: boundary_throughput(&f, u.p_rh, s.q_hc),
        })
    }

    fn stored_energy(&self, s: &ThermalState) -> f64 {
        let c = &self.constants;
        c.cap_rh * s.t_rh
            + c.cap_interior * s.t_int
            + c.cap_cabin * s.t_cab
            + c.cap_shell_inner * s.t_si
            + c.cap_shell_outer * s.t_so
    }

    /// One RK4 step; returns the new state and the stage-weighted boundary
    /// flow integral.
    fn rk4(
        &self,
        s: &ThermalState,
        u: &ControlInput,
        d: &Disturbance,
        beta: f64,
        h: f64,
    ) -> Result<(ThermalState, f64, Derivative), SimError> {
        let x = s.to_array();
        let shift = |k: &[f64; 6], a: f64| {
            let mut y = x;
            for i in 0..6 {
                y[i] += a * k[i];
            }
            ThermalState::from_array(y)
        };
        let k1 = self.derivative(s, u, d, beta)?;
        let k2 = self.derivative(&shift(&k1.rates, h / 2.0), u, d, beta)?;
        let k3 = self.derivative(&shift(&k2.rates, h / 2.0), u, d, beta)?;
        let k4 = self.derivative(&shift(&k3.rates, h), u, d, beta)?;
        let mut y = x;
        for i in 0..6 {
            y[i] += h / 6.0 * (k1.rates[i] + 2.0 * k2.rates[i] + 2.0 * k3.rates[i] + k4.rates[i]);
        }
        let boundary =
            h / 6.0 * (k1.boundary + 2.0 * k2.boundary + 2.0 * k3.boundary + k4.boundary);
        Ok((ThermalState::from_array(y), boundary, k1))
    }

    /// Electric power of the radiant panels holding them at their target.
    fn radiant_power(&self, s: &ThermalState, d: &Disturbance, beta: f64) -> Result<f64, SimError> {
        let c = &self.constants;
        let f = heat_flows(s, &ControlInput::OFF, d, beta, c, DoorModel::Exact)?;
        let losses = f.q_h_rh + f.q_r_rh_int + f.q_r_rh_si;
        let p = losses + c.cap_rh * (c.rh_target() - s.t_rh) / c.rh_tracking_time;
        Ok(p.clamp(0.0, c.rh_power_max))
    }

    fn pmv(&self, s: &ThermalState, d: &Disturbance) -> Result<f64, SimError> {
        let r_clo = self.clothing.insulation(d.t_amb)?;
        let ctx = ComfortContext::from_constants(&self.constants, r_clo);
        Ok(self.cabin.mean_pmv(s.t_cab, s.t_rh, s.t_int, s.t_si, &ctx)?)
    }

    /// Simulates the mission from the depot state.
    pub fn simulate(&self, trace: &MissionTrace, controller: Controller) -> Result<Trajectory, SimError> {
        let init = depot_init(trace.samples[0].t_amb);
        self.simulate_from(trace, controller, init)
    }

    pub fn simulate_from(
        &self,
        trace: &MissionTrace,
        controller: Controller,
        init: ThermalState,
    ) -> Result<Trajectory, SimError> {
        let o = &self.options;
        let c = &self.constants;
        let substeps = (o.control_period / o.dt).round();
        if !(o.dt > 0.0 && substeps >= 1.0 && (substeps * o.dt - o.control_period).abs() < 1e-9) {
            return Err(SimError::InvalidOptions(format!(
                "dt = {} does not divide the control period {}",
                o.dt, o.control_period
            )));
        }
        let substeps = substeps as usize;
        for (i, gap) in trace.gaps(60.0) {
            log::warn!("mission {}: {gap} s gap after sample {i}", trace.id);
        }
        let p_max = c.power_limit().unwrap_or(o.unlimited_power);
        let ticks = (trace.duration() / o.control_period).floor() as usize;

        let mut ctrl = ControllerState::new(controller)?;
        let mut pi = PiController::new(o.kp, o.ti);
        let mut cursor = HoldCursor { trace, index: 0 };
        let mut state = init;
        state.check_plausible()?;
        let mut last_mode = None;
        let mut audit = EnergyAudit::default();
        let e0 = self.stored_energy(&state);
        let mut points = Vec::with_capacity(ticks + 1);

        for k in 0..=ticks {
            let t = k as f64 * o.control_period;
            let d = cursor.at(t);
            let beta = solar_altitude(&d.timestamp, d.latitude, d.longitude);
            let decision = ctrl.decide(t, state.t_cab, d.t_amb)?;
            if last_mode != Some(decision.mode) {
                pi.reset();
                last_mode = Some(decision.mode);
            }
            let (signed, setpoint) = match decision.actuation {
                Actuation::Track(sp) => {
                    let (lo, hi) = PiController::limits(decision.mode, p_max);
                    (pi.step(sp, state.t_cab, o.control_period, lo, hi), sp)
                }
                Actuation::Fixed(p) => (decision.mode.sign() * p, f64::NAN),
                Actuation::Off => (0.0, f64::NAN),
            };
            let radiant = decision.radiant && c.design.radiant_heaters;
            let u = ControlInput {
                p_hc: if decision.mode == HvacMode::Passive { 0.0 } else { signed.abs() },
                p_rh: if radiant { self.radiant_power(&state, &d, beta)? } else { 0.0 },
                mode: decision.mode,
                air_curtain: decision.air_curtain && c.design.air_curtains,
                radiant,
            };
            let p_aircurt = air_curtain_power(&d, &u, c);
            points.push(TrajectoryPoint {
                t,
                state,
                inputs: u,
                setpoint,
                t_amb: d.t_amb,
                n_pass: d.n_pass,
                door_fraction: d.door_fraction,
                p_aircurt,
                p_hvac: u.p_hc + u.p_rh + p_aircurt,
                psi: if o.record_pmv { self.pmv(&state, &d)? } else { f64::NAN },
            });
            if k == ticks {
                break;
            }
            for _ in 0..substeps {
                let (next, boundary, start) = self.rk4(&state, &u, &d, beta, o.dt)?;
                next.check_plausible().map_err(|e| SimError::Implausible {
                    t: t + o.dt,
                    source: e,
                })?;
                let end = self.derivative(&next, &u, &d, beta)?;
                audit.boundary_rk4 += boundary;
                audit.boundary_trapezoid += 0.5 * o.dt * (start.boundary + end.boundary);
                audit.gross_throughput += 0.5 * o.dt * (start.throughput + end.throughput);
                state = next;
            }
        }
        audit.stored_change = self.stored_energy(&state) - e0;
        Ok(Trajectory {
            mission_id: trace.id.clone(),
            start: trace.start(),
            points,
            audit,
        })
    }
}
