use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use super::{ModelConstants, ModelError};

/// Temperatures accepted at ingestion and integration boundaries [K].
pub const PLAUSIBLE_TEMPERATURE: (f64, f64) = (200.0, 400.0);

/// Dynamic state of the thermal network.
///
/// Temperatures in kelvin, `q_hc` is the filtered heat flow of the
/// heating/cooling unit in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub t_rh: f64,
    pub t_int: f64,
    pub t_cab: f64,
    pub t_si: f64,
    pub t_so: f64,
    pub q_hc: f64,
}

impl ThermalState {
    pub const LEN: usize = 6;

    /// All five reservoirs at `t`, no HVAC heat flow.
    pub fn isothermal(t: f64) -> Self {
        Self {
            t_rh: t,
            t_int: t,
            t_cab: t,
            t_si: t,
            t_so: t,
            q_hc: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.t_rh, self.t_int, self.t_cab, self.t_si, self.t_so, self.q_hc]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            t_rh: a[0],
            t_int: a[1],
            t_cab: a[2],
            t_si: a[3],
            t_so: a[4],
            q_hc: a[5],
        }
    }

    pub fn temperatures(&self) -> [f64; 5] {
        [self.t_rh, self.t_int, self.t_cab, self.t_si, self.t_so]
    }

    /// Rejects non-finite values and temperatures outside the plausibility band.
    pub fn check_plausible(&self) -> Result<(), ModelError> {
        const NAMES: [&str; 5] = ["t_rh", "t_int", "t_cab", "t_si", "t_so"];
        for (name, t) in NAMES.iter().zip(self.temperatures()) {
            if !(t.is_finite() && t >= PLAUSIBLE_TEMPERATURE.0 && t <= PLAUSIBLE_TEMPERATURE.1) {
                return Err(ModelError::ImplausibleTemperature { name, value: t });
            }
        }
        if !self.q_hc.is_finite() {
            return Err(ModelError::NonFinite("q_hc"));
        }
        Ok(())
    }
}

/// Operating mode of the air heating and cooling unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HvacMode {
    Heating,
    Passive,
    Cooling,
}

impl HvacMode {
    /// Sign of the delivered heat flow: +1, 0 or -1.
    pub fn sign(self) -> f64 {
        match self {
            HvacMode::Heating => 1.0,
            HvacMode::Passive => 0.0,
            HvacMode::Cooling => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            HvacMode::Heating => 1,
            HvacMode::Passive => 0,
            HvacMode::Cooling => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(HvacMode::Heating),
            0 => Some(HvacMode::Passive),
            -1 => Some(HvacMode::Cooling),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HvacMode::Heating => "heating",
            HvacMode::Passive => "passive",
            HvacMode::Cooling => "cooling",
        }
    }
}

/// HVAC actuator setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Electric power of the heating/cooling unit [W].
    pub p_hc: f64,
    /// Electric power of the radiant panels [W].
    pub p_rh: f64,
    pub mode: HvacMode,
    pub air_curtain: bool,
    pub radiant: bool,
}

impl ControlInput {
    /// Everything off.
    pub const OFF: ControlInput = ControlInput {
        p_hc: 0.0,
        p_rh: 0.0,
        mode: HvacMode::Passive,
        air_curtain: false,
        radiant: false,
    };

    pub fn validate(&self, c: &ModelConstants) -> Result<(), ModelError> {
        if !(self.p_hc.is_finite() && self.p_hc >= 0.0) {
            return Err(ModelError::InvalidInput(format!("p_hc = {}", self.p_hc)));
        }
        if !(self.p_rh.is_finite() && self.p_rh >= 0.0) {
            return Err(ModelError::InvalidInput(format!("p_rh = {}", self.p_rh)));
        }
        if !self.radiant && self.p_rh != 0.0 {
            return Err(ModelError::InvalidInput(
                "radiant panels disabled but p_rh > 0".into(),
            ));
        }
        if self.mode == HvacMode::Passive && self.p_hc != 0.0 {
            return Err(ModelError::InvalidInput("passive mode with p_hc > 0".into()));
        }
        if let Some(limit) = c.power_limit() {
            if self.p_hc > limit {
                return Err(ModelError::InvalidInput(format!(
                    "p_hc = {} exceeds limit {}",
                    self.p_hc, limit
                )));
            }
        }
        Ok(())
    }
}

/// Exogenous conditions acting on the bus, instantaneous or segment-averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub timestamp: DateTime<FixedOffset>,
    /// Ambient temperature [K].
    pub t_amb: f64,
    /// Direct normal irradiance [W/m²].
    pub i_dni: f64,
    /// Diffuse horizontal irradiance [W/m²].
    pub i_dhi: f64,
    /// Passengers on board (real-valued after averaging).
    pub n_pass: f64,
    /// Fraction of door area open.
    pub door_fraction: f64,
    /// Fraction of time spent in shade.
    pub shadow_fraction: f64,
    /// Position used for solar geometry [deg].
    pub latitude: f64,
    pub longitude: f64,
}

impl Disturbance {
    /// Calm, dark, empty conditions at `t_amb`.
    pub fn quiescent(timestamp: DateTime<FixedOffset>, t_amb: f64) -> Self {
        let c = ModelConstants::default();
        Self {
            timestamp,
            t_amb,
            i_dni: 0.0,
            i_dhi: 0.0,
            n_pass: 0.0,
            door_fraction: 0.0,
            shadow_fraction: 0.0,
            latitude: c.site_latitude,
            longitude: c.site_longitude,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (lo, hi) = PLAUSIBLE_TEMPERATURE;
        if !(self.t_amb.is_finite() && self.t_amb >= lo && self.t_amb <= hi) {
            return Err(ModelError::ImplausibleTemperature {
                name: "t_amb",
                value: self.t_amb,
            });
        }
        for (name, v) in [("i_dni", self.i_dni), ("i_dhi", self.i_dhi), ("n_pass", self.n_pass)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidDisturbance(format!("{name} = {v}")));
            }
        }
        for (name, v) in [
            ("door_fraction", self.door_fraction),
            ("shadow_fraction", self.shadow_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidDisturbance(format!("{name} = {v}")));
            }
        }
        if !(self.latitude.abs() <= 90.0 && self.longitude.abs() <= 180.0) {
            return Err(ModelError::InvalidDisturbance(format!(
                "coordinates ({}, {})",
                self.latitude, self.longitude
            )));
        }
        Ok(())
    }
}

/// Every heat flow of the network [W], named after its arrow in the
/// component diagram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatFlows {
    /// Convection cabin air → inner shell.
    pub q_h_si: f64,
    /// Convection interior → cabin air.
    pub q_h_int: f64,
    /// Convection outer shell → ambient.
    pub q_h_so: f64,
    /// Convection radiant panels → cabin air.
    pub q_h_rh: f64,
    /// Conduction inner → outer shell.
    pub q_k: f64,
    /// Radiation outer shell → ambient.
    pub q_r_so: f64,
    pub q_r_rh_si: f64,
    pub q_r_rh_int: f64,
    pub q_r_int_si: f64,
    /// Door exchange, cabin → ambient.
    pub q_door: f64,
    pub q_sol_so: f64,
    pub q_sol_int: f64,
    pub q_sol_si: f64,
    /// Steady-state heat flow of the heating/cooling unit.
    pub q_hc_ss: f64,
    pub q_pass: f64,
    pub q_other: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_array_round_trip() {
        let s = ThermalState {
            t_rh: 1.0,
            t_int: 2.0,
            t_cab: 3.0,
            t_si: 4.0,
            t_so: 5.0,
            q_hc: 6.0,
        };
        assert_eq!(ThermalState::from_array(s.to_array()), s);
    }

    #[test]
    fn plausibility_band() {
        assert!(ThermalState::isothermal(290.0).check_plausible().is_ok());
        assert!(ThermalState::isothermal(150.0).check_plausible().is_err());
        let mut s = ThermalState::isothermal(290.0);
        s.t_si = f64::NAN;
        assert!(s.check_plausible().is_err());
    }

    #[test]
    fn control_input_contracts() {
        let c = ModelConstants::default();
        let mut u = ControlInput::OFF;
        u.validate(&c).unwrap();
        u.p_rh = 10.0;
        assert!(u.validate(&c).is_err());
        u = ControlInput {
            p_hc: 13_000.0,
            mode: HvacMode::Heating,
            ..ControlInput::OFF
        };
        assert!(u.validate(&c).is_err());
        u.mode = HvacMode::Passive;
        u.p_hc = 5.0;
        assert!(u.validate(&c).is_err());
    }

    #[test]
    fn mode_codes() {
        for m in [HvacMode::Heating, HvacMode::Passive, HvacMode::Cooling] {
            assert_eq!(HvacMode::from_i8(m.as_i8()), Some(m));
        }
        assert_eq!(HvacMode::from_i8(2), None);
    }
}
