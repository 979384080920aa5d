//! Model constants of the bus cabin, its shell and the HVAC hardware.
//!
//! Values default to the reference 18.7 m articulated city bus. Every field
//! can be overridden from a JSON config; missing fields keep their default.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Offset between the Celsius and Kelvin scales.
pub const ZERO_CELSIUS: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + ZERO_CELSIUS
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - ZERO_CELSIUS
}

/// Kind of air heater installed in the heating/cooling unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaterKind {
    /// Resistive PTC elements, COP of one.
    Ptc,
    /// Reversible heat pump sharing the vapor-compression cycle with the AC.
    Hp,
}

/// Hardware configuration of the HVAC system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVariant {
    /// `None` describes a cooling-only unit.
    pub heater: Option<HeaterKind>,
    pub radiant_heaters: bool,
    pub air_curtains: bool,
}

impl DesignVariant {
    pub const fn new(heater: HeaterKind, radiant_heaters: bool, air_curtains: bool) -> Self {
        Self {
            heater: Some(heater),
            radiant_heaters,
            air_curtains,
        }
    }

    pub const fn ptc() -> Self {
        Self::new(HeaterKind::Ptc, false, false)
    }

    pub const fn hp() -> Self {
        Self::new(HeaterKind::Hp, false, false)
    }

    pub fn with_radiant_heaters(mut self) -> Self {
        self.radiant_heaters = true;
        self
    }

    pub fn with_air_curtains(mut self) -> Self {
        self.air_curtains = true;
        self
    }

    /// Default compressor/heater power limit of this design.
    ///
    /// The heat pump is limited to 12 kW; resistive heating is unlimited
    /// unless configured.
    pub fn default_power_limit(&self) -> Option<f64> {
        match self.heater {
            Some(HeaterKind::Hp) => Some(12_000.0),
            _ => None,
        }
    }
}

impl Default for DesignVariant {
    fn default() -> Self {
        Self::hp().with_air_curtains()
    }
}

impl fmt::Display for DesignVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.heater {
            Some(HeaterKind::Ptc) => write!(f, "ptc")?,
            Some(HeaterKind::Hp) => write!(f, "hp")?,
            None => write!(f, "none")?,
        }
        if self.radiant_heaters {
            write!(f, ",+rh")?;
        }
        if self.air_curtains {
            write!(f, ",+curtains")?;
        }
        Ok(())
    }
}

impl FromStr for DesignVariant {
    type Err = ModelError;

    /// Parses `<ptc|hp|none>[,+rh][,+curtains]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(',').map(str::trim);
        let heater = match parts.next() {
            Some("ptc") => Some(HeaterKind::Ptc),
            Some("hp") => Some(HeaterKind::Hp),
            Some("none") => None,
            _ => return Err(ModelError::InvalidDesign(s.to_string())),
        };
        let mut design = Self {
            heater,
            radiant_heaters: false,
            air_curtains: false,
        };
        for part in parts {
            match part {
                "+rh" => design.radiant_heaters = true,
                "+curtains" => design.air_curtains = true,
                _ => return Err(ModelError::InvalidDesign(s.to_string())),
            }
        }
        Ok(design)
    }
}

/// Parametric COP map of the vapor-compression cycle.
///
/// A fixed fraction of the Carnot COP, evaluated with an approach
/// temperature added to the lift and clamped at `cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopMap {
    /// Second-law efficiency.
    pub eta_ii: f64,
    /// Heat-exchanger approach added to the reservoir temperature lift [K].
    pub approach: f64,
    /// Upper clamp of the COP.
    pub cap: f64,
}

impl Default for CopMap {
    fn default() -> Self {
        Self {
            eta_ii: 0.45,
            approach: 10.0,
            cap: 5.0,
        }
    }
}

impl CopMap {
    /// Heat-pump COP delivering heat at `t_hot` from a source at `t_cold` [K].
    pub fn heating(&self, t_hot: f64, t_cold: f64) -> f64 {
        let lift = (t_hot - t_cold).max(0.0) + self.approach;
        (self.eta_ii * t_hot / lift).min(self.cap)
    }

    /// AC COP removing heat at `t_cold` and rejecting it at `t_hot` [K].
    pub fn cooling(&self, t_cold: f64, t_hot: f64) -> f64 {
        let lift = (t_hot - t_cold).max(0.0) + self.approach;
        (self.eta_ii * t_cold / lift).min(self.cap)
    }
}

/// All physical constants of the thermal network plus design switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConstants {
    // Convection and conduction [W/(m² K)].
    pub h_in: f64,
    pub h_out: f64,
    pub h_rh: f64,
    pub k_shell: f64,

    // Geometry [m], [m²], [m³].
    pub cabin_length: f64,
    pub cabin_width: f64,
    pub cabin_height: f64,
    pub area_shell: f64,
    pub area_roof: f64,
    pub area_wall: f64,
    pub area_interior: f64,
    pub area_rh: f64,
    pub volume_cabin: f64,
    pub door_height: f64,
    pub door_width_total: f64,
    /// Number of radiant panels on the ceiling.
    pub rh_panel_count: usize,

    // Heat capacities [J/K].
    pub cap_cabin: f64,
    pub cap_interior: f64,
    pub cap_rh: f64,
    pub cap_shell_inner: f64,
    pub cap_shell_outer: f64,

    // View factors between enclosure surfaces.
    pub vf_rh_interior: f64,
    pub vf_rh_shell: f64,
    pub vf_interior_shell: f64,

    // Solar gains.
    pub absorptivity_paint: f64,
    pub window_transmissivity: f64,
    pub frac_interior_absorbed: f64,
    pub frac_roof_covered: f64,
    pub frac_wall_windows: f64,

    // Doors and air curtains.
    pub discharge_coeff: f64,
    pub air_curtain_reduction: f64,
    /// Blower power with all doors open [W].
    pub air_curtain_power: f64,

    // Air and physical constants.
    pub air_density: f64,
    pub air_cp: f64,
    pub gravity: f64,
    pub sigma: f64,

    // Internal sources [W].
    pub metabolic_heat: f64,
    pub other_heat: f64,

    // Heating/cooling unit.
    /// Time constant of the first-order VCC heat-flow filter [s].
    pub tau_vcc: f64,
    /// Operating temperature of the radiant panels [°C].
    pub rh_target_c: f64,
    pub cop: CopMap,
    pub design: DesignVariant,
    /// Limit on `P_hc` [W]; `None` means the design default.
    pub p_hc_max: Option<f64>,

    // Cabin air conditions for the comfort model.
    pub air_velocity: f64,
    pub relative_humidity: f64,

    // Radiant-panel temperature loop used in dynamic runs.
    pub rh_tracking_time: f64,
    pub rh_power_max: f64,

    /// Fallback site for solar geometry when a trace has no coordinates [deg].
    pub site_latitude: f64,
    pub site_longitude: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self {
            h_in: 8.01,
            h_out: 20.67,
            h_rh: 2.1,
            k_shell: 6.86,

            cabin_length: 18.7,
            cabin_width: 2.6,
            cabin_height: 2.4,
            area_shell: 199.5,
            area_roof: 48.6,
            area_wall: 102.2,
            area_interior: 20.0,
            area_rh: 4.0,
            volume_cabin: 116.7,
            door_height: 1.95,
            door_width_total: 4.42,
            rh_panel_count: 16,

            cap_cabin: 146.6e3,
            cap_interior: 78e3,
            cap_rh: 4800e3,
            cap_shell_inner: 856.1e3,
            cap_shell_outer: 856.1e3,

            vf_rh_interior: 0.30,
            vf_rh_shell: 0.70,
            vf_interior_shell: 0.94,

            absorptivity_paint: 0.30,
            window_transmissivity: 0.46,
            frac_interior_absorbed: 0.30,
            frac_roof_covered: 0.66,
            frac_wall_windows: 0.354,

            discharge_coeff: 0.6,
            air_curtain_reduction: 0.60,
            air_curtain_power: 1020.0,

            air_density: 1.25,
            air_cp: 1005.0,
            gravity: 9.81,
            sigma: 5.67e-8,

            metabolic_heat: 125.3,
            other_heat: 500.0,

            tau_vcc: 20.0,
            rh_target_c: 70.0,
            cop: CopMap::default(),
            design: DesignVariant::default(),
            p_hc_max: None,

            air_velocity: 0.1,
            relative_humidity: 0.40,

            rh_tracking_time: 300.0,
            rh_power_max: 8000.0,

            site_latitude: 47.3769,
            site_longitude: 8.5417,
        }
    }
}

/// Relative tolerance of the geometric consistency checks.
const GEOMETRY_RTOL: f64 = 1e-3;

impl ModelConstants {
    pub fn with_design(mut self, design: DesignVariant) -> Self {
        self.design = design;
        self
    }

    /// Radiant-panel target temperature [K].
    pub fn rh_target(&self) -> f64 {
        celsius_to_kelvin(self.rh_target_c)
    }

    /// Effective power limit of the heating/cooling unit [W].
    pub fn power_limit(&self) -> Option<f64> {
        self.p_hc_max.or_else(|| self.design.default_power_limit())
    }

    /// Prefactor of the buoyancy door-exchange law, all terms except the
    /// temperature factors and the door/curtain fractions [W/K].
    pub fn door_coefficient(&self) -> f64 {
        self.air_density
            * self.discharge_coeff
            * (self.gravity * self.door_height.powi(3)).sqrt()
            * self.door_width_total
            / 3.0
            * self.air_cp
    }

    /// Checks positivity, fraction ranges and the geometric identities.
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("h_in", self.h_in),
            ("h_out", self.h_out),
            ("h_rh", self.h_rh),
            ("k_shell", self.k_shell),
            ("cabin_length", self.cabin_length),
            ("cabin_width", self.cabin_width),
            ("cabin_height", self.cabin_height),
            ("area_shell", self.area_shell),
            ("area_roof", self.area_roof),
            ("area_wall", self.area_wall),
            ("area_interior", self.area_interior),
            ("area_rh", self.area_rh),
            ("volume_cabin", self.volume_cabin),
            ("door_height", self.door_height),
            ("door_width_total", self.door_width_total),
            ("cap_cabin", self.cap_cabin),
            ("cap_interior", self.cap_interior),
            ("cap_rh", self.cap_rh),
            ("cap_shell_inner", self.cap_shell_inner),
            ("cap_shell_outer", self.cap_shell_outer),
            ("air_density", self.air_density),
            ("air_cp", self.air_cp),
            ("gravity", self.gravity),
            ("sigma", self.sigma),
            ("tau_vcc", self.tau_vcc),
            ("air_velocity", self.air_velocity),
            ("rh_tracking_time", self.rh_tracking_time),
            ("cop.eta_ii", self.cop.eta_ii),
            ("cop.cap", self.cop.cap),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidConstant {
                    name,
                    reason: format!("must be finite and positive, got {value}"),
                });
            }
        }
        let non_negative = [
            ("metabolic_heat", self.metabolic_heat),
            ("other_heat", self.other_heat),
            ("air_curtain_power", self.air_curtain_power),
            ("rh_power_max", self.rh_power_max),
            ("cop.approach", self.cop.approach),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::InvalidConstant {
                    name,
                    reason: format!("must be finite and non-negative, got {value}"),
                });
            }
        }
        let fractions = [
            ("vf_rh_interior", self.vf_rh_interior),
            ("vf_rh_shell", self.vf_rh_shell),
            ("vf_interior_shell", self.vf_interior_shell),
            ("absorptivity_paint", self.absorptivity_paint),
            ("window_transmissivity", self.window_transmissivity),
            ("frac_interior_absorbed", self.frac_interior_absorbed),
            ("frac_roof_covered", self.frac_roof_covered),
            ("frac_wall_windows", self.frac_wall_windows),
            ("air_curtain_reduction", self.air_curtain_reduction),
            ("discharge_coeff", self.discharge_coeff),
        ];
        for (name, value) in fractions {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::InvalidConstant {
                    name,
                    reason: format!("must lie in [0, 1], got {value}"),
                });
            }
        }
        if !(self.relative_humidity > 0.0 && self.relative_humidity < 1.0) {
            return Err(ModelError::InvalidConstant {
                name: "relative_humidity",
                reason: format!("must lie in (0, 1), got {}", self.relative_humidity),
            });
        }
        if self.rh_panel_count == 0 {
            return Err(ModelError::InvalidConstant {
                name: "rh_panel_count",
                reason: "at least one panel required".into(),
            });
        }
        if let Some(limit) = self.p_hc_max {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(ModelError::InvalidConstant {
                    name: "p_hc_max",
                    reason: format!("must be finite and positive, got {limit}"),
                });
            }
        }

        let (l, w, h) = (self.cabin_length, self.cabin_width, self.cabin_height);
        let identities = [
            ("area_shell", self.area_shell, 2.0 * (l * w + l * h + w * h)),
            ("area_roof", self.area_roof, l * w),
            ("area_wall", self.area_wall, 2.0 * (l + w) * h),
            ("volume_cabin", self.volume_cabin, l * w * h),
            (
                "cap_cabin",
                self.cap_cabin,
                self.air_density * self.air_cp * self.volume_cabin,
            ),
            (
                "vf_rh_shell",
                self.vf_rh_shell,
                1.0 - self.vf_rh_interior,
            ),
            (
                "vf_interior_shell",
                self.vf_interior_shell,
                1.0 - self.area_rh * self.vf_rh_interior / self.area_interior,
            ),
        ];
        for (name, actual, expected) in identities {
            if ((actual - expected) / expected).abs() > GEOMETRY_RTOL {
                return Err(ModelError::InconsistentConstant {
                    name,
                    actual,
                    expected,
                });
            }
        }
        Ok(())
    }
}
