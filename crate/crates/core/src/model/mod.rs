//! Lumped thermal network of the bus cabin.

mod constants;
mod flows;
mod solar;
mod types;

pub use constants::{
    celsius_to_kelvin, kelvin_to_celsius, CopMap, DesignVariant, HeaterKind, ModelConstants,
    ZERO_CELSIUS,
};
pub use flows::{
    air_curtain_power, boundary_flow, boundary_throughput, convective_and_conductive_flows, cop,
    door_exchange, heat_flows, hvac_heat_and_cop, internal_gains, ode_rhs, ode_rhs_at,
    radiative_flows, reservoir_balances, smooth_sqrt, solar_gains, ConvectiveFlows, DoorModel,
    RadiativeFlows, SolarGains,
};
pub use solar::solar_altitude;
pub use types::{ControlInput, Disturbance, HeatFlows, HvacMode, ThermalState, PLAUSIBLE_TEMPERATURE};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid design variant {0:?}")]
    InvalidDesign(String),
    #[error("invalid constant {name}: {reason}")]
    InvalidConstant { name: &'static str, reason: String },
    #[error("constant {name} = {actual} inconsistent with geometry (expected {expected})")]
    InconsistentConstant {
        name: &'static str,
        actual: f64,
        expected: f64,
    },
    #[error("implausible temperature {name} = {value} K")]
    ImplausibleTemperature { name: &'static str, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid control input: {0}")]
    InvalidInput(String),
    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),
    #[error("heating requested but the design has no heater")]
    NoHeater,
}
