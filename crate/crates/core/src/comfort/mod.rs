//! Thermal comfort of the passengers.

mod clothing;
mod mrt;
mod pmv;
mod surrogate;
pub mod view_factor;

pub use clothing::{clothing_insulation, ClothingModel, CLOTHING_RANGE, CLO_MAX, CLO_MIN};
pub use mrt::{
    panel_layout, sample_passengers, CabinComfort, PassengerGeometry, RadiantWeights, SurfaceView,
    DEFAULT_PASSENGER_COUNT, DEFAULT_PASSENGER_SEED, FLOOR_INSET, PASSENGER_FOOTPRINT,
    PASSENGER_HEIGHT, VIEW_TO_INTERIOR,
};
pub use pmv::{pmv, pmv_celsius, ComfortContext, BODY_SURFACE_AREA, MET};
pub use surrogate::{default_clothing_levels, PmvSurrogate, SurrogateBank, SurrogateConfig};
pub use view_factor::{rect_view_factor, Axis, Rect};

#[derive(Debug, thiserror::Error)]
pub enum ComfortError {
    #[error("ambient temperature {0} °C outside the clothing model range")]
    ClothingOutOfRange(f64),
    #[error("invalid clothing table: {0}")]
    InvalidClothingTable(String),
    #[error("clothing temperature iteration did not converge after {iterations} iterations")]
    PmvNotConverged { iterations: usize },
    #[error("implausible temperature {name} = {value} K")]
    ImplausibleTemperature { name: &'static str, value: f64 },
    #[error("invalid comfort context: {0}")]
    InvalidContext(String),
    #[error("degenerate rectangle")]
    DegenerateRectangle,
    #[error("unsupported rectangle orientation: {0}")]
    UnsupportedOrientation(String),
    #[error("invalid panel layout: {0}")]
    InvalidLayout(String),
    #[error("passenger at ({x}, {y}) does not fit in the cabin")]
    PassengerOutsideCabin { x: f64, y: f64 },
    #[error("at least one passenger position is required")]
    NoPassengers,
    #[error("surrogate fit for {r_clo} clo reached held-out MAE {mae}")]
    SurrogateFit { r_clo: f64, mae: f64 },
    #[error("surrogate file: {0}")]
    SurrogateFormat(String),
}
