//! Energy-comfort optimization of electric city-bus HVAC systems.

pub mod model;
pub mod comfort;
pub mod steady;
pub mod dynamics;
pub mod annual;
pub mod io;
pub mod validation;
