use serde::{Deserialize, Serialize};

use super::ComfortError;
use crate::model::{kelvin_to_celsius, ModelConstants, PLAUSIBLE_TEMPERATURE};

/// Body surface area used to convert metabolic heat to a flux [m²].
pub const BODY_SURFACE_AREA: f64 = 1.8;
/// One met unit [W/m²].
pub const MET: f64 = 58.15;

const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-12;

/// Conditions around the occupant other than the two temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortContext {
    /// Relative air velocity [m/s].
    pub v_cab: f64,
    /// Relative humidity as a fraction.
    pub phi_cab: f64,
    /// Metabolic heat per passenger [W].
    pub q_met: f64,
    /// Clothing insulation [clo].
    pub r_clo: f64,
}

impl ComfortContext {
    pub fn from_constants(c: &ModelConstants, r_clo: f64) -> Self {
        Self {
            v_cab: c.air_velocity,
            phi_cab: c.relative_humidity,
            q_met: c.metabolic_heat,
            r_clo,
        }
    }

    /// Metabolic rate in met.
    pub fn met(&self) -> f64 {
        self.q_met / BODY_SURFACE_AREA / MET
    }

    pub fn validate(&self) -> Result<(), ComfortError> {
        if !(self.v_cab.is_finite() && self.v_cab > 0.0) {
            return Err(ComfortError::InvalidContext(format!("v_cab = {}", self.v_cab)));
        }
        if !(self.phi_cab > 0.0 && self.phi_cab < 1.0) {
            return Err(ComfortError::InvalidContext(format!("phi_cab = {}", self.phi_cab)));
        }
        if !(self.q_met.is_finite() && self.q_met > 0.0) {
            return Err(ComfortError::InvalidContext(format!("q_met = {}", self.q_met)));
        }
        if !(self.r_clo.is_finite() && self.r_clo >= 0.0) {
            return Err(ComfortError::InvalidContext(format!("r_clo = {}", self.r_clo)));
        }
        Ok(())
    }
}

fn check_temperature(name: &'static str, t: f64) -> Result<(), ComfortError> {
    let (lo, hi) = PLAUSIBLE_TEMPERATURE;
    if t.is_finite() && t >= lo && t <= hi {
        Ok(())
    } else {
        Err(ComfortError::ImplausibleTemperature { name, value: t })
    }
}

/// Predicted mean vote for air temperature `t_cab` and mean radiant
/// temperature `t_mr`, both in kelvin.
pub fn pmv(t_cab: f64, t_mr: f64, ctx: &ComfortContext) -> Result<f64, ComfortError> {
    check_temperature("t_cab", t_cab)?;
    check_temperature("t_mr", t_mr)?;
    ctx.validate()?;
    pmv_celsius(
        kelvin_to_celsius(t_cab),
        kelvin_to_celsius(t_mr),
        ctx.v_cab,
        ctx.phi_cab,
        ctx.met(),
        ctx.r_clo,
    )
}

/// ISO 7730 PMV with temperatures in °C, humidity as a fraction and
/// metabolic rate in met. No external work.
pub fn pmv_celsius(
    ta: f64,
    tr: f64,
    vel: f64,
    rh: f64,
    met: f64,
    clo: f64,
) -> Result<f64, ComfortError> {
    // Water vapour partial pressure [Pa].
    let pa = rh * 1000.0 * (16.6536 - 4030.183 / (ta + 235.0)).exp();
    let icl = 0.155 * clo;
    let m = met * MET;
    let mw = m;
    let fcl = if icl <= 0.078 {
        1.0 + 1.29 * icl
    } else {
        1.05 + 0.645 * icl
    };
    let hcf = 12.1 * vel.sqrt();
    let taa = ta + 273.0;
    let tra = tr + 273.0;

    let tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
    let p1 = icl * fcl;
    let p2 = p1 * 3.96;
    let p3 = p1 * 100.0;
    let p4 = p1 * taa;
    let p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0).powi(4);
    let mut xn = tcla / 100.0;
    let mut xf = tcla / 50.0;
    let mut hc = hcf;
    let mut iterations = 0;
    while (xn - xf).abs() > TOLERANCE {
        if iterations == MAX_ITERATIONS {
            return Err(ComfortError::PmvNotConverged { iterations });
        }
        xf = (xf + xn) / 2.0;
        let hcn = 2.38 * (100.0 * xf - taa).abs().powf(0.25);
        hc = hcf.max(hcn);
        xn = (p5 + p4 * hc - p2 * xf.powi(4)) / (100.0 + p3 * hc);
        iterations += 1;
    }
    let tcl = 100.0 * xn - 273.0;

    // Skin diffusion, sweating, latent and dry respiration, radiation, convection.
    let hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
    let hl2 = if mw > MET { 0.42 * (mw - MET) } else { 0.0 };
    let hl3 = 1.7e-5 * m * (5867.0 - pa);
    let hl4 = 0.0014 * m * (34.0 - ta);
    let hl5 = 3.96 * fcl * (xn.powi(4) - (tra / 100.0).powi(4));
    let hl6 = fcl * hc * (tcl - ta);

    let ts = 0.303 * (-0.036 * m).exp() + 0.028;
    let value = ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ComfortError::PmvNotConverged { iterations })
    }
}
