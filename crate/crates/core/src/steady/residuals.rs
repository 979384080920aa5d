use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::model::{
    heat_flows, reservoir_balances, ControlInput, Disturbance, DoorModel, HvacMode, ModelConstants,
    ThermalState, PLAUSIBLE_TEMPERATURE,
};

/// Scale of the balance residuals: watts are reported in kilowatts.
pub const BALANCE_SCALE: f64 = 1000.0;

/// Discrete part of a steady-state candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub mode: HvacMode,
    pub air_curtain: bool,
    pub radiant: bool,
}

impl Candidate {
    /// Number of switched-on auxiliaries.
    pub fn auxiliaries(&self) -> usize {
        usize::from(self.air_curtain) + usize::from(self.radiant)
    }
}

/// How the heat flow of the heating/cooling unit is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatSpec {
    /// No air heating or cooling.
    Off,
    /// Heat flow is an unknown; the cabin-average PMV is pinned to this value.
    PinnedPmv(f64),
    /// Electric power of the unit is fixed [W]; heat follows from the COP.
    FixedPower(f64),
}

/// Layout of the unknown vector for one candidate:
/// `[T_rh or P_rh, T_int, T_cab, T_si, T_so, (Q_hc)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub candidate: Candidate,
    pub heat: HeatSpec,
    pub t_rh_target: f64,
}

/// Equilibrium point decoded from an unknown vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub state: ThermalState,
    pub p_rh: f64,
    pub q_hc: f64,
}

impl Layout {
    pub fn len(&self) -> usize {
        match self.heat {
            HeatSpec::PinnedPmv(_) => 6,
            _ => 5,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Typical magnitudes of the unknowns.
    pub fn scale(&self) -> Vec<f64> {
        let mut s = vec![300.0; self.len()];
        if self.candidate.radiant {
            s[0] = 1000.0;
        }
        if self.len() == 6 {
            s[5] = 1000.0;
        }
        s
    }

    pub fn encode(&self, state: &ThermalState, p_rh: f64) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        x[0] = if self.candidate.radiant { p_rh } else { state.t_rh };
        x[1] = state.t_int;
        x[2] = state.t_cab;
        x[3] = state.t_si;
        x[4] = state.t_so;
        if self.len() == 6 {
            x[5] = state.q_hc;
        }
        x
    }

    /// Maps unknowns back to a state; `None` outside the plausible band.
    pub fn decode(&self, x: &DVector<f64>, d: &Disturbance, c: &ModelConstants) -> Option<Decoded> {
        let (t_rh, p_rh) = if self.candidate.radiant {
            (self.t_rh_target, x[0])
        } else {
            (x[0], 0.0)
        };
        let mut state = ThermalState {
            t_rh,
            t_int: x[1],
            t_cab: x[2],
            t_si: x[3],
            t_so: x[4],
            q_hc: 0.0,
        };
        let (lo, hi) = PLAUSIBLE_TEMPERATURE;
        if !state.temperatures().iter().all(|t| t.is_finite() && *t >= lo && *t <= hi) {
            return None;
        }
        state.q_hc = match self.heat {
            HeatSpec::Off => 0.0,
            HeatSpec::PinnedPmv(_) => x[5],
            HeatSpec::FixedPower(p) => {
                let gamma = crate::model::cop(self.candidate.mode, state.t_cab, d.t_amb, c).ok()?;
                self.candidate.mode.sign() * gamma * p
            }
        };
        if !(state.q_hc.is_finite() && p_rh.is_finite()) {
            return None;
        }
        Some(Decoded { state, p_rh, q_hc: state.q_hc })
    }

    /// Steady balances of the five reservoirs, scaled to kilowatts, plus the
    /// comfort pin when active. `pmv` maps a state to the cabin-average PMV.
    pub fn residuals<P>(
        &self,
        x: &DVector<f64>,
        d: &Disturbance,
        beta: f64,
        c: &ModelConstants,
        pmv: P,
    ) -> Option<DVector<f64>>
    where
        P: Fn(&ThermalState) -> Option<f64>,
    {
        let dec = self.decode(x, d, c)?;
        let u = ControlInput {
            air_curtain: self.candidate.air_curtain,
            ..ControlInput::OFF
        };
        let f = heat_flows(&dec.state, &u, d, beta, c, DoorModel::Smooth).ok()?;
        let net = reservoir_balances(&f, dec.p_rh, dec.q_hc);
        let mut r = DVector::zeros(self.len());
        for (i, v) in net.iter().enumerate() {
            r[i] = v / BALANCE_SCALE;
        }
        if let HeatSpec::PinnedPmv(target) = self.heat {
            r[5] = pmv(&dec.state)? - target;
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::celsius_to_kelvin;
    use chrono::DateTime;

    #[test]
    fn isothermal_unforced_point_is_an_equilibrium() {
        let c = ModelConstants {
            other_heat: 0.0,
            ..Default::default()
        };
        let ts = DateTime::parse_from_rfc3339("2022-03-01T03:00:00+01:00").unwrap();
        let d = Disturbance::quiescent(ts, celsius_to_kelvin(8.0));
        let layout = Layout {
            candidate: Candidate {
                mode: HvacMode::Passive,
                air_curtain: false,
                radiant: false,
            },
            heat: HeatSpec::Off,
            t_rh_target: c.rh_target(),
        };
        let x = layout.encode(&ThermalState::isothermal(d.t_amb), 0.0);
        let r = layout.residuals(&x, &d, -0.5, &c, |_| Some(0.0)).unwrap();
        assert_eq!(r.amax(), 0.0);
        let mut warmer = x.clone();
        warmer[2] += 1.0;
        assert!(layout.residuals(&warmer, &d, -0.5, &c, |_| Some(0.0)).unwrap().amax() > 1e-3);
    }
}
