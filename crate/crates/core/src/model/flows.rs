//! Heat-flow laws of the thermal network and the ODE right-hand side.

use serde::{Deserialize, Serialize};

use super::solar::solar_altitude;
use super::{
    ControlInput, Disturbance, HeatFlows, HeaterKind, HvacMode, ModelConstants, ModelError,
    ThermalState,
};

/// Treatment of the square-root factor in the door exchange law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoorModel {
    Exact,
    /// Differentiable fourth-root surrogate used by the steady-state solver.
    Smooth,
}

/// Smooth replacement of `sqrt(|x|)`: `(x² + 0.01)^(1/4)`.
pub fn smooth_sqrt(x: f64) -> f64 {
    (x * x + 0.01).sqrt().sqrt()
}

/// Convective and conductive part of [`HeatFlows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvectiveFlows {
    pub q_h_si: f64,
    pub q_h_int: f64,
    pub q_h_so: f64,
    pub q_h_rh: f64,
    pub q_k: f64,
}

pub fn convective_and_conductive_flows(
    s: &ThermalState,
    d: &Disturbance,
    c: &ModelConstants,
) -> ConvectiveFlows {
    ConvectiveFlows {
        q_h_si: c.h_in * c.area_shell * (s.t_cab - s.t_si),
        q_h_int: c.h_in * c.area_interior * (s.t_int - s.t_cab),
        q_h_so: c.h_out * c.area_shell * (s.t_so - d.t_amb),
        q_h_rh: c.h_rh * c.area_rh * (s.t_rh - s.t_cab),
        q_k: c.k_shell * c.area_shell * (s.t_si - s.t_so),
    }
}

/// Radiative part of [`HeatFlows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiativeFlows {
    pub q_r_so: f64,
    pub q_r_rh_si: f64,
    pub q_r_rh_int: f64,
    pub q_r_int_si: f64,
}

pub fn radiative_flows(s: &ThermalState, d: &Disturbance, c: &ModelConstants) -> RadiativeFlows {
    let [rh4, int4, si4, so4, amb4] = [s.t_rh, s.t_int, s.t_si, s.t_so, d.t_amb].map(|t| t.powi(4));
    RadiativeFlows {
        q_r_so: c.sigma * c.area_shell * (so4 - amb4),
        q_r_rh_si: c.sigma * c.area_rh * c.vf_rh_shell * (rh4 - si4),
        q_r_rh_int: c.sigma * c.area_rh * c.vf_rh_interior * (rh4 - int4),
        q_r_int_si: c.sigma * c.area_interior * c.vf_interior_shell * (int4 - si4),
    }
}

/// Buoyancy-driven heat loss through open doors, cabin → ambient [W].
pub fn door_exchange(
    t_cab: f64,
    d: &Disturbance,
    u: &ControlInput,
    c: &ModelConstants,
    model: DoorModel,
) -> f64 {
    let dt = t_cab - d.t_amb;
    let root = match model {
        DoorModel::Exact => dt.abs().sqrt(),
        DoorModel::Smooth => smooth_sqrt(dt),
    };
    let curtain = if u.air_curtain && c.design.air_curtains {
        1.0 - c.air_curtain_reduction
    } else {
        1.0
    };
    c.door_coefficient() * root / d.t_amb.sqrt() * dt * d.door_fraction * curtain
}

/// Electric power drawn by the air-curtain blowers [W].
pub fn air_curtain_power(d: &Disturbance, u: &ControlInput, c: &ModelConstants) -> f64 {
    if u.air_curtain && c.design.air_curtains {
        d.door_fraction * c.air_curtain_power
    } else {
        0.0
    }
}

/// Solar irradiance on the bus and the resulting heat gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarGains {
    /// Mean irradiance on the roof [W/m²].
    pub i_roof: f64,
    /// Mean irradiance on the walls, averaged over all headings [W/m²].
    pub i_wall: f64,
    pub q_sol_so: f64,
    pub q_sol_int: f64,
    pub q_sol_si: f64,
}

/// Solar gains for altitude `beta` [rad]. Direct-beam terms vanish while the
/// sun is below the horizon; diffuse terms always apply.
pub fn solar_gains(d: &Disturbance, beta: f64, c: &ModelConstants) -> SolarGains {
    let (roof_proj, wall_proj) = if beta > 0.0 {
        (beta.sin(), beta.cos() / std::f64::consts::PI)
    } else {
        (0.0, 0.0)
    };
    let i_roof = roof_proj * d.i_dni + d.i_dhi;
    let i_wall = wall_proj * d.i_dni + 0.5 * d.i_dhi;
    let sun = 1.0 - d.shadow_fraction;
    let q_sol_so = sun
        * (c.area_roof * i_roof * c.absorptivity_paint * (1.0 - c.frac_roof_covered)
            + c.area_wall * i_wall * (1.0 - c.frac_wall_windows) * c.absorptivity_paint);
    let transmitted = sun * c.area_wall * i_wall * c.frac_wall_windows * c.window_transmissivity;
    SolarGains {
        i_roof,
        i_wall,
        q_sol_so,
        q_sol_int: transmitted * c.frac_interior_absorbed,
        q_sol_si: transmitted * (1.0 - c.frac_interior_absorbed),
    }
}

/// COP of the heating/cooling unit in `mode` at the given cabin temperature.
pub fn cop(mode: HvacMode, t_cab: f64, t_amb: f64, c: &ModelConstants) -> Result<f64, ModelError> {
    match mode {
        HvacMode::Heating => match c.design.heater {
            Some(HeaterKind::Ptc) => Ok(1.0),
            Some(HeaterKind::Hp) => Ok(c.cop.heating(t_cab, t_amb)),
            None => Err(ModelError::NoHeater),
        },
        HvacMode::Cooling => Ok(c.cop.cooling(t_cab, t_amb)),
        HvacMode::Passive => Ok(1.0),
    }
}

/// Steady-state heat delivered by the heating/cooling unit and the COP used.
pub fn hvac_heat_and_cop(
    u: &ControlInput,
    s: &ThermalState,
    d: &Disturbance,
    c: &ModelConstants,
) -> Result<(f64, f64), ModelError> {
    if u.mode == HvacMode::Passive {
        return Ok((0.0, 1.0));
    }
    let gamma = cop(u.mode, s.t_cab, d.t_amb, c)?;
    Ok((u.mode.sign() * gamma * u.p_hc, gamma))
}

/// Metabolic heat of the passengers and the constant auxiliary load [W].
pub fn internal_gains(d: &Disturbance, c: &ModelConstants) -> (f64, f64) {
    (d.n_pass * c.metabolic_heat, c.other_heat)
}

/// Evaluates every flow of the network for a known solar altitude.
pub fn heat_flows(
    s: &ThermalState,
    u: &ControlInput,
    d: &Disturbance,
    beta: f64,
    c: &ModelConstants,
    door: DoorModel,
) -> Result<HeatFlows, ModelError> {
    let conv = convective_and_conductive_flows(s, d, c);
    let rad = radiative_flows(s, d, c);
    let sol = solar_gains(d, beta, c);
    let (q_hc_ss, _) = hvac_heat_and_cop(u, s, d, c)?;
    let (q_pass, q_other) = internal_gains(d, c);
    Ok(HeatFlows {
        q_h_si: conv.q_h_si,
        q_h_int: conv.q_h_int,
        q_h_so: conv.q_h_so,
        q_h_rh: conv.q_h_rh,
        q_k: conv.q_k,
        q_r_so: rad.q_r_so,
        q_r_rh_si: rad.q_r_rh_si,
        q_r_rh_int: rad.q_r_rh_int,
        q_r_int_si: rad.q_r_int_si,
        q_door: door_exchange(s.t_cab, d, u, c, door),
        q_sol_so: sol.q_sol_so,
        q_sol_int: sol.q_sol_int,
        q_sol_si: sol.q_sol_si,
        q_hc_ss,
        q_pass,
        q_other,
    })
}

/// Net heat into each reservoir [W], ordered `[rh, int, cab, si, so]`.
///
/// The cabin balance uses the filtered heat flow `q_hc` passed in, not
/// the steady-state value inside `f`.
pub fn reservoir_balances(f: &HeatFlows, p_rh: f64, q_hc: f64) -> [f64; 5] {
    [
        p_rh - f.q_h_rh - f.q_r_rh_int - f.q_r_rh_si,
        f.q_sol_int + f.q_r_rh_int - f.q_h_int - f.q_r_int_si,
        f.q_pass + f.q_other + q_hc + f.q_h_rh + f.q_h_int - f.q_h_si - f.q_door,
        f.q_h_si + f.q_sol_si + f.q_r_rh_si + f.q_r_int_si - f.q_k,
        f.q_k + f.q_sol_so - f.q_h_so - f.q_r_so,
    ]
}

/// Sum of all flows crossing the system boundary [W]; equals
/// `Σ C_i dT_i/dt` over the five reservoirs.
pub fn boundary_flow(f: &HeatFlows, p_rh: f64, q_hc: f64) -> f64 {
    p_rh + q_hc + f.q_pass + f.q_other + f.q_sol_so + f.q_sol_int + f.q_sol_si
        - f.q_door
        - f.q_h_so
        - f.q_r_so
}

/// Sum of magnitudes of the boundary flows [W].
pub fn boundary_throughput(f: &HeatFlows, p_rh: f64, q_hc: f64) -> f64 {
    p_rh.abs()
        + q_hc.abs()
        + f.q_pass.abs()
        + f.q_other.abs()
        + f.q_sol_so.abs()
        + f.q_sol_int.abs()
        + f.q_sol_si.abs()
        + f.q_door.abs()
        + f.q_h_so.abs()
        + f.q_r_so.abs()
}

/// Time derivatives of the state for a known solar altitude.
pub fn ode_rhs_at(
    s: &ThermalState,
    u: &ControlInput,
    d: &Disturbance,
    beta: f64,
    c: &ModelConstants,
    door: DoorModel,
) -> Result<[f64; 6], ModelError> {
    let f = heat_flows(s, u, d, beta, c, door)?;
    let net = reservoir_balances(&f, u.p_rh, s.q_hc);
    Ok([
        net[0] / c.cap_rh,
        net[1] / c.cap_interior,
        net[2] / c.cap_cabin,
        net[3] / c.cap_shell_inner,
        net[4] / c.cap_shell_outer,
        (f.q_hc_ss - s.q_hc) / c.tau_vcc,
    ])
}

/// Time derivatives of the state with the exact door law.
pub fn ode_rhs(
    s: &ThermalState,
    u: &ControlInput,
    d: &Disturbance,
    c: &ModelConstants,
) -> Result<[f64; 6], ModelError> {
    let beta = solar_altitude(&d.timestamp, d.latitude, d.longitude);
    ode_rhs_at(s, u, d, beta, c, DoorModel::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{celsius_to_kelvin, DesignVariant};
    use chrono::DateTime;

    fn noon() -> Disturbance {
        let ts = DateTime::parse_from_rfc3339("2022-12-10T12:00:00+01:00").unwrap();
        Disturbance::quiescent(ts, celsius_to_kelvin(2.0))
    }

    #[test]
    fn isothermal_flows_vanish() {
        let c = ModelConstants::default();
        let d = noon();
        let s = ThermalState::isothermal(d.t_amb);
        let conv = convective_and_conductive_flows(&s, &d, &c);
        assert_eq!(
            [conv.q_h_si, conv.q_h_int, conv.q_h_so, conv.q_h_rh, conv.q_k],
            [0.0; 5]
        );
        let rad = radiative_flows(&s, &d, &c);
        assert_eq!([rad.q_r_so, rad.q_r_rh_si, rad.q_r_rh_int, rad.q_r_int_si], [0.0; 4]);
    }

    #[test]
    fn inner_convection_and_conduction_values() {
        let c = ModelConstants::default();
        let d = noon();
        let mut s = ThermalState::isothermal(293.15);
        s.t_si = 291.15;
        s.t_so = 290.15;
        let conv = convective_and_conductive_flows(&s, &d, &c);
        // 8.01 · 199.5 · 2
        assert!((conv.q_h_si - 3195.99).abs() < 1e-9);
        // 6.86 · 199.5 · 1
        assert!((conv.q_k - 1368.57).abs() < 1e-9);
    }

    #[test]
    fn shell_emission_value() {
        let c = ModelConstants::default();
        let mut d = noon();
        d.t_amb = 275.0;
        let mut s = ThermalState::isothermal(275.0);
        s.t_so = 280.0;
        let rad = radiative_flows(&s, &d, &c);
        let expected = 5.67e-8 * 199.5 * (280f64.powi(4) - 275f64.powi(4));
        assert!((rad.q_r_so - expected).abs() < 1e-9);
        assert!((rad.q_r_so - 4840.0).abs() < 10.0);
    }

    #[test]
    fn door_loss_reference_value() {
        let c = ModelConstants::default().with_design(DesignVariant::hp().with_air_curtains());
        let mut d = noon();
        d.t_amb = 275.15;
        d.door_fraction = 1.0;
        let mut u = ControlInput::OFF;
        let exact = door_exchange(295.15, &d, &u, &c, DoorModel::Exact);
        // 1.25 · 0.6 · sqrt(9.81 · 1.95³) · 4.42 / 3 · sqrt(20 / 275.15) · 20 · 1005
        let oracle = 1.25 * 0.6 * (9.81f64 * 1.95f64.powi(3)).sqrt() * 4.42 / 3.0
            * (20.0f64 / 275.15).sqrt()
            * 20.0
            * 1005.0;
        assert!((exact - oracle).abs() < 1e-9 * oracle);
        assert!((exact - 51_100.0).abs() < 100.0);
        u.air_curtain = true;
        let curtained = door_exchange(295.15, &d, &u, &c, DoorModel::Exact);
        assert!((curtained - 0.4 * exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn curtain_ignored_when_not_installed() {
        let c = ModelConstants::default().with_design(DesignVariant::hp());
        let mut d = noon();
        d.door_fraction = 0.5;
        let u = ControlInput {
            air_curtain: true,
            ..ControlInput::OFF
        };
        assert_eq!(air_curtain_power(&d, &u, &c), 0.0);
        let open = door_exchange(d.t_amb + 10.0, &d, &u, &c, DoorModel::Exact);
        let closed = door_exchange(d.t_amb + 10.0, &d, &ControlInput::OFF, &c, DoorModel::Exact);
        assert_eq!(open, closed);
    }

    #[test]
    fn door_loss_vanishes_without_driving_difference() {
        let c = ModelConstants::default();
        let mut d = noon();
        d.door_fraction = 1.0;
        for m in [DoorModel::Exact, DoorModel::Smooth] {
            assert_eq!(door_exchange(d.t_amb, &d, &ControlInput::OFF, &c, m), 0.0);
        }
    }

    #[test]
    fn smooth_door_law_converges_to_exact() {
        let c = ModelConstants::default();
        let mut d = noon();
        d.door_fraction = 1.0;
        let u = ControlInput::OFF;
        let mut prev_gap = f64::INFINITY;
        for k in 0..=400 {
            let dt = 2.0 + 0.1 * k as f64;
            for sign in [1.0, -1.0] {
                let exact = door_exchange(d.t_amb + sign * dt, &d, &u, &c, DoorModel::Exact);
                let smooth = door_exchange(d.t_amb + sign * dt, &d, &u, &c, DoorModel::Smooth);
                assert!(((smooth - exact) / exact).abs() < 0.01, "dt = {dt}");
            }
            let exact = door_exchange(d.t_amb + dt, &d, &u, &c, DoorModel::Exact);
            let smooth = door_exchange(d.t_amb + dt, &d, &u, &c, DoorModel::Smooth);
            let gap = ((smooth - exact) / exact).abs();
            assert!(gap <= prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn smooth_sqrt_values() {
        assert!((smooth_sqrt(0.0) - 0.01f64.powf(0.25)).abs() < 1e-15);
        assert!((smooth_sqrt(0.0) - 0.316_227_766).abs() < 1e-9);
        assert!((smooth_sqrt(25.0) - 5.0).abs() / 5.0 < 1e-3);
        for x in [0.1, 1.0, 3.7, 40.0] {
            assert_eq!(smooth_sqrt(x), smooth_sqrt(-x));
        }
    }

    #[test]
    fn air_curtain_power_is_linear_in_door_fraction() {
        let c = ModelConstants::default();
        let mut d = noon();
        let on = ControlInput {
            air_curtain: true,
            ..ControlInput::OFF
        };
        assert_eq!(air_curtain_power(&d, &ControlInput::OFF, &c), 0.0);
        assert_eq!(air_curtain_power(&d, &on, &c), 0.0);
        d.door_fraction = 0.5;
        assert_eq!(air_curtain_power(&d, &on, &c), 510.0);
    }

    #[test]
    fn solar_gains_limits() {
        let c = ModelConstants::default();
        let mut d = noon();
        d.i_dni = 800.0;
        d.i_dhi = 100.0;
        let zenith = solar_gains(&d, std::f64::consts::FRAC_PI_2, &c);
        assert!((zenith.i_roof - 900.0).abs() < 1e-9);
        assert!((zenith.i_wall - 50.0).abs() < 1e-9);
        d.shadow_fraction = 1.0;
        let shaded = solar_gains(&d, 0.5, &c);
        assert_eq!([shaded.q_sol_so, shaded.q_sol_int, shaded.q_sol_si], [0.0; 3]);
        d.shadow_fraction = 0.0;
        let night = solar_gains(&d, -0.2, &c);
        assert_eq!(night.i_roof, 100.0);
        assert_eq!(night.i_wall, 50.0);
    }

    #[test]
    fn solar_gains_hand_evaluation() {
        let c = ModelConstants::default();
        let mut d = noon();
        d.i_dni = 800.0;
        d.i_dhi = 100.0;
        let beta = 30f64.to_radians();
        let g = solar_gains(&d, beta, &c);
        // Roof: sin 30° · 800 + 100 = 500. Wall: cos 30° / π · 800 + 50.
        let i_roof = 500.0;
        let i_wall = 0.866_025_403_784_438_6 * 800.0 / std::f64::consts::PI + 50.0;
        assert!((g.i_roof - i_roof).abs() < 1e-9);
        assert!((g.i_wall - i_wall).abs() < 1e-9);
        let q_so = 48.6 * i_roof * 0.30 * (1.0 - 0.66) + 102.2 * i_wall * (1.0 - 0.354) * 0.30;
        let transmitted = 102.2 * i_wall * 0.354 * 0.46;
        assert!((g.q_sol_so - q_so).abs() < 1e-9);
        assert!((g.q_sol_int - 0.3 * transmitted).abs() < 1e-9);
        assert!((g.q_sol_si - 0.7 * transmitted).abs() < 1e-9);
    }

    #[test]
    fn hvac_heat_by_heater_kind() {
        let d = noon();
        let s = ThermalState::isothermal(celsius_to_kelvin(20.0));
        let heat = ControlInput {
            p_hc: 5000.0,
            mode: HvacMode::Heating,
            ..ControlInput::OFF
        };
        let ptc = ModelConstants::default().with_design(DesignVariant::ptc());
        assert_eq!(hvac_heat_and_cop(&heat, &s, &d, &ptc).unwrap(), (5000.0, 1.0));
        let hp = ModelConstants::default().with_design(DesignVariant::hp());
        let (q, gamma) = hvac_heat_and_cop(&heat, &s, &d, &hp).unwrap();
        assert!(gamma > 1.0 && (q - gamma * 5000.0).abs() < 1e-9);
        let passive = ControlInput {
            p_hc: 5000.0,
            ..ControlInput::OFF
        };
        assert_eq!(hvac_heat_and_cop(&passive, &s, &d, &hp).unwrap().0, 0.0);
        let cooling_only = ModelConstants::default().with_design(DesignVariant {
            heater: None,
            radiant_heaters: false,
            air_curtains: false,
        });
        assert!(matches!(
            hvac_heat_and_cop(&heat, &s, &d, &cooling_only),
            Err(ModelError::NoHeater)
        ));
    }

    #[test]
    fn internal_gains_values() {
        let c = ModelConstants::default();
        let mut d = noon();
        assert_eq!(internal_gains(&d, &c).0, 0.0);
        d.n_pass = 10.0;
        assert!((internal_gains(&d, &c).0 - 1253.0).abs() < 1e-9);
        d.n_pass = 12.4;
        assert!((internal_gains(&d, &c).0 - 1553.72).abs() < 1e-9);
    }

    #[test]
    fn isothermal_equilibrium_has_zero_derivatives() {
        let c = ModelConstants {
            other_heat: 0.0,
            ..Default::default()
        };
        let d = noon();
        let s = ThermalState::isothermal(d.t_amb);
        let rates = ode_rhs(&s, &ControlInput::OFF, &d, &c).unwrap();
        assert_eq!(rates, [0.0; 6]);
    }

    #[test]
    fn radiant_power_enters_panel_balance_only() {
        let c = ModelConstants::default();
        let d = noon();
        let s = ThermalState::isothermal(d.t_amb);
        let base = ode_rhs(&s, &ControlInput::OFF, &d, &c).unwrap();
        let u = ControlInput {
            p_rh: 1000.0,
            radiant: true,
            ..ControlInput::OFF
        };
        let with = ode_rhs(&s, &u, &d, &c).unwrap();
        assert!((with[0] - base[0] - 1000.0 / c.cap_rh).abs() < 1e-15);
        assert_eq!(&with[1..], &base[1..]);
    }

    #[test]
    fn energy_bookkeeping_closes() {
        let c = ModelConstants::default().with_design(DesignVariant::hp().with_air_curtains());
        let mut d = noon();
        d.i_dni = 600.0;
        d.i_dhi = 120.0;
        d.n_pass = 23.0;
        d.door_fraction = 0.3;
        d.shadow_fraction = 0.2;
        let s = ThermalState {
            t_rh: 330.0,
            t_int: 290.0,
            t_cab: 293.0,
            t_si: 284.0,
            t_so: 279.0,
            q_hc: 4200.0,
        };
        let u = ControlInput {
            p_hc: 1500.0,
            p_rh: 900.0,
            mode: HvacMode::Heating,
            air_curtain: true,
            radiant: true,
        };
        let beta = 0.3;
        let f = heat_flows(&s, &u, &d, beta, &c, DoorModel::Exact).unwrap();
        let r = ode_rhs_at(&s, &u, &d, beta, &c, DoorModel::Exact).unwrap();
        let stored = r[0] * c.cap_rh
            + r[1] * c.cap_interior
            + r[2] * c.cap_cabin
            + r[3] * c.cap_shell_inner
            + r[4] * c.cap_shell_outer;
        let boundary = boundary_flow(&f, u.p_rh, s.q_hc);
        assert!((stored - boundary).abs() < 1e-9 * boundary_throughput(&f, u.p_rh, s.q_hc));
    }

    #[test]
    fn filter_relaxes_toward_steady_heat() {
        let c = ModelConstants::default().with_design(DesignVariant::ptc());
        let d = noon();
        let s = ThermalState::isothermal(d.t_amb);
        let u = ControlInput {
            p_hc: 2000.0,
            mode: HvacMode::Heating,
            ..ControlInput::OFF
        };
        let r = ode_rhs(&s, &u, &d, &c).unwrap();
        assert!((r[5] - 2000.0 / 20.0).abs() < 1e-12);
    }
}
