use chrono::DateTime;

use super::*;
use crate::model::{celsius_to_kelvin, DesignVariant, Disturbance, HvacMode, ModelConstants};

fn sample(ts: &str, t_amb_c: f64) -> Disturbance {
    let ts = DateTime::parse_from_rfc3339(ts).unwrap();
    Disturbance::quiescent(ts, celsius_to_kelvin(t_amb_c))
}

fn cold() -> Disturbance {
    let mut d = sample("2022-12-10T08:00:00+01:00", -2.0);
    d.n_pass = 25.0;
    d.door_fraction = 0.15;
    d.i_dhi = 40.0;
    d
}

fn hot() -> Disturbance {
    let mut d = sample("2022-07-20T14:00:00+02:00", 32.0);
    d.n_pass = 40.0;
    d.door_fraction = 0.1;
    d.i_dni = 700.0;
    d.i_dhi = 150.0;
    d
}

fn solver(design: DesignVariant) -> SteadySolver {
    SteadySolver::new(ModelConstants::default().with_design(design)).unwrap()
}

#[test]
fn cold_sample_heats_to_lower_bound() {
    let s = solver(DesignVariant::hp());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let sol = s.optimize_sample(&cold(), &req).unwrap();
    assert!(sol.feasible);
    assert_eq!(sol.inputs.mode, HvacMode::Heating);
    assert!((sol.psi - req.psi_min).abs() < 1e-6);
    assert!(sol.q_heat > 0.0 && sol.q_cool == 0.0);
    assert!(sol.residual_norm <= 1e-6);
    assert!((sol.p_hvac - (sol.p_hc + sol.p_rh + sol.p_aircurt)).abs() < 1e-9);
}

#[test]
fn hot_sample_cools_to_upper_bound() {
    let s = solver(DesignVariant::hp());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let sol = s.optimize_sample(&hot(), &req).unwrap();
    assert!(sol.feasible);
    assert_eq!(sol.inputs.mode, HvacMode::Cooling);
    assert!((sol.psi - 0.5).abs() < 1e-6);
    assert!(sol.q_cool < 0.0 && sol.q_heat == 0.0);
}

#[test]
fn heating_on_hot_sample_has_wrong_sign() {
    let s = solver(DesignVariant::hp());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let heat = Candidate {
        mode: HvacMode::Heating,
        air_curtain: false,
        radiant: false,
    };
    let out = s.solve_candidate(heat, &hot(), &req).unwrap();
    assert!(matches!(out, Err(Rejection::WrongSign { .. })), "{out:?}");
}

#[test]
fn mild_sample_is_passive_without_power() {
    let s = solver(DesignVariant::hp().with_air_curtains());
    let mut d = sample("2022-05-10T11:00:00+02:00", 18.0);
    d.n_pass = 15.0;
    d.door_fraction = 0.1;
    d.i_dni = 200.0;
    d.i_dhi = 100.0;
    let req = ComfortRequirement::symmetric(2.5).unwrap();
    let sol = s.optimize_sample(&d, &req).unwrap();
    assert_eq!(sol.inputs.mode, HvacMode::Passive);
    assert!(!sol.inputs.air_curtain);
    assert_eq!(sol.p_hvac, 0.0);
}

#[test]
fn identical_inputs_give_identical_solutions() {
    let s = solver(DesignVariant::hp().with_air_curtains().with_radiant_heaters());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let a = s.optimize_sample(&cold(), &req).unwrap();
    let b = s.optimize_sample(&cold(), &req).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tighter_box_never_needs_less_power() {
    let s = solver(DesignVariant::hp().with_air_curtains());
    for d in [cold(), hot()] {
        let mut prev = 0.0;
        for hw in [2.0, 1.5, 1.0, 0.5, 0.2] {
            let sol = s.optimize_sample(&d, &ComfortRequirement::symmetric(hw).unwrap()).unwrap();
            assert!(sol.p_hvac >= prev, "{hw}: {} < {prev}", sol.p_hvac);
            prev = sol.p_hvac;
        }
    }
}

#[test]
fn winning_curtain_strictly_beats_curtain_off() {
    let s = solver(DesignVariant::hp().with_air_curtains());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let mut d = cold();
    for door in [0.0, 0.05, 0.2, 0.5] {
        d.door_fraction = door;
        let sol = s.optimize_sample(&d, &req).unwrap();
        if sol.inputs.air_curtain {
            let off = Candidate {
                air_curtain: false,
                ..sol.candidate()
            };
            let alt = s.solve_candidate(off, &d, &req).unwrap().unwrap();
            assert!(sol.p_hvac < alt.p_hvac);
        }
    }
}

#[test]
fn perturbed_solution_has_residual() {
    let s = solver(DesignVariant::hp());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let d = cold();
    let sol = s.optimize_sample(&d, &req).unwrap();
    let layout = Layout {
        candidate: sol.candidate(),
        heat: HeatSpec::PinnedPmv(req.psi_min),
        t_rh_target: s.constants.rh_target(),
    };
    let mut x = layout.encode(&sol.state, sol.p_rh);
    let beta = crate::model::solar_altitude(&d.timestamp, d.latitude, d.longitude);
    let ctx = s.comfort_context(&d).unwrap();
    let pmv = |st: &crate::model::ThermalState| s.cabin_pmv(st, &ctx).ok();
    let r = layout.residuals(&x, &d, beta, &s.constants, pmv).unwrap();
    assert!(r.amax() <= 1e-6);
    x[2] += 1.0;
    let r = layout.residuals(&x, &d, beta, &s.constants, pmv).unwrap();
    assert!(r.amax() > 1e-3);
}

#[test]
fn infeasible_sample_falls_back_to_power_limit() {
    let c = ModelConstants {
        p_hc_max: Some(500.0),
        ..ModelConstants::default().with_design(DesignVariant::hp())
    };
    let s = SteadySolver::new(c).unwrap();
    let mut d = cold();
    d.t_amb = celsius_to_kelvin(-15.0);
    let sol = s.optimize_sample(&d, &ComfortRequirement::symmetric(0.5).unwrap()).unwrap();
    assert!(!sol.feasible);
    assert_eq!(sol.inputs.mode, HvacMode::Heating);
    assert_eq!(sol.p_hc, 500.0);
    assert!(sol.psi < -0.5);
}

#[test]
fn radiant_candidate_pins_panel_temperature() {
    let s = solver(DesignVariant::ptc().with_radiant_heaters());
    let req = ComfortRequirement::symmetric(0.5).unwrap();
    let rh = Candidate {
        mode: HvacMode::Heating,
        air_curtain: false,
        radiant: true,
    };
    let sol = s.solve_candidate(rh, &cold(), &req).unwrap().unwrap();
    assert_eq!(sol.state.t_rh, s.constants.rh_target());
    assert!(sol.p_rh > 0.0);
}

#[test]
fn requirement_validation() {
    assert!(ComfortRequirement::new(0.5, -0.5).is_err());
    assert!(ComfortRequirement::new(-3.5, 0.0).is_err());
    assert!(ComfortRequirement::symmetric(0.5).unwrap().contains(0.5));
}

#[test]
fn smooth_sqrt_reexported() {
    assert!((smooth_sqrt(0.0) - 0.316_227_766_016_837_94).abs() < 1e-15);
}
