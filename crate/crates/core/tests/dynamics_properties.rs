use chrono::{DateTime, Duration};
use proptest::prelude::*;

use ebus_hvac::dynamics::{
    mode_fsm_step, Controller, ModeProfiles, MissionTrace, SetpointProfile, SimOptions, Simulator,
};
use ebus_hvac::io::{synth_mission, SyntheticProfile};
use ebus_hvac::model::{celsius_to_kelvin, DesignVariant, Disturbance, HvacMode, ModelConstants, ThermalState};
use ebus_hvac::steady::{ComfortRequirement, SteadySolver};
use ebus_hvac::validation::replay_mission;

fn night_trace(t_amb: f64, seconds: i64) -> MissionTrace {
    let t0 = DateTime::parse_from_rfc3339("2022-11-03T01:00:00+01:00").unwrap();
    let samples = (0..=seconds)
        .step_by(10)
        .map(|s| Disturbance::quiescent(t0 + Duration::seconds(s), t_amb))
        .collect();
    MissionTrace::new("night", samples).unwrap()
}

fn quiet(c: ModelConstants) -> Simulator {
    Simulator::new(c).unwrap().with_options(SimOptions {
        record_pmv: false,
        ..SimOptions::default()
    })
}

#[test]
fn heat_flow_lags_a_power_step_by_the_filter_time_constant() {
    let c = ModelConstants::default().with_design(DesignVariant::ptc());
    let t_amb = celsius_to_kelvin(5.0);
    let sim = quiet(c);
    let step = Controller::Fixed {
        mode: HvacMode::Heating,
        p_hc: 5000.0,
        air_curtain: false,
        radiant: false,
    };
    let traj = sim
        .simulate_from(&night_trace(t_amb, 120), step, ThermalState::isothermal(t_amb))
        .unwrap();
    let at_20 = traj.points.iter().find(|p| p.t == 20.0).unwrap();
    let share = at_20.state.q_hc / 5000.0;
    let expected = 1.0 - (-1.0f64).exp();
    assert!((share - expected).abs() <= 0.02 * expected, "{share}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn unforced_isothermal_bus_stays_put(t_c in -20.0f64..35.0) {
        let c = ModelConstants {
            other_heat: 0.0,
            ..ModelConstants::default()
        };
        let t = celsius_to_kelvin(t_c);
        let passive = Controller::Fixed {
            mode: HvacMode::Passive,
            p_hc: 0.0,
            air_curtain: false,
            radiant: false,
        };
        let traj = quiet(c).simulate_from(&night_trace(t, 3600), passive, ThermalState::isothermal(t)).unwrap();
        for p in &traj.points {
            for x in p.state.temperatures() {
                prop_assert!((x - t).abs() < 1e-9, "{x} vs {t}");
            }
        }
    }

    /// Heating and cooling are never adjacent states.
    #[test]
    fn mode_machine_passes_through_passive(
        walk in prop::collection::vec((-3.0f64..3.0, -15.0f64..35.0), 1..400),
        band in 0.0f64..2.0,
    ) {
        let profiles = ModeProfiles {
            heating: SetpointProfile::Constant { value: 20.0 },
            cooling: SetpointProfile::Hinge { breakpoint: 25.0, value: 24.0, slope_left: 0.0, slope_right: 0.3 },
            hysteresis: band,
        };
        let mut mode = HvacMode::Passive;
        let mut t_cab = celsius_to_kelvin(22.0);
        for (dt, t_amb) in walk {
            t_cab += dt;
            let next = mode_fsm_step(mode, t_cab, celsius_to_kelvin(t_amb), &profiles);
            prop_assert!(!matches!(
                (mode, next),
                (HvacMode::Heating, HvacMode::Cooling) | (HvacMode::Cooling, HvacMode::Heating)
            ));
            mode = next;
        }
    }
}

fn replay_day(dt: f64) -> Vec<[f64; 5]> {
    let c = ModelConstants::default();
    let trace = synth_mission(SyntheticProfile::WinterDay, 7, &c).unwrap();
    let solver = SteadySolver::new(c.clone()).unwrap();
    let sim = Simulator::new(c).unwrap().with_options(SimOptions {
        dt,
        ..SimOptions::default()
    });
    let req = ComfortRequirement::symmetric(1.0).unwrap();
    let traj = replay_mission(&trace, &solver, &sim, &req).unwrap().1;
    traj.points
        .iter()
        .filter(|p| p.t.fract() == 0.0)
        .map(|p| p.state.temperatures())
        .collect()
}

#[test]
fn quarter_step_agrees_with_unit_step_over_a_day() {
    let a = replay_day(1.0);
    let b = replay_day(0.25);
    assert_eq!(a.len(), b.len());
    let worst = a
        .iter()
        .zip(&b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn held_inputs_need_not_be_sampled_densely() {
    // A trace held over 2 s gives the same trajectory whether it is given
    // every 2 s or duplicated at 1 s.
    let c = ModelConstants::default();
    let day = synth_mission(SyntheticProfile::SummerDay, 3, &c).unwrap();
    let sparse: Vec<Disturbance> = day.samples.iter().step_by(2).take(7200).cloned().collect();
    let mut dense: Vec<Disturbance> = sparse
        .iter()
        .flat_map(|d| {
            let mut copy = d.clone();
            copy.timestamp += Duration::seconds(1);
            [d.clone(), copy]
        })
        .collect();
    dense.pop();
    let sparse = MissionTrace::new("sparse", sparse).unwrap();
    let dense = MissionTrace::new("dense", dense).unwrap();
    assert_eq!(sparse.duration(), dense.duration());
    let fixed = Controller::Fixed {
        mode: HvacMode::Cooling,
        p_hc: 1500.0,
        air_curtain: true,
        radiant: false,
    };
    let sim = quiet(c);
    let a = sim.simulate(&sparse, fixed.clone()).unwrap();
    let b = sim.simulate(&dense, fixed).unwrap();
    assert_eq!(a.points.len(), b.points.len());
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.state, q.state, "t = {}", p.t);
    }
}
