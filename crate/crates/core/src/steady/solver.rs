use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::newton::{newton, NewtonOptions};
use super::residuals::{Candidate, HeatSpec, Layout};
use super::SteadyError;
use crate::comfort::{CabinComfort, ClothingModel, ComfortContext, SurrogateBank};
use crate::model::{
    air_curtain_power, boundary_flow, celsius_to_kelvin, cop, heat_flows, solar_altitude,
    ControlInput, Disturbance, DoorModel, HvacMode, ModelConstants, ThermalState,
};

/// Box constraint on the cabin-average PMV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortRequirement {
    pub psi_min: f64,
    pub psi_max: f64,
}

impl ComfortRequirement {
    pub fn new(psi_min: f64, psi_max: f64) -> Result<Self, SteadyError> {
        let ok = psi_min < psi_max && psi_min >= -3.0 && psi_max <= 3.0;
        if !ok {
            return Err(SteadyError::InvalidRequirement { psi_min, psi_max });
        }
        Ok(Self { psi_min, psi_max })
    }

    /// `[-half_width, +half_width]`.
    pub fn symmetric(half_width: f64) -> Result<Self, SteadyError> {
        Self::new(-half_width, half_width)
    }

    pub fn contains(&self, psi: f64) -> bool {
        psi >= self.psi_min && psi <= self.psi_max
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.psi_max - self.psi_min)
    }
}

/// How the PMV is evaluated inside the solver.
#[derive(Debug, Clone, Default)]
pub enum PmvEvaluator {
    #[default]
    Exact,
    Surrogate(Arc<SurrogateBank>),
}

/// Optimal steady operating point of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateSolution {
    pub inputs: ControlInput,
    /// Equilibrium state; `q_hc` is the delivered heat flow.
    pub state: ThermalState,
    pub q_heat: f64,
    pub q_cool: f64,
    pub p_hvac: f64,
    pub p_hc: f64,
    pub p_rh: f64,
    pub p_aircurt: f64,
    pub cop: f64,
    /// Achieved cabin-average PMV.
    pub psi: f64,
    /// Clothing insulation used for the sample [clo].
    pub r_clo: f64,
    pub feasible: bool,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SteadyStateSolution {
    pub fn candidate(&self) -> Candidate {
        Candidate {
            mode: self.inputs.mode,
            air_curtain: self.inputs.air_curtain,
            radiant: self.inputs.radiant,
        }
    }
}

/// Reason a candidate was discarded.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NotConverged { residual_norm: f64 },
    WrongSign { q_hc: f64 },
    PowerLimit { p_hc: f64, limit: f64 },
    NegativeRadiantPower { p_rh: f64 },
    ComfortOutside { psi: f64 },
}

/// Steady-state optimizer for one set of model constants.
#[derive(Debug, Clone)]
pub struct SteadySolver {
    pub constants: ModelConstants,
    pub cabin: CabinComfort,
    pub clothing: ClothingModel,
    pub evaluator: PmvEvaluator,
    pub newton: NewtonOptions,
}

impl SteadySolver {
    /// Solver with the default seeded passenger placement and exact PMV.
    pub fn new(constants: ModelConstants) -> Result<Self, SteadyError> {
        constants.validate()?;
        let cabin = CabinComfort::sampled(&constants)?;
        Ok(Self {
            constants,
            cabin,
            clothing: ClothingModel::default(),
            evaluator: PmvEvaluator::Exact,
            newton: NewtonOptions::default(),
        })
    }

    pub fn with_cabin(mut self, cabin: CabinComfort) -> Self {
        self.cabin = cabin;
        self
    }

    pub fn with_clothing(mut self, clothing: ClothingModel) -> Self {
        self.clothing = clothing;
        self
    }

    pub fn with_evaluator(mut self, evaluator: PmvEvaluator) -> Self {
        self.evaluator = evaluator;
        self
    }

    pub fn comfort_context(&self, d: &Disturbance) -> Result<ComfortContext, SteadyError> {
        let r_clo = self.clothing.insulation(d.t_amb)?;
        Ok(ComfortContext::from_constants(&self.constants, r_clo))
    }

    /// Cabin-average PMV of a state.
    pub fn cabin_pmv(&self, s: &ThermalState, ctx: &ComfortContext) -> Result<f64, SteadyError> {
        match &self.evaluator {
            PmvEvaluator::Exact => Ok(self.cabin.mean_pmv(s.t_cab, s.t_rh, s.t_int, s.t_si, ctx)?),
            PmvEvaluator::Surrogate(bank) => {
                let t_mr = self.cabin.mean_radiant_temperatures(s.t_rh, s.t_int, s.t_si);
                let sum: f64 = t_mr.iter().map(|t| bank.eval(ctx.r_clo, s.t_cab, *t)).sum();
                Ok(sum / t_mr.len() as f64)
            }
        }
    }

    /// Candidates admissible for the installed hardware, in a fixed order.
    pub fn candidates(&self) -> Vec<Candidate> {
        let design = &self.constants.design;
        let mut out = Vec::with_capacity(12);
        for mode in [HvacMode::Passive, HvacMode::Heating, HvacMode::Cooling] {
            if mode == HvacMode::Heating && design.heater.is_none() {
                continue;
            }
            for air_curtain in [false, true] {
                if air_curtain && !design.air_curtains {
                    continue;
                }
                for radiant in [false, true] {
                    if radiant && !design.radiant_heaters {
                        continue;
                    }
                    out.push(Candidate {
                        mode,
                        air_curtain,
                        radiant,
                    });
                }
            }
        }
        out
    }

    /// Solves the square system of one candidate and checks feasibility.
    pub fn solve_candidate(
        &self,
        candidate: Candidate,
        d: &Disturbance,
        req: &ComfortRequirement,
    ) -> Result<Result<SteadyStateSolution, Rejection>, SteadyError> {
        let heat = match candidate.mode {
            HvacMode::Passive => HeatSpec::Off,
            HvacMode::Heating => HeatSpec::PinnedPmv(req.psi_min),
            HvacMode::Cooling => HeatSpec::PinnedPmv(req.psi_max),
        };
        let sol = match self.solve_layout(candidate, heat, d)? {
            Ok(sol) => sol,
            Err(r) => return Ok(Err(r)),
        };
        Ok(self.check(sol, req))
    }

    fn check(
        &self,
        sol: SteadyStateSolution,
        req: &ComfortRequirement,
    ) -> Result<SteadyStateSolution, Rejection> {
        let q = sol.state.q_hc;
        match sol.inputs.mode {
            HvacMode::Heating if q < 0.0 => return Err(Rejection::WrongSign { q_hc: q }),
            HvacMode::Cooling if q > 0.0 => return Err(Rejection::WrongSign { q_hc: q }),
            HvacMode::Passive if !req.contains(sol.psi) => {
                return Err(Rejection::ComfortOutside { psi: sol.psi })
            }
            _ => {}
        }
        if let Some(limit) = self.constants.power_limit() {
            if sol.p_hc > limit {
                return Err(Rejection::PowerLimit {
                    p_hc: sol.p_hc,
                    limit,
                });
            }
        }
        if sol.p_rh < 0.0 {
            return Err(Rejection::NegativeRadiantPower { p_rh: sol.p_rh });
        }
        Ok(sol)
    }

    fn initial_guesses(&self, mode: HvacMode, t_amb: f64) -> [f64; 3] {
        match mode {
            HvacMode::Heating => [22.0, 18.0, 27.0].map(celsius_to_kelvin),
            HvacMode::Cooling => [26.0, 30.0, 21.0].map(celsius_to_kelvin),
            HvacMode::Passive => [t_amb + 3.0, t_amb + 10.0, celsius_to_kelvin(22.0)],
        }
    }

    fn initial_state(
        &self,
        layout: &Layout,
        t_cab: f64,
        d: &Disturbance,
        beta: f64,
    ) -> Option<(ThermalState, f64)> {
        let c = &self.constants;
        let t_amb = d.t_amb;
        let mut s = ThermalState {
            t_rh: t_cab,
            t_int: t_cab,
            t_cab,
            t_si: t_amb + 0.6 * (t_cab - t_amb),
            t_so: t_amb + 0.2 * (t_cab - t_amb),
            q_hc: 0.0,
        };
        let mut p_rh = 0.0;
        if layout.candidate.radiant {
            s.t_rh = layout.t_rh_target;
            p_rh = c.h_rh * c.area_rh * (s.t_rh - t_cab)
                + c.sigma * c.area_rh * (s.t_rh.powi(4) - s.t_si.powi(4));
        }
        if let HeatSpec::PinnedPmv(_) = layout.heat {
            let u = ControlInput {
                air_curtain: layout.candidate.air_curtain,
                ..ControlInput::OFF
            };
            let f = heat_flows(&s, &u, d, beta, c, DoorModel::Smooth).ok()?;
            s.q_hc = -boundary_flow(&f, p_rh, 0.0);
        }
        Some((s, p_rh))
    }

    /// Newton solve of one candidate with the heat flow specified by `heat`,
    /// without feasibility checks.
    pub fn solve_layout(
        &self,
        candidate: Candidate,
        heat: HeatSpec,
        d: &Disturbance,
    ) -> Result<Result<SteadyStateSolution, Rejection>, SteadyError> {
        let c = &self.constants;
        let ctx = self.comfort_context(d)?;
        let beta = solar_altitude(&d.timestamp, d.latitude, d.longitude);
        let layout = Layout {
            candidate,
            heat,
            t_rh_target: c.rh_target(),
        };
        let scale = layout.scale();
        let pmv = |s: &ThermalState| self.cabin_pmv(s, &ctx).ok();
        let mut best_norm = f64::INFINITY;
        for t_cab in self.initial_guesses(candidate.mode, d.t_amb) {
            let Some((s0, p_rh0)) = self.initial_state(&layout, t_cab, d, beta) else {
                continue;
            };
            let x0 = layout.encode(&s0, p_rh0);
            let f = |x: &nalgebra::DVector<f64>| layout.residuals(x, d, beta, c, pmv);
            let Some(out) = newton(f, x0, &scale, &self.newton) else {
                continue;
            };
            best_norm = best_norm.min(out.residual_norm);
            if !out.accepted {
                continue;
            }
            let Some(dec) = layout.decode(&out.x, d, c) else {
                continue;
            };
            let psi = self.cabin_pmv(&dec.state, &ctx)?;
            let (p_hc, gamma) = match heat {
                HeatSpec::Off => (0.0, 1.0),
                HeatSpec::FixedPower(p) => (p, cop(candidate.mode, dec.state.t_cab, d.t_amb, c)?),
                HeatSpec::PinnedPmv(_) => {
                    let gamma = cop(candidate.mode, dec.state.t_cab, d.t_amb, c)?;
                    (dec.q_hc.abs() / gamma, gamma)
                }
            };
            let inputs = ControlInput {
                p_hc,
                p_rh: dec.p_rh,
                mode: candidate.mode,
                air_curtain: candidate.air_curtain,
                radiant: candidate.radiant,
            };
            let p_aircurt = air_curtain_power(d, &inputs, c);
            return Ok(Ok(SteadyStateSolution {
                inputs,
                state: dec.state,
                q_heat: dec.q_hc.max(0.0),
                q_cool: dec.q_hc.min(0.0),
                p_hvac: p_hc + dec.p_rh + p_aircurt,
                p_hc,
                p_rh: dec.p_rh,
                p_aircurt,
                cop: gamma,
                psi,
                r_clo: ctx.r_clo,
                feasible: true,
                residual_norm: out.residual_norm,
                iterations: out.iterations,
            }));
        }
        Ok(Err(Rejection::NotConverged {
            residual_norm: best_norm,
        }))
    }

    /// Minimum-power feasible operating point of one sample.
    pub fn optimize_sample(
        &self,
        d: &Disturbance,
        req: &ComfortRequirement,
    ) -> Result<SteadyStateSolution, SteadyError> {
        d.validate()?;
        let mut best: Option<SteadyStateSolution> = None;
        let mut passive_psi = None;
        for candidate in self.candidates() {
            let outcome = self.solve_candidate(candidate, d, req)?;
            if candidate.mode == HvacMode::Passive && candidate.auxiliaries() == 0 {
                passive_psi = match &outcome {
                    Ok(s) => Some(s.psi),
                    Err(Rejection::ComfortOutside { psi }) => Some(*psi),
                    Err(_) => None,
                };
            }
            if let Ok(sol) = outcome {
                if best.as_ref().is_none_or(|b| prefer(&sol, b) == Ordering::Less) {
                    best = Some(sol);
                }
            }
        }
        match best {
            Some(sol) => Ok(sol),
            None => self.fallback(d, req, passive_psi),
        }
    }

    /// Operating point at the power limit when no candidate is feasible.
    fn fallback(
        &self,
        d: &Disturbance,
        req: &ComfortRequirement,
        passive_psi: Option<f64>,
    ) -> Result<SteadyStateSolution, SteadyError> {
        let design = &self.constants.design;
        let too_cold = match passive_psi {
            Some(psi) => psi < req.psi_min,
            None => d.t_amb < celsius_to_kelvin(18.0),
        };
        let mode = if too_cold { HvacMode::Heating } else { HvacMode::Cooling };
        let attempt = match (self.constants.power_limit(), mode, design.heater) {
            (_, HvacMode::Heating, None) | (None, _, _) => None,
            (Some(limit), _, _) => Some((
                Candidate {
                    mode,
                    air_curtain: design.air_curtains,
                    radiant: design.radiant_heaters && mode == HvacMode::Heating,
                },
                HeatSpec::FixedPower(limit),
            )),
        };
        let passive = (
            Candidate {
                mode: HvacMode::Passive,
                air_curtain: false,
                radiant: false,
            },
            HeatSpec::Off,
        );
        for (candidate, heat) in attempt.into_iter().chain([passive]) {
            if let Ok(mut sol) = self.solve_layout(candidate, heat, d)? {
                sol.feasible = false;
                return Ok(sol);
            }
        }
        Err(SteadyError::NoSolution(format!(
            "no candidate converged at t_amb = {:.2} K",
            d.t_amb
        )))
    }
}

/// Ordering of two feasible solutions: lower power first, then fewer
/// auxiliaries, then passive before heating before cooling.
pub fn prefer(a: &SteadyStateSolution, b: &SteadyStateSolution) -> Ordering {
    let tol = 1e-9 * a.p_hvac.abs().max(b.p_hvac.abs()).max(1.0);
    if (a.p_hvac - b.p_hvac).abs() > tol {
        return a.p_hvac.total_cmp(&b.p_hvac);
    }
    let rank = |m: HvacMode| match m {
        HvacMode::Passive => 0,
        HvacMode::Heating => 1,
        HvacMode::Cooling => 2,
    };
    a.candidate()
        .auxiliaries()
        .cmp(&b.candidate().auxiliaries())
        .then(rank(a.inputs.mode).cmp(&rank(b.inputs.mode)))
}

/// Optimizes one sample with a default solver for `c`.
pub fn optimize_sample(
    d: &Disturbance,
    req: &ComfortRequirement,
    c: &ModelConstants,
) -> Result<SteadyStateSolution, SteadyError> {
    SteadySolver::new(c.clone())?.optimize_sample(d, req)
}
