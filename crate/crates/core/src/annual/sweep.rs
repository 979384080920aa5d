use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::annual_mean;
use super::{AnnualError, Sample};
use crate::model::{DesignVariant, ModelConstants};
use crate::steady::{ComfortRequirement, SteadySolver, SteadyStateSolution};

/// A PMV within this distance of a bound counts as bound-active.
pub const BOUND_ACTIVE_TOL: f64 = 0.01;

/// Annual result of one design under one comfort requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub design: String,
    pub psi_min: f64,
    pub psi_max: f64,
    /// Weighted annual mean HVAC power [W].
    pub annual_mean_power: f64,
    pub samples: usize,
    /// Samples where no candidate met the requirement.
    pub infeasible: usize,
    pub frac_lower_active: f64,
    pub frac_upper_active: f64,
    pub frac_interior: f64,
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub design: DesignVariant,
    pub requirement: ComfortRequirement,
    pub row: ParetoRow,
    pub solutions: Vec<SteadyStateSolution>,
}

/// Optimizes every sample for every design and requirement.
pub fn pareto_sweep(
    samples: &[Sample],
    weights: &[f64],
    requirements: &[ComfortRequirement],
    designs: &[DesignVariant],
    base: &ModelConstants,
) -> Result<Vec<SweepCell>, AnnualError> {
    if requirements.len() < 2 {
        return Err(AnnualError::InvalidInput(
            "a sweep needs at least two comfort requirements".into(),
        ));
    }
    if samples.len() != weights.len() {
        return Err(AnnualError::LengthMismatch {
            values: samples.len(),
            weights: weights.len(),
        });
    }
    let mut cells = Vec::with_capacity(designs.len() * requirements.len());
    for design in designs {
        let solver = SteadySolver::new(base.clone().with_design(design.clone()))?;
        for req in requirements {
            let solutions = solve_all(&solver, samples, req)?;
            let row = summarize(&design.to_string(), req, &solutions, weights)?;
            log::info!(
                "{} [{:+.2}, {:+.2}]: {:.0} W, {} infeasible",
                row.design,
                req.psi_min,
                req.psi_max,
                row.annual_mean_power,
                row.infeasible
            );
            cells.push(SweepCell {
                design: design.clone(),
                requirement: *req,
                row,
                solutions,
            });
        }
    }
    Ok(cells)
}

/// Optimizes all samples in parallel, keeping the input order.
pub fn solve_all(
    solver: &SteadySolver,
    samples: &[Sample],
    req: &ComfortRequirement,
) -> Result<Vec<SteadyStateSolution>, AnnualError> {
    samples
        .par_iter()
        .map(|s| {
            solver
                .optimize_sample(&s.disturbance, req)
                .map_err(|e| AnnualError::Sample {
                    id: s.id.clone(),
                    source: e,
                })
        })
        .collect()
}

pub fn summarize(
    design: &str,
    req: &ComfortRequirement,
    solutions: &[SteadyStateSolution],
    weights: &[f64],
) -> Result<ParetoRow, AnnualError> {
    let power: Vec<f64> = solutions.iter().map(|s| s.p_hvac).collect();
    let n = solutions.len().max(1) as f64;
    let count = |f: &dyn Fn(&SteadyStateSolution) -> bool| solutions.iter().filter(|s| f(s)).count();
    let lower = count(&|s| s.feasible && (s.psi - req.psi_min).abs() <= BOUND_ACTIVE_TOL);
    let upper = count(&|s| s.feasible && (s.psi - req.psi_max).abs() <= BOUND_ACTIVE_TOL);
    let infeasible = count(&|s| !s.feasible);
    Ok(ParetoRow {
        design: design.to_string(),
        psi_min: req.psi_min,
        psi_max: req.psi_max,
        annual_mean_power: annual_mean(&power, weights)?,
        samples: solutions.len(),
        infeasible,
        frac_lower_active: lower as f64 / n,
        frac_upper_active: upper as f64 / n,
        frac_interior: (solutions.len() - lower - upper - infeasible) as f64 / n,
    })
}

/// Whether box `a` contains box `b`.
pub fn is_looser(a: &ComfortRequirement, b: &ComfortRequirement) -> bool {
    a.psi_min <= b.psi_min && a.psi_max >= b.psi_max
}

/// Pairs of rows of the same design where a looser box costs more.
pub fn dominated_pairs(rows: &[ParetoRow]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let looser = a.psi_min <= b.psi_min && a.psi_max >= b.psi_max && i != j;
            if a.design == b.design && looser && a.annual_mean_power > b.annual_mean_power {
                out.push((i, j));
            }
        }
    }
    out
}
