//! Independent oracles shared by the acceptance suite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ebus_hvac::comfort::{Axis, Rect};
use ebus_hvac::model::{Disturbance, HvacMode};
use ebus_hvac::steady::{ComfortRequirement, HeatSpec, SteadySolver};

/// One row of the ISO 7730 example table: air and radiant temperature
/// [°C], air speed [m/s], relative humidity [%], met, clo, printed PMV.
pub struct IsoRow {
    pub ta: f64,
    pub tr: f64,
    pub vel: f64,
    pub rh: f64,
    pub met: f64,
    pub clo: f64,
    pub pmv: f64,
    /// The printed value cannot be reproduced by the standard's own
    /// program; this is what the program returns.
    pub program_value: Option<f64>,
}

const fn row(ta: f64, tr: f64, vel: f64, rh: f64, met: f64, clo: f64, pmv: f64) -> IsoRow {
    IsoRow {
        ta,
        tr,
        vel,
        rh,
        met,
        clo,
        pmv,
        program_value: None,
    }
}

pub fn iso_table() -> Vec<IsoRow> {
    vec![
        row(22.0, 22.0, 0.1, 60.0, 1.2, 0.5, -0.75),
        row(27.0, 27.0, 0.1, 60.0, 1.2, 0.5, 0.77),
        row(27.0, 27.0, 0.3, 60.0, 1.2, 0.5, 0.44),
        row(23.5, 25.5, 0.1, 60.0, 1.2, 0.5, -0.01),
        row(23.5, 25.5, 0.3, 60.0, 1.2, 0.5, -0.55),
        row(19.0, 19.0, 0.1, 40.0, 1.2, 1.0, -0.60),
        IsoRow {
            program_value: Some(0.362),
            ..row(23.5, 23.5, 0.1, 40.0, 1.2, 1.0, 0.50)
        },
        row(23.5, 23.5, 0.3, 40.0, 1.2, 1.0, 0.12),
        row(23.0, 21.0, 0.1, 40.0, 1.2, 1.0, 0.05),
        row(23.0, 21.0, 0.3, 40.0, 1.2, 1.0, -0.16),
        row(22.0, 22.0, 0.1, 60.0, 1.6, 0.5, 0.05),
        row(27.0, 27.0, 0.1, 60.0, 1.6, 0.5, 1.17),
        row(27.0, 27.0, 0.3, 60.0, 1.6, 0.5, 0.95),
    ]
}

fn axes(normal: Axis) -> (usize, usize, usize) {
    match normal {
        Axis::X => (0, 1, 2),
        Axis::Y => (1, 0, 2),
        Axis::Z => (2, 0, 1),
    }
}

/// View factor from `a` to the front face of `b` by cosine-weighted ray
/// casting from uniform points on `a`.
pub fn mc_view_factor(a: &Rect, b: &Rect, rays: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (na, ua, va) = axes(a.normal);
    let (nb, ub, vb) = axes(b.normal);
    let sa = if a.facing_positive { 1.0 } else { -1.0 };
    let sb = if b.facing_positive { 1.0 } else { -1.0 };
    let mut hits = 0usize;
    for _ in 0..rays {
        let mut p = [0.0; 3];
        p[na] = a.offset;
        p[ua] = rng.random_range(a.u.0..a.u.1);
        p[va] = rng.random_range(a.v.0..a.v.1);
        // Malley's method: uniform disk point lifted to the hemisphere.
        let r: f64 = rng.random::<f64>().sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        let mut d = [0.0; 3];
        d[ua] = r * phi.cos();
        d[va] = r * phi.sin();
        d[na] = sa * (1.0 - r * r).max(0.0).sqrt();
        // Must arrive at the emitting side of `b`.
        if d[nb] * sb >= 0.0 {
            continue;
        }
        let t = (b.offset - p[nb]) / d[nb];
        if t <= 0.0 {
            continue;
        }
        let x = p[ub] + t * d[ub];
        let y = p[vb] + t * d[vb];
        if x >= b.u.0 && x <= b.u.1 && y >= b.v.0 && y <= b.v.1 {
            hits += 1;
        }
    }
    hits as f64 / rays as f64
}

/// Minimum HVAC power over a grid of fixed electric powers for every
/// candidate the solver would consider, zoomed in around the best point.
/// `None` if no grid point meets the requirement.
pub fn grid_search_power(solver: &SteadySolver, d: &Disturbance, req: &ComfortRequirement) -> Option<f64> {
    const COARSE: usize = 80;
    const FINE: usize = 40;
    const ZOOMS: usize = 3;
    let top = solver.constants.power_limit().unwrap_or(30_000.0);
    let mut best = f64::INFINITY;
    for cand in solver.candidates() {
        let feasible_power = |heat: HeatSpec| -> Option<f64> {
            let sol = solver.solve_layout(cand, heat, d).ok()?.ok()?;
            let in_box = sol.psi >= req.psi_min - 1e-9 && sol.psi <= req.psi_max + 1e-9;
            (in_box && sol.p_rh >= 0.0 && sol.residual_norm <= 1e-6).then_some(sol.p_hvac)
        };
        if cand.mode == HvacMode::Passive {
            if let Some(p) = feasible_power(HeatSpec::Off) {
                best = best.min(p);
            }
            continue;
        }
        let step = top / COARSE as f64;
        let mut coarse: Option<(f64, f64)> = None;
        for k in 0..=COARSE {
            let p_hc = k as f64 * step;
            if let Some(p) = feasible_power(HeatSpec::FixedPower(p_hc)) {
                if coarse.is_none_or(|(_, b)| p < b) {
                    coarse = Some((p_hc, p));
                }
            }
        }
        let Some((mut p_hc, p)) = coarse else { continue };
        best = best.min(p);
        // Zoom in around the best point a few times.
        let mut half = step;
        for _ in 0..ZOOMS {
            let lo = (p_hc - half).max(0.0);
            let hi = (p_hc + half).min(top);
            let mut local = f64::INFINITY;
            for k in 0..=FINE {
                let q = lo + (hi - lo) * k as f64 / FINE as f64;
                if let Some(p) = feasible_power(HeatSpec::FixedPower(q)) {
                    if p < local {
                        local = p;
                        p_hc = q;
                    }
                }
            }
            best = best.min(local);
            half = (hi - lo) / FINE as f64;
        }
    }
    best.is_finite().then_some(best)
}

/// Nearest-rank percentile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}
