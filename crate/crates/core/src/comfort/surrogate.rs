//! Small tanh network approximating PMV over (air, mean radiant) temperature.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pmv::pmv_celsius;
use super::{ComfortContext, ComfortError};
use crate::model::kelvin_to_celsius;

pub const HIDDEN: usize = 5;
const PARAMS: usize = 4 * HIDDEN + 1;
pub const FORMAT: &str = "ebus-hvac/pmv-surrogate";
pub const FORMAT_VERSION: u32 = 1;

/// Training set-up shared by all clothing levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Lower and upper bound of both inputs [°C].
    pub t_min: f64,
    pub t_max: f64,
    /// Points per axis of the training grid.
    pub grid: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Largest accepted held-out mean absolute error.
    pub max_mae: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            t_min: 5.0,
            t_max: 40.0,
            grid: 26,
            restarts: 10,
            max_iterations: 400,
            seed: 7,
            max_mae: 0.02,
        }
    }
}

/// Network for one clothing level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmvSurrogate {
    pub r_clo: f64,
    /// Inputs are `(T_cab, T_mr)` in °C, shifted by `input_mean` and divided
    /// by `input_range`.
    pub input_mean: [f64; 2],
    pub input_range: [f64; 2],
    pub output_mean: f64,
    pub output_scale: f64,
    pub w1: [[f64; 2]; HIDDEN],
    pub b1: [f64; HIDDEN],
    pub w2: [f64; HIDDEN],
    pub b2: f64,
    pub train_mae: f64,
    pub holdout_mae: f64,
}

impl PmvSurrogate {
    /// Predicted PMV for temperatures in kelvin.
    pub fn eval(&self, t_cab: f64, t_mr: f64) -> f64 {
        self.eval_celsius(kelvin_to_celsius(t_cab), kelvin_to_celsius(t_mr))
    }

    pub fn eval_celsius(&self, t_cab: f64, t_mr: f64) -> f64 {
        let x = [
            (t_cab - self.input_mean[0]) / self.input_range[0],
            (t_mr - self.input_mean[1]) / self.input_range[1],
        ];
        let mut y = self.b2;
        for k in 0..HIDDEN {
            y += self.w2[k] * (self.w1[k][0] * x[0] + self.w1[k][1] * x[1] + self.b1[k]).tanh();
        }
        self.output_mean + self.output_scale * y
    }

    fn from_params(p: &[f64], norm: &Normalization, r_clo: f64) -> Self {
        let mut s = Self {
            r_clo,
            input_mean: norm.input_mean,
            input_range: norm.input_range,
            output_mean: norm.output_mean,
            output_scale: norm.output_scale,
            w1: [[0.0; 2]; HIDDEN],
            b1: [0.0; HIDDEN],
            w2: [0.0; HIDDEN],
            b2: p[PARAMS - 1],
            train_mae: f64::NAN,
            holdout_mae: f64::NAN,
        };
        for k in 0..HIDDEN {
            s.w1[k] = [p[3 * k], p[3 * k + 1]];
            s.b1[k] = p[3 * k + 2];
            s.w2[k] = p[3 * HIDDEN + k];
        }
        s
    }

    fn is_finite(&self) -> bool {
        self.w1.iter().flatten().chain(&self.b1).chain(&self.w2).all(|v| v.is_finite())
            && [self.b2, self.output_mean, self.output_scale].iter().all(|v| v.is_finite())
            && self.input_range.iter().all(|r| r.is_finite() && *r > 0.0)
    }

    /// Fits the network for clothing level `ctx.r_clo`.
    pub fn fit(ctx: &ComfortContext, cfg: &SurrogateConfig) -> Result<Self, ComfortError> {
        ctx.validate()?;
        if !(cfg.t_max > cfg.t_min) || cfg.grid < 3 || cfg.restarts == 0 {
            return Err(ComfortError::InvalidContext(format!(
                "surrogate training box [{}, {}] with {} points",
                cfg.t_min, cfg.t_max, cfg.grid
            )));
        }
        let step = (cfg.t_max - cfg.t_min) / (cfg.grid - 1) as f64;
        let train_axis: Vec<f64> = (0..cfg.grid).map(|i| cfg.t_min + step * i as f64).collect();
        let holdout_axis: Vec<f64> = (0..cfg.grid - 1)
            .map(|i| cfg.t_min + step * (i as f64 + 0.5))
            .collect();
        let train = sample_grid(&train_axis, ctx)?;
        let holdout = sample_grid(&holdout_axis, ctx)?;

        let ys: Vec<f64> = train.iter().map(|s| s.2).collect();
        let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (cfg.t_min + cfg.t_max);
        let norm = Normalization {
            input_mean: [mid, mid],
            input_range: [cfg.t_max - cfg.t_min; 2],
            output_mean: ys.iter().sum::<f64>() / ys.len() as f64,
            output_scale: (y_max - y_min).max(1e-9),
        };
        let xs: Vec<[f64; 2]> = train
            .iter()
            .map(|s| {
                [
                    (s.0 - norm.input_mean[0]) / norm.input_range[0],
                    (s.1 - norm.input_mean[1]) / norm.input_range[1],
                ]
            })
            .collect();
        let targets: Vec<f64> = ys
            .iter()
            .map(|y| (y - norm.output_mean) / norm.output_scale)
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ctx.r_clo.to_bits());
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..cfg.restarts {
            let init: Vec<f64> = (0..PARAMS).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (sse, p) = levenberg_marquardt(init, &xs, &targets, cfg.max_iterations);
            if sse.is_finite() && best.as_ref().is_none_or(|b| sse < b.0) {
                best = Some((sse, p));
            }
        }
        let Some((_, p)) = best else {
            return Err(ComfortError::SurrogateFit {
                r_clo: ctx.r_clo,
                mae: f64::INFINITY,
            });
        };
        let mut s = Self::from_params(&p, &norm, ctx.r_clo);
        s.train_mae = mean_abs_error(&s, &train);
        s.holdout_mae = mean_abs_error(&s, &holdout);
        if !(s.is_finite() && s.holdout_mae <= cfg.max_mae) {
            return Err(ComfortError::SurrogateFit {
                r_clo: ctx.r_clo,
                mae: s.holdout_mae,
            });
        }
        Ok(s)
    }
}

struct Normalization {
    input_mean: [f64; 2],
    input_range: [f64; 2],
    output_mean: f64,
    output_scale: f64,
}

fn sample_grid(axis: &[f64], ctx: &ComfortContext) -> Result<Vec<(f64, f64, f64)>, ComfortError> {
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &ta in axis {
        for &tr in axis {
            let y = pmv_celsius(ta, tr, ctx.v_cab, ctx.phi_cab, ctx.met(), ctx.r_clo)?;
            out.push((ta, tr, y));
        }
    }
    Ok(out)
}

fn mean_abs_error(s: &PmvSurrogate, data: &[(f64, f64, f64)]) -> f64 {
    data.iter()
        .map(|&(ta, tr, y)| (s.eval_celsius(ta, tr) - y).abs())
        .sum::<f64>()
        / data.len() as f64
}

fn residuals_and_jacobian(
    p: &[f64],
    xs: &[[f64; 2]],
    ys: &[f64],
    jac: Option<&mut DMatrix<f64>>,
) -> DVector<f64> {
    let mut r = DVector::zeros(xs.len());
    let mut jac = jac;
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let mut out = p[PARAMS - 1];
        for k in 0..HIDDEN {
            let t = (p[3 * k] * x[0] + p[3 * k + 1] * x[1] + p[3 * k + 2]).tanh();
            let w2 = p[3 * HIDDEN + k];
            out += w2 * t;
            if let Some(j) = jac.as_deref_mut() {
                let g = w2 * (1.0 - t * t);
                j[(i, 3 * k)] = g * x[0];
                j[(i, 3 * k + 1)] = g * x[1];
                j[(i, 3 * k + 2)] = g;
                j[(i, 3 * HIDDEN + k)] = t;
            }
        }
        if let Some(j) = jac.as_deref_mut() {
            j[(i, PARAMS - 1)] = 1.0;
        }
        r[i] = out - y;
    }
    r
}

/// Levenberg–Marquardt least squares with Marquardt's diagonal scaling.
fn levenberg_marquardt(
    mut p: Vec<f64>,
    xs: &[[f64; 2]],
    ys: &[f64],
    max_iterations: usize,
) -> (f64, Vec<f64>) {
    let mut jac = DMatrix::zeros(xs.len(), PARAMS);
    let mut r = residuals_and_jacobian(&p, xs, ys, Some(&mut jac));
    let mut sse = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..max_iterations {
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for d in 0..PARAMS {
                a[(d, d)] += lambda * (jtj[(d, d)] + 1e-9);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&g)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
            let r_trial = residuals_and_jacobian(&trial, xs, ys, None);
            let sse_trial = r_trial.norm_squared();
            if sse_trial.is_finite() && sse_trial < sse {
                let gain = (sse - sse_trial) / sse;
                p = trial;
                sse = sse_trial;
                lambda = (lambda / 3.0).max(1e-12);
                improved = gain > 1e-12;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
        r = residuals_and_jacobian(&p, xs, ys, Some(&mut jac));
    }
    (sse, p)
}

/// Surrogates for a ladder of clothing levels with linear interpolation
/// in between; the versioned on-disk format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateBank {
    pub format: String,
    pub version: u32,
    pub hidden_units: usize,
    pub activation: String,
    pub v_cab: f64,
    pub phi_cab: f64,
    pub q_met: f64,
    pub config: SurrogateConfig,
    /// Sorted by increasing `r_clo`.
    pub levels: Vec<PmvSurrogate>,
}

/// Clothing levels fitted by default [clo].
pub fn default_clothing_levels() -> Vec<f64> {
    (0..=14).map(|i| 0.4 + 0.1 * i as f64).collect()
}

impl SurrogateBank {
    /// Fits one network per clothing level, in parallel.
    pub fn fit(
        ctx: &ComfortContext,
        levels: &[f64],
        cfg: &SurrogateConfig,
    ) -> Result<Self, ComfortError> {
        if levels.is_empty() {
            return Err(ComfortError::InvalidContext("no clothing levels".into()));
        }
        let mut sorted = levels.to_vec();
        sorted.sort_by(f64::total_cmp);
        let fitted: Result<Vec<_>, _> = sorted
            .par_iter()
            .map(|&r_clo| PmvSurrogate::fit(&ComfortContext { r_clo, ..*ctx }, cfg))
            .collect();
        Ok(Self {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            hidden_units: HIDDEN,
            activation: "tanh".into(),
            v_cab: ctx.v_cab,
            phi_cab: ctx.phi_cab,
            q_met: ctx.q_met,
            config: cfg.clone(),
            levels: fitted?,
        })
    }

    /// Predicted PMV for clothing `r_clo` and temperatures in kelvin.
    pub fn eval(&self, r_clo: f64, t_cab: f64, t_mr: f64) -> f64 {
        let levels = &self.levels;
        let i = levels.partition_point(|s| s.r_clo <= r_clo);
        if i == 0 {
            return levels[0].eval(t_cab, t_mr);
        }
        if i == levels.len() {
            return levels[i - 1].eval(t_cab, t_mr);
        }
        let (a, b) = (&levels[i - 1], &levels[i]);
        let w = (r_clo - a.r_clo) / (b.r_clo - a.r_clo);
        (1.0 - w) * a.eval(t_cab, t_mr) + w * b.eval(t_cab, t_mr)
    }

    /// Whether both temperatures [K] lie inside the training box.
    pub fn covers(&self, t_cab: f64, t_mr: f64) -> bool {
        let lo = self.config.t_min;
        let hi = self.config.t_max;
        [t_cab, t_mr]
            .iter()
            .all(|t| (lo..=hi).contains(&kelvin_to_celsius(*t)))
    }

    pub fn to_json(&self) -> Result<String, ComfortError> {
        serde_json::to_string_pretty(self).map_err(|e| ComfortError::SurrogateFormat(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, ComfortError> {
        let bank: Self =
            serde_json::from_str(s).map_err(|e| ComfortError::SurrogateFormat(e.to_string()))?;
        if bank.format != FORMAT {
            return Err(ComfortError::SurrogateFormat(format!(
                "unexpected format {:?}",
                bank.format
            )));
        }
        if bank.version != FORMAT_VERSION {
            return Err(ComfortError::SurrogateFormat(format!(
                "unsupported version {}",
                bank.version
            )));
        }
        if bank.hidden_units != HIDDEN || bank.activation != "tanh" {
            return Err(ComfortError::SurrogateFormat("unsupported architecture".into()));
        }
        if bank.levels.is_empty()
            || !bank.levels.windows(2).all(|w| w[0].r_clo < w[1].r_clo)
            || !bank.levels.iter().all(PmvSurrogate::is_finite)
        {
            return Err(ComfortError::SurrogateFormat("malformed clothing levels".into()));
        }
        Ok(bank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{celsius_to_kelvin, ModelConstants};

    fn ctx(r_clo: f64) -> ComfortContext {
        ComfortContext::from_constants(&ModelConstants::default(), r_clo)
    }

    #[test]
    fn fits_one_level_within_tolerance() {
        let s = PmvSurrogate::fit(&ctx(1.0), &SurrogateConfig::default()).unwrap();
        assert!(s.holdout_mae <= 0.02, "{}", s.holdout_mae);
        let exact = pmv_celsius(22.0, 22.0, 0.1, 0.4, ctx(1.0).met(), 1.0).unwrap();
        assert!((s.eval(celsius_to_kelvin(22.0), celsius_to_kelvin(22.0)) - exact).abs() < 0.05);
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let cfg = SurrogateConfig {
            restarts: 2,
            max_mae: 0.1,
            ..Default::default()
        };
        let bank = SurrogateBank::fit(&ctx(1.0), &[0.8, 1.2], &cfg).unwrap();
        let json = bank.to_json().unwrap();
        let back = SurrogateBank::from_json(&json).unwrap();
        assert_eq!(back, bank);
        let t = celsius_to_kelvin(21.0);
        assert_eq!(back.eval(1.0, t, t), bank.eval(1.0, t, t));
        let mid = bank.eval(1.0, t, t);
        let (a, b) = (bank.levels[0].eval(t, t), bank.levels[1].eval(t, t));
        assert!((mid - 0.5 * (a + b)).abs() < 1e-12);
        let bumped = json.replace("\"version\": 1", "\"version\": 99");
        assert!(SurrogateBank::from_json(&bumped).is_err());
    }

    #[test]
    fn impossible_threshold_reports_mae() {
        let cfg = SurrogateConfig {
            restarts: 1,
            max_iterations: 2,
            max_mae: 1e-9,
            ..Default::default()
        };
        match PmvSurrogate::fit(&ctx(1.0), &cfg) {
            Err(ComfortError::SurrogateFit { mae, .. }) => assert!(mae > 1e-9),
            other => panic!("expected fit failure, got {other:?}"),
        }
    }
}
