use serde::{Deserialize, Serialize};

use super::ComfortError;
use crate::model::kelvin_to_celsius;

/// Ambient range over which the clothing model is defined [°C].
pub const CLOTHING_RANGE: (f64, f64) = (-40.0, 50.0);
pub const CLO_MIN: f64 = 0.4;
pub const CLO_MAX: f64 = 1.8;

/// Clothing insulation of passengers as a function of ambient temperature.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClothingModel {
    /// UTCI clothing polynomial, clamped to `[CLO_MIN, CLO_MAX]`.
    #[default]
    Utci,
    /// Piecewise-linear table of `(ambient °C, clo)` points, constant
    /// beyond the end points.
    Table(Vec<(f64, f64)>),
}

impl ClothingModel {
    pub fn validate(&self) -> Result<(), ComfortError> {
        if let ClothingModel::Table(points) = self {
            if points.is_empty() {
                return Err(ComfortError::InvalidClothingTable("empty".into()));
            }
            for w in points.windows(2) {
                if !(w[1].0 > w[0].0) {
                    return Err(ComfortError::InvalidClothingTable(
                        "temperatures must be strictly increasing".into(),
                    ));
                }
                if w[1].1 > w[0].1 {
                    return Err(ComfortError::InvalidClothingTable(
                        "insulation must be non-increasing".into(),
                    ));
                }
            }
            if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite() && p.1 >= 0.0)) {
                return Err(ComfortError::InvalidClothingTable("non-finite entry".into()));
            }
        }
        Ok(())
    }

    /// Clothing insulation [clo] at ambient temperature `t_amb` [K].
    pub fn insulation(&self, t_amb: f64) -> Result<f64, ComfortError> {
        let t = kelvin_to_celsius(t_amb);
        if !(t >= CLOTHING_RANGE.0 && t <= CLOTHING_RANGE.1) {
            return Err(ComfortError::ClothingOutOfRange(t));
        }
        match self {
            ClothingModel::Utci => {
                let clo = 1.372 - 0.01866 * t - 0.0004849 * t * t - 0.000009333 * t * t * t;
                Ok(clo.clamp(CLO_MIN, CLO_MAX))
            }
            ClothingModel::Table(points) => Ok(interpolate(points, t)),
        }
    }
}

fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= t);
    let (a, b) = (points[i - 1], points[i]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// Clothing insulation [clo] from the default UTCI curve.
pub fn clothing_insulation(t_amb: f64) -> Result<f64, ComfortError> {
    ClothingModel::Utci.insulation(t_amb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::celsius_to_kelvin;

    fn at(c: f64) -> f64 {
        clothing_insulation(celsius_to_kelvin(c)).unwrap()
    }

    #[test]
    fn winter_warmer_than_summer() {
        assert!(at(-10.0) > at(25.0));
    }

    #[test]
    fn clamped_ends() {
        assert_eq!(at(30.0), CLO_MIN);
        assert_eq!(at(-40.0), CLO_MAX);
        // 1.372 + 0.1866 - 0.04849 + 0.009333
        assert!((at(-10.0) - 1.519443).abs() < 1e-9);
    }

    #[test]
    fn monotone_and_continuous() {
        let mut prev = at(-40.0);
        for k in 1..=9000 {
            let v = at(-40.0 + 0.01 * k as f64);
            assert!(v <= prev);
            assert!((prev - v).abs() < 0.01);
            prev = v;
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(clothing_insulation(celsius_to_kelvin(-41.0)).is_err());
        assert!(clothing_insulation(celsius_to_kelvin(50.5)).is_err());
    }

    #[test]
    fn table_override() {
        let m = ClothingModel::Table(vec![(0.0, 1.5), (20.0, 0.5)]);
        m.validate().unwrap();
        assert_eq!(m.insulation(celsius_to_kelvin(-5.0)).unwrap(), 1.5);
        assert!((m.insulation(celsius_to_kelvin(10.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.insulation(celsius_to_kelvin(30.0)).unwrap(), 0.5);
        assert!(ClothingModel::Table(vec![(0.0, 0.5), (20.0, 1.5)]).validate().is_err());
    }
}
