//! Mean radiant temperature of seated/standing passengers in the cabin.
//!
//! Cabin coordinates: `x` along the bus, `y` across, `z` up from the floor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::view_factor::{rect_view_factor, Axis, Rect};
use super::{pmv, ComfortContext, ComfortError};
use crate::model::ModelConstants;

pub const PASSENGER_FOOTPRINT: f64 = 0.25;
pub const PASSENGER_HEIGHT: f64 = 1.7;
/// Share of each passenger surface's view occupied by the interior.
pub const VIEW_TO_INTERIOR: f64 = 0.3;
pub const DEFAULT_PASSENGER_COUNT: usize = 20;
pub const DEFAULT_PASSENGER_SEED: u64 = 42;
/// Clearance between sampled passengers and the side walls [m].
pub const FLOOR_INSET: f64 = 0.3;

/// Radiant panels on the ceiling, facing down, in a two-row grid.
pub fn panel_layout(c: &ModelConstants) -> Result<Vec<Rect>, ComfortError> {
    let n = c.rh_panel_count;
    if n == 0 || !n.is_multiple_of(2) {
        return Err(ComfortError::InvalidLayout(format!(
            "{n} panels cannot be arranged in two rows"
        )));
    }
    let cols = n / 2;
    let side = (c.area_rh / n as f64).sqrt();
    let (l, w) = (c.cabin_length, c.cabin_width);
    if side > l / cols as f64 || side > w / 2.0 {
        return Err(ComfortError::InvalidLayout("panels do not fit on the ceiling".into()));
    }
    let mut panels = Vec::with_capacity(n);
    for j in 0..2 {
        for k in 0..cols {
            let cx = (k as f64 + 0.5) * l / cols as f64;
            let cy = (j as f64 + 0.5) * w / 2.0;
            panels.push(Rect::new(
                Axis::Z,
                false,
                c.cabin_height,
                (cx - side / 2.0, cx + side / 2.0),
                (cy - side / 2.0, cy + side / 2.0),
            )?);
        }
    }
    Ok(panels)
}

/// Radiant exchange data of one passenger surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceView {
    pub area: f64,
    pub f_rh: f64,
    pub f_int: f64,
    pub f_si: f64,
}

/// Upright cuboid passenger and the view factors of its exposed faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerGeometry {
    /// Center of the footprint on the floor [m].
    pub x: f64,
    pub y: f64,
    /// Four sides and the top; the bottom rests on the floor.
    pub surfaces: Vec<SurfaceView>,
}

impl PassengerGeometry {
    pub fn new(x: f64, y: f64, c: &ModelConstants) -> Result<Self, ComfortError> {
        let h = PASSENGER_FOOTPRINT / 2.0;
        let inside = x - h >= 0.0
            && x + h <= c.cabin_length
            && y - h >= 0.0
            && y + h <= c.cabin_width
            && PASSENGER_HEIGHT < c.cabin_height;
        if !inside {
            return Err(ComfortError::PassengerOutsideCabin { x, y });
        }
        let panels = panel_layout(c)?;
        let (x0, x1, y0, y1) = (x - h, x + h, y - h, y + h);
        let z = (0.0, PASSENGER_HEIGHT);
        let faces = [
            Rect::new(Axis::X, false, x0, (y0, y1), z)?,
            Rect::new(Axis::X, true, x1, (y0, y1), z)?,
            Rect::new(Axis::Y, false, y0, (x0, x1), z)?,
            Rect::new(Axis::Y, true, y1, (x0, x1), z)?,
            Rect::new(Axis::Z, true, PASSENGER_HEIGHT, (x0, x1), (y0, y1))?,
        ];
        let mut surfaces = Vec::with_capacity(faces.len());
        for face in &faces {
            let mut f_rh = 0.0;
            for p in &panels {
                f_rh += rect_view_factor(face, p)?;
            }
            let f_si = 1.0 - VIEW_TO_INTERIOR - f_rh;
            if f_si < 0.0 {
                return Err(ComfortError::InvalidLayout(format!(
                    "panels fill more than {:.0}% of a passenger's view",
                    100.0 * (1.0 - VIEW_TO_INTERIOR)
                )));
            }
            surfaces.push(SurfaceView {
                area: face.area(),
                f_rh,
                f_int: VIEW_TO_INTERIOR,
                f_si,
            });
        }
        Ok(Self { x, y, surfaces })
    }

    /// Area-weighted view factors `(rh, int, si)` of the whole passenger.
    pub fn weights(&self) -> RadiantWeights {
        let total: f64 = self.surfaces.iter().map(|s| s.area).sum();
        let mut w = RadiantWeights {
            rh: 0.0,
            int: 0.0,
            si: 0.0,
        };
        for s in &self.surfaces {
            w.rh += s.area * s.f_rh / total;
            w.int += s.area * s.f_int / total;
            w.si += s.area * s.f_si / total;
        }
        w
    }
}

/// Weights of the fourth powers of the surface temperatures in `T_mr⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiantWeights {
    pub rh: f64,
    pub int: f64,
    pub si: f64,
}

impl RadiantWeights {
    /// Mean radiant temperature [K] for panel, interior and inner-shell
    /// temperatures [K].
    pub fn mean_radiant_temperature(&self, t_rh: f64, t_int: f64, t_si: f64) -> f64 {
        let m = (self.rh * t_rh.powi(4) + self.int * t_int.powi(4) + self.si * t_si.powi(4))
            / (self.rh + self.int + self.si);
        m.sqrt().sqrt()
    }
}

/// Passengers drawn uniformly over the floor, inset from the walls.
pub fn sample_passengers(
    count: usize,
    seed: u64,
    c: &ModelConstants,
) -> Result<Vec<PassengerGeometry>, ComfortError> {
    if count == 0 {
        return Err(ComfortError::NoPassengers);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_range = (FLOOR_INSET, c.cabin_length - FLOOR_INSET);
    let y_range = (FLOOR_INSET, c.cabin_width - FLOOR_INSET);
    (0..count)
        .map(|_| {
            let x = rng.random_range(x_range.0..x_range.1);
            let y = rng.random_range(y_range.0..y_range.1);
            PassengerGeometry::new(x, y, c)
        })
        .collect()
}

/// Cabin-average comfort over a fixed set of passenger positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CabinComfort {
    pub passengers: Vec<PassengerGeometry>,
    weights: Vec<RadiantWeights>,
}

impl CabinComfort {
    pub fn new(passengers: Vec<PassengerGeometry>) -> Result<Self, ComfortError> {
        if passengers.is_empty() {
            return Err(ComfortError::NoPassengers);
        }
        let weights = passengers.iter().map(PassengerGeometry::weights).collect();
        Ok(Self {
            passengers,
            weights,
        })
    }

    /// Default seeded placement.
    pub fn sampled(c: &ModelConstants) -> Result<Self, ComfortError> {
        Self::with_seed(DEFAULT_PASSENGER_COUNT, DEFAULT_PASSENGER_SEED, c)
    }

    pub fn with_seed(count: usize, seed: u64, c: &ModelConstants) -> Result<Self, ComfortError> {
        Self::new(sample_passengers(count, seed, c)?)
    }

    pub fn weights(&self) -> &[RadiantWeights] {
        &self.weights
    }

    /// Mean radiant temperature of every passenger [K].
    pub fn mean_radiant_temperatures(&self, t_rh: f64, t_int: f64, t_si: f64) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.mean_radiant_temperature(t_rh, t_int, t_si))
            .collect()
    }

    /// Average PMV over the passengers.
    pub fn mean_pmv(
        &self,
        t_cab: f64,
        t_rh: f64,
        t_int: f64,
        t_si: f64,
        ctx: &ComfortContext,
    ) -> Result<f64, ComfortError> {
        let mut sum = 0.0;
        for w in &self.weights {
            sum += pmv(t_cab, w.mean_radiant_temperature(t_rh, t_int, t_si), ctx)?;
        }
        Ok(sum / self.weights.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::celsius_to_kelvin;

    fn centered(c: &ModelConstants) -> PassengerGeometry {
        PassengerGeometry::new(c.cabin_length / 2.0, c.cabin_width / 2.0, c).unwrap()
    }

    #[test]
    fn layout_matches_panel_area() {
        let c = ModelConstants::default();
        let panels = panel_layout(&c).unwrap();
        assert_eq!(panels.len(), 16);
        let area: f64 = panels.iter().map(Rect::area).sum();
        assert!((area - c.area_rh).abs() < 1e-12);
        assert!((panels[0].u.1 - panels[0].u.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn view_factors_sum_to_one() {
        let c = ModelConstants::default();
        for p in sample_passengers(20, 7, &c).unwrap() {
            for s in &p.surfaces {
                assert!((s.f_rh + s.f_int + s.f_si - 1.0).abs() < 1e-12);
                for f in [s.f_rh, s.f_int, s.f_si] {
                    assert!((0.0..=1.0).contains(&f));
                }
            }
        }
    }

    #[test]
    fn isothermal_identity() {
        let c = ModelConstants::default();
        let cabin = CabinComfort::sampled(&c).unwrap();
        for t in [250.0, 293.15, 343.15] {
            for t_mr in cabin.mean_radiant_temperatures(t, t, t) {
                assert!((t_mr - t).abs() <= 4.0 * f64::EPSILON * t, "{t_mr} vs {t}");
            }
        }
    }

    #[test]
    fn warm_panels_raise_radiant_temperature() {
        let c = ModelConstants::default();
        let p = centered(&c);
        let w = p.weights();
        let (t_rh, t_si, t_int) = (
            celsius_to_kelvin(70.0),
            celsius_to_kelvin(15.0),
            celsius_to_kelvin(20.0),
        );
        let t_mr = w.mean_radiant_temperature(t_rh, t_int, t_si);
        let oracle = ((w.rh * t_rh.powi(4) + 0.3 * t_int.powi(4) + (0.7 - w.rh) * t_si.powi(4))
            / 1.0)
            .powf(0.25);
        assert!((t_mr - oracle).abs() < 1e-9);
        assert!(t_mr > t_si && t_mr < t_rh);
        let more = RadiantWeights {
            rh: w.rh + 0.05,
            si: w.si - 0.05,
            ..w
        };
        assert!(more.mean_radiant_temperature(t_rh, t_int, t_si) > t_mr);
    }

    #[test]
    fn top_surface_sees_most_of_the_panels() {
        let c = ModelConstants::default();
        let p = PassengerGeometry::new(0.5 * 18.7 / 8.0, 0.65, &c).unwrap();
        let top = p.surfaces[4];
        assert!(top.f_rh > p.surfaces[0].f_rh);
        assert!(top.f_rh > 0.1 && top.f_rh < 0.7);
    }

    #[test]
    fn placement_is_seeded() {
        let c = ModelConstants::default();
        let a = CabinComfort::with_seed(20, 42, &c).unwrap();
        let b = CabinComfort::with_seed(20, 42, &c).unwrap();
        assert_eq!(a, b);
        let other = CabinComfort::with_seed(20, 43, &c).unwrap();
        assert_ne!(a.passengers, other.passengers);
    }

    #[test]
    fn outside_cabin_rejected() {
        let c = ModelConstants::default();
        assert!(PassengerGeometry::new(-1.0, 1.0, &c).is_err());
        assert!(PassengerGeometry::new(5.0, 2.55, &c).is_err());
        assert!(sample_passengers(0, 42, &c).is_err());
    }
}
