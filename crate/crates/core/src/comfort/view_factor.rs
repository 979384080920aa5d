//! Diffuse view factors between axis-aligned rectangles.
//!
//! Parallel and perpendicular configurations are reduced by superposition
//! to the closed-form contour-integral solutions for aligned rectangles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ComfortError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two remaining axes in increasing order.
    fn others(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }
}

/// One-sided rectangle lying in a coordinate plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    /// Axis normal to the rectangle.
    pub normal: Axis,
    /// `true` if the emitting side faces the positive normal direction.
    pub facing_positive: bool,
    /// Coordinate of the plane along `normal`.
    pub offset: f64,
    /// Extent along the first remaining axis (X before Y before Z).
    pub u: (f64, f64),
    /// Extent along the second remaining axis.
    pub v: (f64, f64),
}

impl Rect {
    pub fn new(
        normal: Axis,
        facing_positive: bool,
        offset: f64,
        u: (f64, f64),
        v: (f64, f64),
    ) -> Result<Self, ComfortError> {
        let r = Self {
            normal,
            facing_positive,
            offset,
            u,
            v,
        };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<(), ComfortError> {
        let finite = [self.offset, self.u.0, self.u.1, self.v.0, self.v.1]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.u.1 > self.u.0) || !(self.v.1 > self.v.0) {
            return Err(ComfortError::DegenerateRectangle);
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.u.1 - self.u.0) * (self.v.1 - self.v.0)
    }

    fn sign(&self) -> f64 {
        if self.facing_positive {
            1.0
        } else {
            -1.0
        }
    }

    /// Extent along global axis `axis`, which must lie in the plane.
    fn extent(&self, axis: usize) -> (f64, f64) {
        let (a, _) = self.normal.others();
        if axis == a {
            self.u
        } else {
            self.v
        }
    }

    /// Builds a rectangle from two arbitrary corner points; fails unless the
    /// points differ in exactly two coordinates.
    pub fn from_corners(p: [f64; 3], q: [f64; 3], facing_positive: bool) -> Result<Self, ComfortError> {
        let flat: Vec<usize> = (0..3).filter(|&i| p[i] == q[i]).collect();
        if flat.len() != 1 {
            return Err(ComfortError::UnsupportedOrientation(format!(
                "corners {p:?}, {q:?} do not span an axis-aligned rectangle"
            )));
        }
        let normal = [Axis::X, Axis::Y, Axis::Z][flat[0]];
        let (a, b) = normal.others();
        Rect::new(
            normal,
            facing_positive,
            p[flat[0]],
            (p[a].min(q[a]), p[a].max(q[a])),
            (p[b].min(q[b]), p[b].max(q[b])),
        )
    }
}

/// Rectangle orientation as a plane normal; general orientations are
/// outside the supported class.
pub fn axis_from_normal(n: [f64; 3]) -> Result<(Axis, bool), ComfortError> {
    let nonzero: Vec<usize> = (0..3).filter(|&i| n[i] != 0.0).collect();
    match nonzero.as_slice() {
        [i] => Ok(([Axis::X, Axis::Y, Axis::Z][*i], n[*i] > 0.0)),
        _ => Err(ComfortError::UnsupportedOrientation(format!(
            "normal {n:?} is not axis-aligned"
        ))),
    }
}

fn parallel_kernel(x: f64, y: f64, c: f64) -> f64 {
    let a = (y * y + c * c).sqrt();
    let b = (x * x + c * c).sqrt();
    let mut t = 0.0;
    if a > 0.0 {
        t += x * a * (x / a).atan();
    }
    if b > 0.0 {
        t += y * b * (y / b).atan();
    }
    let s = x * x + y * y + c * c;
    if s > 0.0 {
        t -= 0.5 * c * c * s.ln();
    }
    t / (2.0 * PI)
}

/// `A1 F12` for rectangles in parallel planes at separation `c`, given by
/// their extents in shared in-plane coordinates.
fn parallel_exchange(x: (f64, f64), y: (f64, f64), xi: (f64, f64), eta: (f64, f64), c: f64) -> f64 {
    let mut s = 0.0;
    for (i, xi_) in [x.0, x.1].into_iter().enumerate() {
        for (j, yj) in [y.0, y.1].into_iter().enumerate() {
            for (k, ek) in [xi.0, xi.1].into_iter().enumerate() {
                for (l, nl) in [eta.0, eta.1].into_iter().enumerate() {
                    let sign = if (i + j + k + l) % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * parallel_kernel(xi_ - ek, yj - nl, c);
                }
            }
        }
    }
    s
}

fn perpendicular_kernel(x: f64, y: f64, eta: f64, z: f64) -> f64 {
    let d = y - eta;
    let q = x * x + z * z;
    let mut t = 0.0;
    if q > 0.0 {
        t += d * q.sqrt() * (d / q.sqrt()).atan();
    }
    let s = q + d * d;
    if s > 0.0 {
        t -= 0.25 * (q - d * d) * s.ln();
    }
    t / (2.0 * PI)
}

/// `A1 F12` for rectangle 1 in the plane `z = 0` spanning `x` (distances
/// from the plane of rectangle 2, all ≥ 0) and `y`; rectangle 2 in `x = 0`
/// spanning `eta` along the shared axis and `z ≥ 0`.
fn perpendicular_exchange(x: (f64, f64), y: (f64, f64), eta: (f64, f64), z: (f64, f64)) -> f64 {
    let mut s = 0.0;
    for (i, xi) in [x.0, x.1].into_iter().enumerate() {
        for (j, yj) in [y.0, y.1].into_iter().enumerate() {
            for (k, ek) in [eta.0, eta.1].into_iter().enumerate() {
                for (l, zl) in [z.0, z.1].into_iter().enumerate() {
                    let sign = if (i + j + k + l) % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * perpendicular_kernel(xi, yj, ek, zl);
                }
            }
        }
    }
    s
}

/// Part of `(lo, hi)` mapped by `s ↦ sign·(s − origin)` that is non-negative.
fn clip_front(extent: (f64, f64), origin: f64, sign: f64) -> Option<(f64, f64)> {
    let a = sign * (extent.0 - origin);
    let b = sign * (extent.1 - origin);
    let (lo, hi) = (a.min(b).max(0.0), a.max(b));
    (hi > lo).then_some((lo, hi))
}

/// View factor from rectangle `a` to rectangle `b`.
///
/// Only the part of each rectangle in front of the other contributes;
/// surfaces facing away see nothing.
pub fn rect_view_factor(a: &Rect, b: &Rect) -> Result<f64, ComfortError> {
    a.validate()?;
    b.validate()?;
    let f = if a.normal == b.normal {
        let gap = b.offset - a.offset;
        if !(a.sign() * gap > 0.0 && b.sign() * gap < 0.0) {
            return Ok(0.0);
        }
        parallel_exchange(a.u, a.v, b.u, b.v, gap.abs()) / a.area()
    } else {
        let (na, nb) = (a.normal.index(), b.normal.index());
        let shared = 3 - na - nb;
        // Distance of points of `a` from the plane of `b`, on b's emitting side.
        let Some(x) = clip_front(a.extent(nb), b.offset, b.sign()) else {
            return Ok(0.0);
        };
        let Some(z) = clip_front(b.extent(na), a.offset, a.sign()) else {
            return Ok(0.0);
        };
        perpendicular_exchange(x, a.extent(shared), b.extent(shared), z) / a.area()
    };
    Ok(f.clamp(0.0, 1.0))
}
