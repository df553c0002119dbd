//! Planar reflections `x -> R Q R^T (x - t) + t` with `R` the rotation by the
//! axis slope and `Q = diag(1, -1)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// A reflection about the line `{t + s (cos theta, sin theta)}`.
///
/// `theta` is kept in `(-pi/2, pi/2]`, so the transform built from `(a, b)`
/// is bit-identical to the one built from `(b, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionTransform {
    theta: f64,
    midpoint: Vec2,
    // Linear part R Q R^T = [[c2, s2], [s2, -c2]].
    c2: f64,
    s2: f64,
}

impl ReflectionTransform {
    /// Reflection about the axis through `point` with slope angle `theta`.
    pub fn from_axis(point: Vec2, theta: f64) -> Self {
        let theta = canonical_theta(theta);
        let (s2, c2) = (2.0 * theta).sin_cos();
        ReflectionTransform {
            theta,
            midpoint: point,
            c2,
            s2,
        }
    }

    /// The reflection that swaps `a` and `b`: its axis is the perpendicular
    /// bisector of the segment `ab`.
    pub fn from_pair(a: Vec2, b: Vec2) -> Result<Self> {
        let d = b - a;
        if d.norm_sq() == 0.0 || !d.x.is_finite() || !d.y.is_finite() {
            return Err(Error::CoincidentPoints);
        }
        // Canonical axis direction so that swapping a and b gives identical bits.
        let mut dir = d.perp();
        if dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0) {
            dir = -dir;
        }
        let theta = dir.y.atan2(dir.x);
        let midpoint = (a + b) * 0.5;
        Ok(Self::from_axis(midpoint, theta))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn midpoint(&self) -> Vec2 {
        self.midpoint
    }

    /// Unit vector along the axis.
    pub fn direction(&self) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c, s)
    }

    /// Linear part `R Q R^T` as a row-major 2x2 matrix.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.c2, self.s2], [self.s2, -self.c2]]
    }

    pub fn reflect_vector(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.c2 * v.x + self.s2 * v.y,
            self.s2 * v.x - self.c2 * v.y,
        )
    }

    pub fn reflect_point(&self, x: Vec2) -> Vec2 {
        self.reflect_vector(x - self.midpoint) + self.midpoint
    }

    /// Reflects samples pointwise and normals as vectors; the `alpha`
    /// parameterization is preserved.
    pub fn reflect_curve(&self, c: &Curve) -> Curve {
        Curve {
            anchor: c.anchor,
            samples: c.samples.iter().map(|&s| self.reflect_point(s)).collect(),
            normals: c.normals.iter().map(|&n| self.reflect_vector(n)).collect(),
        }
    }

    /// Signed distance from `x` to the axis.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        self.direction().cross(x - self.midpoint)
    }
}

fn canonical_theta(theta: f64) -> f64 {
    if theta > -FRAC_PI_2 && theta <= FRAC_PI_2 {
        return theta;
    }
    let mut t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        t -= PI;
    }
    // rem_euclid maps -pi/2 to pi/2 already; guard the open lower end.
    if t <= -FRAC_PI_2 {
        t += PI;
    }
    t
}
