//! Planar geometry shared by every agent in the simulation.

use std::f64::consts::TAU;
use std::fmt;

/// A position in the deployment area, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance_to(self, other: Point2) -> f64 {
        distance(self, other)
    }

    /// Bearing from `self` toward `other`, normalized to `[0, 2π)`.
    pub fn bearing_to(self, other: Point2) -> f64 {
        normalize_angle((other.y - self.y).atan2(other.x - self.x))
    }

    /// The point reached by travelling `length` meters along `angle`.
    pub fn offset(self, angle: f64, length: f64) -> Point2 {
        Point2::new(self.x + length * angle.cos(), self.y + length * angle.sin())
    }

    /// Moves toward `target` by at most `budget` meters, never overshooting.
    pub fn step_toward(self, target: Point2, budget: f64) -> Point2 {
        let d = self.distance_to(target);
        if d <= budget || d == 0.0 {
            target
        } else {
            let t = budget / d;
            Point2::new(self.x + (target.x - self.x) * t, self.y + (target.y - self.y) * t)
        }
    }

    pub fn clamp_to(self, width: f64, height: f64) -> Point2 {
        Point2::new(self.x.clamp(0.0, width), self.y.clamp(0.0, height))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn within(self, width: f64, height: f64) -> bool {
        self.is_finite() && (0.0..=width).contains(&self.x) && (0.0..=height).contains(&self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance.
pub fn distance(a: Point2, b: Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}
