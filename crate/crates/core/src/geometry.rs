//! Planar geometry: angles, line of sight, reference paths and the
//! follower/target engagement geometry.
//!
//! Headings are measured counter-clockwise from the +x axis and are stored
//! wrapped to `(-π, π]`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta` from +x.
    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar pose plus forward speed of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vec2,
    /// Heading, radians CCW from +x.
    pub heading: f64,
    /// Forward speed, m/s.
    pub speed: f64,
}

impl VehicleState {
    pub fn new(position: Vec2, heading: f64, speed: f64) -> Self {
        Self {
            position,
            heading: wrap(heading),
            speed,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.heading.is_finite() && self.speed.is_finite()
    }
}

/// Direction of travel around a circular path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Ccw,
    Cw,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Ccw => 1.0,
            Direction::Cw => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Ccw => Direction::Cw,
            Direction::Cw => Direction::Ccw,
        }
    }
}

/// Default arc-length origin on a circle: the bottom point, angle -π/2 from the center.
pub const CIRCLE_START_ANGLE: f64 = -FRAC_PI_2;

/// A reference path: a circle traversed in a given direction, or a straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Path {
    Circle {
        center: Vec2,
        radius: f64,
        direction: Direction,
        /// Polar angle (from the center) of the point at arc length zero.
        start_angle: f64,
    },
    Line {
        origin: Vec2,
        /// Direction of travel, radians CCW from +x.
        heading: f64,
    },
}

impl Path {
    pub fn circle(center: Vec2, radius: f64, direction: Direction) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "circle radius must be finite and > 0, got {radius}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::NonFiniteInput("circle center"));
        }
        Ok(Path::Circle {
            center,
            radius,
            direction,
            start_angle: CIRCLE_START_ANGLE,
        })
    }

    pub fn line(origin: Vec2, heading: f64) -> Result<Self> {
        if !origin.is_finite() || !heading.is_finite() {
            return Err(Error::NonFiniteInput("line origin/heading"));
        }
        Ok(Path::Line { origin, heading })
    }

    /// Replaces the arc-length origin of a circle; no-op for lines.
    pub fn with_start_angle(self, angle: f64) -> Self {
        match self {
            Path::Circle {
                center,
                radius,
                direction,
                ..
            } => Path::Circle {
                center,
                radius,
                direction,
                start_angle: angle,
            },
            line => line,
        }
    }

    /// Signed curvature: `+1/R` for CCW circles, `-1/R` for CW, `0` for lines.
    pub fn curvature(&self) -> f64 {
        match *self {
            Path::Circle {
                radius, direction, ..
            } => direction.sign() / radius,
            Path::Line { .. } => 0.0,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Path::Circle { radius, .. } => Some(radius),
            Path::Line { .. } => None,
        }
    }

    /// Point and tangent heading at arc length `s`.
    pub fn point(&self, s: f64) -> (Vec2, f64) {
        match *self {
            Path::Circle {
                center,
                radius,
                direction,
                ..
            } => {
                let phi = self.polar_angle(s);
                let heading = match direction {
                    Direction::Ccw => phi + FRAC_PI_2,
                    Direction::Cw => phi - FRAC_PI_2,
                };
                (center + Vec2::from_angle(phi) * radius, wrap(heading))
            }
            Path::Line { origin, heading } => (origin + Vec2::from_angle(heading) * s, wrap(heading)),
        }
    }

    /// Unit vector along which a positive path error is measured at arc length `s`:
    /// radially outward for circles, left of travel for lines.
    pub fn error_normal(&self, s: f64) -> Vec2 {
        match *self {
            Path::Circle { .. } => Vec2::from_angle(self.polar_angle(s)),
            Path::Line { heading, .. } => Vec2::new(-heading.sin(), heading.cos()),
        }
    }

    /// Signed distance from `p` to the path; outside positive for circles,
    /// left of travel positive for lines.
    pub fn error(&self, p: Vec2) -> f64 {
        match *self {
            Path::Circle { center, radius, .. } => (p - center).norm() - radius,
            Path::Line { origin, heading } => {
                let r = p - origin;
                heading.cos() * r.y - heading.sin() * r.x
            }
        }
    }

    /// Arc length spanned by a chord of length `chord`.
    pub fn arc_for_chord(&self, chord: f64) -> Result<f64> {
        match *self {
            Path::Circle { radius, .. } => {
                let half = chord / (2.0 * radius);
                if !(half < 1.0) {
                    return Err(Error::ChordTooLong {
                        d_star: chord,
                        radius,
                    });
                }
                Ok(2.0 * radius * half.asin())
            }
            Path::Line { .. } => Ok(chord),
        }
    }

    fn polar_angle(&self, s: f64) -> f64 {
        match *self {
            Path::Circle {
                radius,
                direction,
                start_angle,
                ..
            } => match direction {
                Direction::Ccw => start_angle + s / radius,
                Direction::Cw => start_angle - s / radius,
            },
            Path::Line { heading, .. } => heading,
        }
    }
}

/// Relative coordinates of a follower with respect to its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementGeometry {
    /// Follower-to-target range.
    pub d: f64,
    /// Line-of-sight angle from follower to target.
    pub lambda: f64,
    /// Target heading relative to the line of sight, `wrap(γ_t - λ)`.
    pub alpha_t: f64,
    /// Follower heading relative to the line of sight, `wrap(γ_v - λ)`.
    pub alpha_v: f64,
}

/// Wraps an angle to `(-π, π]`, rejecting non-finite input.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFiniteInput("angle"));
    }
    Ok(wrap(theta))
}

/// Infallible wrap to `(-π, π]` for finite input.
///
/// In-range values are returned untouched and the reduction uses `%`
/// (exact, sign-preserving), so `wrap(-θ) == -wrap(θ)` except at `±π`.
#[inline]
pub fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut r = theta % TAU;
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

/// Bearing of `to` as seen from `from`.
pub fn los_angle(from: Vec2, to: Vec2) -> Result<f64> {
    let r = to - from;
    if !r.is_finite() {
        return Err(Error::NonFiniteInput("line-of-sight endpoints"));
    }
    if r.x == 0.0 && r.y == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "line of sight undefined: coincident points ({}, {})",
            from.x, from.y
        )));
    }
    Ok(wrap(r.angle()))
}

pub fn engagement(follower: &VehicleState, target: &VehicleState) -> Result<EngagementGeometry> {
    let lambda = los_angle(follower.position, target.position)?;
    let d = (target.position - follower.position).norm();
    Ok(EngagementGeometry {
        d,
        lambda,
        alpha_t: wrap(target.heading - lambda),
        alpha_v: wrap(follower.heading - lambda),
    })
}

pub fn path_point(path: &Path, s: f64) -> (Vec2, f64) {
    path.point(s)
}

pub fn path_error(path: &Path, p: Vec2) -> f64 {
    path.error(p)
}
