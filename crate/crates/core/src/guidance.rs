//! Trajectory-shaping guidance laws, the virtual-target speed law, the
//! platoon speed-command chain and the differential-drive mapping.

use crate::error::{Error, Result};
use crate::geometry::{wrap, EngagementGeometry, Path, VehicleState};

/// Range floor applied inside every law that divides by the range.
pub const MIN_RANGE: f64 = 1e-3;

/// Speed commands are clamped to `[0, SPEED_CAP_FACTOR * V_c]`.
pub const SPEED_CAP_FACTOR: f64 = 3.0;

/// Lateral-acceleration law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuidanceLaw {
    /// Linear combination of the relative heading angles.
    Regular,
    /// Same weights applied to the sines of the angles; holds the on-path
    /// circular configuration as an exact equilibrium.
    Sine,
}

impl GuidanceLaw {
    pub fn name(self) -> &'static str {
        match self {
            GuidanceLaw::Regular => "regular",
            GuidanceLaw::Sine => "sine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    /// Desired separation / look-ahead distance, m.
    pub d_star: f64,
    /// Speed-loop gain, 1/s.
    pub k_v: f64,
    /// Commanded platoon speed, m/s.
    pub v_c: f64,
}

impl GuidanceParams {
    pub fn new(d_star: f64, k_v: f64, v_c: f64) -> Result<Self> {
        let p = Self { d_star, k_v, v_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_star", self.d_star), ("k_v", self.k_v), ("V_c", self.v_c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario {
                    field: name.into(),
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Checks that the desired chord fits on a circle of the given radius.
    pub fn validate_for_radius(&self, radius: f64) -> Result<()> {
        if !(self.d_star < 2.0 * radius) {
            return Err(Error::ChordTooLong {
                d_star: self.d_star,
                radius,
            });
        }
        Ok(())
    }

    pub fn speed_cap(&self) -> f64 {
        SPEED_CAP_FACTOR * self.v_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelSpeeds {
    pub v_right: f64,
    pub v_left: f64,
}

impl WheelSpeeds {
    pub fn forward_speed(&self) -> f64 {
        0.5 * (self.v_right + self.v_left)
    }

    pub fn yaw_rate(&self, track_width: f64) -> f64 {
        (self.v_right - self.v_left) / track_width
    }
}

/// Lateral acceleration command (positive turns the heading CCW).
///
/// Regular: `(V²/d)(-4 α_v - 2 α_t)`; sine: `(V²/d)(-4 sin α_v - 2 sin α_t)`.
pub fn lateral_accel(law: GuidanceLaw, geom: &EngagementGeometry, speed: f64) -> f64 {
    accel_from_angles(law, geom.d, geom.alpha_t, geom.alpha_v, speed)
}

pub(crate) fn accel_from_angles(
    law: GuidanceLaw,
    d: f64,
    alpha_t: f64,
    alpha_v: f64,
    speed: f64,
) -> f64 {
    let gain = speed * speed / d.max(MIN_RANGE);
    let shaping = match law {
        GuidanceLaw::Regular => -4.0 * wrap(alpha_v) - 2.0 * wrap(alpha_t),
        GuidanceLaw::Sine => -4.0 * alpha_v.sin() - 2.0 * alpha_t.sin(),
    };
    gain * shaping
}

/// Speed of a target that slows down when the follower lags and matches the
/// follower at the desired range: `V_f d*/d`, clamped to `[0, 3 V_c]`.
pub fn virtual_target_speed(v_follower: f64, d: f64, params: &GuidanceParams) -> f64 {
    scaled_speed(v_follower, d, params)
}

fn scaled_speed(v: f64, gap: f64, params: &GuidanceParams) -> f64 {
    (v * (params.d_star / gap.max(MIN_RANGE))).clamp(0.0, params.speed_cap())
}

/// Longitudinal commands for a platoon ordered front to back.
///
/// `gaps[i]` is the range from vehicle `i` to its predecessor (`gaps[0]` is
/// lead-to-virtual-target). The last vehicle is commanded `V_c`; every other
/// vehicle `i` is commanded `V[i+1] d*/gaps[i+1]`, so a vehicle slows down
/// while its follower lags.
pub fn chain_speed_commands(
    platoon: &[VehicleState],
    gaps: &[f64],
    params: &GuidanceParams,
) -> Result<Vec<f64>> {
    if platoon.is_empty() {
        return Err(Error::Domain("platoon must contain at least one vehicle".into()));
    }
    if gaps.len() != platoon.len() {
        return Err(Error::Domain(format!(
            "expected {} gaps, got {}",
            platoon.len(),
            gaps.len()
        )));
    }
    let speeds: Vec<f64> = platoon.iter().map(|v| v.speed).collect();
    Ok(speed_commands(&speeds, gaps, params))
}

/// Slice form of [`chain_speed_commands`] shared by both state representations.
pub(crate) fn speed_commands(speeds: &[f64], gaps: &[f64], params: &GuidanceParams) -> Vec<f64> {
    let n = speeds.len();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                params.v_c
            } else {
                scaled_speed(speeds[i + 1], gaps[i + 1], params)
            }
        })
        .collect()
}

/// Lateral acceleration of a target moving along `path` at speed `v_t`.
pub fn lead_target_accel(v_t: f64, path: &Path) -> f64 {
    v_t * v_t * path.curvature()
}

/// Maps a forward speed and lateral acceleration to differential wheel speeds.
pub fn wheel_speeds(v_c: f64, accel: f64, track_width: f64) -> WheelSpeeds {
    if accel == 0.0 {
        return WheelSpeeds {
            v_right: v_c,
            v_left: v_c,
        };
    }
    // signed turn radius
    let turn_radius = v_c * v_c / accel;
    let delta = v_c * track_width / (2.0 * turn_radius);
    WheelSpeeds {
        v_right: v_c + delta,
        v_left: v_c - delta,
    }
}
