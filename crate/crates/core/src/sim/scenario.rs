use crate::error::{Error, Result};
use crate::geometry::{Direction, Path, Vec2, VehicleState};
use crate::guidance::{GuidanceLaw, GuidanceParams};

use super::PlatoonState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisturbanceKind {
    /// Adds `magnitude` (m/s²) to the vehicle's commanded lateral acceleration.
    LateralAccel,
    /// Adds `magnitude` (m/s) to the speed used by the kinematics; the speed
    /// state and its controller are left alone.
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    /// 1-based vehicle index, 1 = lead.
    pub vehicle: usize,
    pub kind: DisturbanceKind,
    pub magnitude: f64,
    pub t_start: f64,
    pub duration: f64,
}

impl Disturbance {
    /// Active on `[t_start, t_start + duration)`.
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_start + self.duration
    }

    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// On the path at chord spacing `d*` behind the virtual target, tangent
    /// headings, speed `V_c`.
    Equilibrium,
    /// Equilibrium placement displaced by `dr` along the path-error normal
    /// (outward for circles, left for lines) with heading offset `dgamma`.
    Offset { dr: f64, dgamma: f64 },
    /// Explicit poses, front to back.
    Explicit(Vec<VehicleState>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub path: Path,
    pub n: usize,
    pub law: GuidanceLaw,
    pub params: GuidanceParams,
    pub initial: InitialCondition,
    pub disturbances: Vec<Disturbance>,
    pub dt: f64,
    pub t_final: f64,
    /// When set, turning goes through the differential-drive wheel mapping.
    pub track_width: Option<f64>,
    pub log_decimation: usize,
}

pub const DEFAULT_LOG_DECIMATION: usize = 10;

/// Fraction of `V_c` below which speeds are floored.
pub const SPEED_FLOOR_FACTOR: f64 = 0.01;

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidScenario {
        field: field.into(),
        reason: reason.into(),
    }
}

impl Scenario {
    /// Highway-scale platoon: R = 50 m, d* = 75 m, V_c = 25 m/s, k_v = 0.5, four vehicles.
    pub fn highway(law: GuidanceLaw) -> Self {
        Scenario {
            path: Path::circle(Vec2::ZERO, 50.0, Direction::Ccw).expect("valid radius"),
            n: 4,
            law,
            params: GuidanceParams {
                d_star: 75.0,
                k_v: 0.5,
                v_c: 25.0,
            },
            initial: InitialCondition::Offset {
                dr: 5.0,
                dgamma: 0.2,
            },
            disturbances: Vec::new(),
            dt: 0.01,
            t_final: 200.0,
            track_width: None,
            log_decimation: DEFAULT_LOG_DECIMATION,
        }
    }

    /// Robot-scale platoon: six differential-drive robots at 0.35 m/s on a
    /// 1 m circle with 0.7 m spacing.
    pub fn robot(law: GuidanceLaw) -> Self {
        Scenario {
            path: Path::circle(Vec2::ZERO, 1.0, Direction::Ccw).expect("valid radius"),
            n: 6,
            law,
            params: GuidanceParams {
                d_star: 0.7,
                k_v: 0.5,
                v_c: 0.35,
            },
            initial: InitialCondition::Offset {
                dr: 0.1,
                dgamma: 0.2,
            },
            disturbances: Vec::new(),
            dt: 0.002,
            t_final: 100.0,
            track_width: Some(0.1),
            log_decimation: 50,
        }
    }

    pub fn speed_floor(&self) -> f64 {
        SPEED_FLOOR_FACTOR * self.params.v_c
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "platoon needs at least one vehicle"));
        }
        self.params.validate()?;
        if let Some(r) = self.path.radius() {
            if !(self.params.d_star < 2.0 * r) {
                return Err(invalid(
                    "d_star",
                    format!(
                        "d_star = {} must be < 2R = {} so the chord exists on the circle",
                        self.params.d_star,
                        2.0 * r
                    ),
                ));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > self.dt) {
            return Err(invalid(
                "t_final",
                format!("must be finite and > dt, got {}", self.t_final),
            ));
        }
        if self.log_decimation == 0 {
            return Err(invalid("log_decimation", "must be >= 1"));
        }
        if let Some(w) = self.track_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid("track_width", format!("must be finite and > 0, got {w}")));
            }
        }
        for (k, dist) in self.disturbances.iter().enumerate() {
            let field = |f: &str| format!("disturbances[{k}].{f}");
            if dist.vehicle < 1 || dist.vehicle > self.n {
                return Err(invalid(
                    &field("vehicle"),
                    format!("must be in 1..={}, got {}", self.n, dist.vehicle),
                ));
            }
            if !(dist.duration.is_finite() && dist.duration > 0.0) {
                return Err(invalid(&field("duration"), "must be finite and > 0"));
            }
            if !dist.t_start.is_finite() {
                return Err(invalid(&field("t_start"), "must be finite"));
            }
            if !dist.magnitude.is_finite() {
                return Err(invalid(&field("magnitude"), "must be finite"));
            }
        }
        match &self.initial {
            InitialCondition::Equilibrium => {}
            InitialCondition::Offset { dr, dgamma } => {
                if !dr.is_finite() || !dgamma.is_finite() {
                    return Err(invalid("initial", "dr and dgamma must be finite"));
                }
            }
            InitialCondition::Explicit(poses) => {
                if poses.len() != self.n {
                    return Err(invalid(
                        "initial",
                        format!("expected {} poses, got {}", self.n, poses.len()),
                    ));
                }
                for (i, p) in poses.iter().enumerate() {
                    if !p.is_finite() || p.speed < 0.0 {
                        return Err(invalid(
                            &format!("initial[{i}]"),
                            "pose must be finite with V >= 0",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Initial platoon state at `t = 0`, virtual target at arc length zero.
    pub fn initial_state(&self) -> Result<PlatoonState> {
        self.validate()?;
        let vehicles = match &self.initial {
            InitialCondition::Explicit(poses) => poses.clone(),
            InitialCondition::Equilibrium => self.placed(0.0, 0.0)?,
            InitialCondition::Offset { dr, dgamma } => self.placed(*dr, *dgamma)?,
        };
        let mut state = PlatoonState {
            t: 0.0,
            target_s: 0.0,
            target_speed: self.params.v_c,
            vehicles,
        };
        state.target_speed = super::dynamics::target_speed(&state, self)?;
        Ok(state)
    }

    fn placed(&self, dr: f64, dgamma: f64) -> Result<Vec<VehicleState>> {
        let arc = self.path.arc_for_chord(self.params.d_star)?;
        Ok((1..=self.n)
            .map(|i| {
                let s = -(i as f64) * arc;
                let (p, h) = self.path.point(s);
                let p = p + self.path.error_normal(s) * dr;
                VehicleState::new(p, h + dgamma, self.params.v_c)
            })
            .collect())
    }
}
