//! Virtual-target trajectory-shaping guidance for vehicle platoons.
//!
//! [`geometry`] holds paths and engagement angles, [`guidance`] the lateral
//! and longitudinal control laws, [`sim`] the Cartesian simulator and
//! [`stability`] the relative-coordinate linearization and steady-turn
//! analysis.

// Negated float comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod guidance;
pub mod sim;
pub mod stability;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use geometry::{Direction, EngagementGeometry, Path, Vec2, VehicleState};
pub use guidance::{GuidanceLaw, GuidanceParams, WheelSpeeds};
pub use sim::{
    Disturbance, DisturbanceKind, InitialCondition, PlatoonState, RunMetrics, Scenario, Thresholds,
    TrajectoryLog,
};
pub use stability::{
    ControlInput, LinearizationReport, OffsetMethod, RelativeState, SteadyState, VehicleOffset,
};
