//! Fixed-step simulation of a platoon in Cartesian coordinates.
//!
//! Vehicle 1 pursues a virtual target that moves along the reference path;
//! every other vehicle pursues the vehicle ahead of it. A run is strictly
//! sequential and bit-for-bit deterministic.

mod dynamics;
mod log;
mod metrics;
mod scenario;

pub use dynamics::{derivatives, evaluate, step, Evaluation, PlatoonRates};
pub use log::{format_sig9, LogRecord, TrajectoryLog, CSV_HEADER};
pub use metrics::{metrics, RunMetrics, Thresholds, VehicleMetrics};
pub use scenario::{
    Disturbance, DisturbanceKind, InitialCondition, Scenario, DEFAULT_LOG_DECIMATION,
    SPEED_FLOOR_FACTOR,
};

use crate::error::Result;
use crate::geometry::VehicleState;

/// Full Cartesian state of the platoon, vehicles ordered front to back.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonState {
    pub t: f64,
    /// Arc length of the virtual target along the path.
    pub target_s: f64,
    /// Virtual target speed `V_t` at this state.
    pub target_speed: f64,
    pub vehicles: Vec<VehicleState>,
}

/// Integrates `scenario` from `t = 0` to `t_final`, logging every
/// `log_decimation` steps plus the final step.
pub fn run(scenario: &Scenario) -> Result<TrajectoryLog> {
    run_with_state(scenario).map(|(log, _)| log)
}

/// Like [`run`], also returning the terminal state.
pub fn run_with_state(scenario: &Scenario) -> Result<(TrajectoryLog, PlatoonState)> {
    let mut state = scenario.initial_state()?;
    let steps = scenario.steps();
    let mut log = TrajectoryLog::new(scenario.n);
    log.record(&state, scenario)?;
    for k in 1..=steps {
        let mut next = step(&state, scenario, scenario.dt)?;
        next.t = k as f64 * scenario.dt;
        state = next;
        if k % scenario.log_decimation == 0 || k == steps {
            log.record(&state, scenario)?;
        }
    }
    Ok((log, state))
}
