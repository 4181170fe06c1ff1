use serde::Serialize;

use super::log::TrajectoryLog;
use super::scenario::Scenario;

/// Convergence thresholds used for settling times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub path_error: f64,
    pub gap_error: f64,
    pub speed_error: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            path_error: 0.1,
            gap_error: 0.1,
            speed_error: 0.1,
        }
    }
}

impl Thresholds {
    /// The default thresholds rescaled from the highway preset
    /// (R = 50 m, d* = 75 m, V_c = 25 m/s) to another scenario.
    pub fn relative_to(scenario: &Scenario) -> Self {
        let base = Self::default();
        let radius = scenario.path.radius().unwrap_or(50.0);
        Self {
            path_error: base.path_error * radius / 50.0,
            gap_error: base.gap_error * scenario.params.d_star / 75.0,
            speed_error: base.speed_error * scenario.params.v_c / 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleMetrics {
    pub vehicle: usize,
    pub max_abs_path_error: f64,
    /// Mean of |path error| over the last 10% of the run.
    pub terminal_mean_abs_path_error: f64,
    /// Mean signed path error over the same window.
    pub terminal_mean_path_error: f64,
    pub max_abs_gap_error: f64,
    pub max_abs_speed_error: f64,
    pub final_abs_path_error: f64,
    pub final_abs_gap_error: f64,
    pub final_abs_speed_error: f64,
    /// Last logged instant at which any error exceeded its threshold; `0`
    /// when none ever did and `None` when the final record still exceeds.
    pub settling_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub thresholds: Thresholds,
    pub vehicles: Vec<VehicleMetrics>,
}

impl RunMetrics {
    pub fn all_settled(&self) -> bool {
        self.vehicles.iter().all(|v| v.settling_time.is_some())
    }

    /// Latest settling time across the platoon.
    pub fn settling_time(&self) -> Option<f64> {
        self.vehicles
            .iter()
            .map(|v| v.settling_time)
            .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))
    }
}

pub fn metrics(log: &TrajectoryLog, scenario: &Scenario, thresholds: Thresholds) -> RunMetrics {
    let (t0, t1) = match (log.records.first(), log.records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => {
            return RunMetrics {
                thresholds,
                vehicles: Vec::new(),
            }
        }
    };
    let window_start = t1 - 0.1 * (t1 - t0);
    let vehicles = (1..=scenario.n)
        .map(|id| {
            let mut m = VehicleMetrics {
                vehicle: id,
                max_abs_path_error: 0.0,
                terminal_mean_abs_path_error: 0.0,
                terminal_mean_path_error: 0.0,
                max_abs_gap_error: 0.0,
                max_abs_speed_error: 0.0,
                final_abs_path_error: 0.0,
                final_abs_gap_error: 0.0,
                final_abs_speed_error: 0.0,
                settling_time: Some(0.0),
            };
            let (mut sum_abs, mut sum, mut count) = (0.0, 0.0, 0usize);
            let mut last_exceed: Option<f64> = None;
            let mut final_exceeds = false;
            for r in log.vehicle(id) {
                let (pe, ge, ve) = (r.path_err.abs(), r.gap_err.abs(), r.vel_err.abs());
                m.max_abs_path_error = m.max_abs_path_error.max(pe);
                m.max_abs_gap_error = m.max_abs_gap_error.max(ge);
                m.max_abs_speed_error = m.max_abs_speed_error.max(ve);
                if r.t >= window_start {
                    sum_abs += pe;
                    sum += r.path_err;
                    count += 1;
                }
                let exceeds = pe > thresholds.path_error
                    || ge > thresholds.gap_error
                    || ve > thresholds.speed_error;
                if exceeds {
                    last_exceed = Some(r.t);
                }
                final_exceeds = exceeds;
                m.final_abs_path_error = pe;
                m.final_abs_gap_error = ge;
                m.final_abs_speed_error = ve;
            }
            if count > 0 {
                m.terminal_mean_abs_path_error = sum_abs / count as f64;
                m.terminal_mean_path_error = sum / count as f64;
            }
            m.settling_time = if final_exceeds {
                None
            } else {
                Some(last_exceed.unwrap_or(0.0))
            };
            m
        })
        .collect();
    RunMetrics {
        thresholds,
        vehicles,
    }
}
