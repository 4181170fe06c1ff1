use serde::Serialize;

use platoon_core::sim::RunMetrics;
use platoon_core::stability::{LinearizationReport, SteadyState};

use crate::scenario_file::ScenarioFile;

pub const TOOL: &str = "platoon";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce and judge a simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub runtime_seconds: f64,
    /// Re-parses into the scenario that produced this report.
    pub scenario: ScenarioFile,
    pub steps: usize,
    pub final_time: f64,
    pub converged: bool,
    pub metrics: RunMetrics,
    /// Predicted converged circles, for regular-law runs on circles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearization: Option<LinearizationReport>,
}
