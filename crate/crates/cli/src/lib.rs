//! Scenario files, reports and command runners behind the `platoon` binary.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario_file;

use std::path::Path;

use platoon_core::{GuidanceLaw, Scenario};

pub use error::{exit, CliError, Result};
pub use scenario_file::ScenarioFile;

/// Built-in scenarios selectable with `--preset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Highway scale, sine law.
    Highway,
    HighwaySine,
    HighwayRegular,
    /// Robot scale with differential-drive turning, sine law.
    Robot,
    RobotRegular,
}

impl Preset {
    pub fn scenario(self) -> Scenario {
        match self {
            Preset::Highway | Preset::HighwaySine => Scenario::highway(GuidanceLaw::Sine),
            Preset::HighwayRegular => Scenario::highway(GuidanceLaw::Regular),
            Preset::Robot => Scenario::robot(GuidanceLaw::Sine),
            Preset::RobotRegular => Scenario::robot(GuidanceLaw::Regular),
        }
    }
}

/// Resolves `--preset` / `--scenario` into a validated scenario.
pub fn resolve(preset: Option<Preset>, scenario: Option<&Path>) -> Result<Scenario> {
    match (preset, scenario) {
        (Some(p), None) => Ok(p.scenario()),
        (None, Some(path)) => ScenarioFile::load(path)?.to_scenario(),
        (Some(_), Some(_)) => Err(CliError::Usage("use either --preset or --scenario, not both".into())),
        (None, None) => Err(CliError::Usage("one of --preset or --scenario is required".into())),
    }
}
