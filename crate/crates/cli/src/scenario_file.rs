//! On-disk scenario documents (TOML, or JSON when the file ends in `.json`).

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use platoon_core::geometry::CIRCLE_START_ANGLE;
use platoon_core::{
    Direction, Disturbance, DisturbanceKind, GuidanceLaw, GuidanceParams, InitialCondition, Path,
    Scenario, Vec2, VehicleState,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawSpec {
    Regular,
    Sine,
}

impl From<LawSpec> for GuidanceLaw {
    fn from(l: LawSpec) -> Self {
        match l {
            LawSpec::Regular => GuidanceLaw::Regular,
            LawSpec::Sine => GuidanceLaw::Sine,
        }
    }
}

impl From<GuidanceLaw> for LawSpec {
    fn from(l: GuidanceLaw) -> Self {
        match l {
            GuidanceLaw::Regular => LawSpec::Regular,
            GuidanceLaw::Sine => LawSpec::Sine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSpec {
    #[default]
    Ccw,
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        direction: DirectionSpec,
        /// Polar angle of the arc-length origin; the bottom of the circle by default.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start_angle: Option<f64>,
    },
    Line {
        origin: [f64; 2],
        heading: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum PresetSpec {
    Equilibrium,
    Offset { dr: f64, dgamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Preset(PresetSpec),
    Explicit(Vec<PoseSpec>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Preset(PresetSpec::Equilibrium)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Lateral,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub vehicle: usize,
    pub kind: KindSpec,
    pub magnitude: f64,
    pub t_start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub path: PathSpec,
    pub n: usize,
    pub law: LawSpec,
    pub d_star: f64,
    pub k_v: f64,
    #[serde(rename = "V_c")]
    pub v_c: f64,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub disturbances: Vec<DisturbanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_decimation: Option<usize>,
}

impl ScenarioFile {
    /// Builds and validates the simulation scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let path = match self.path {
            PathSpec::Circle {
                center,
                radius,
                direction,
                start_angle,
            } => {
                let dir = match direction {
                    DirectionSpec::Ccw => Direction::Ccw,
                    DirectionSpec::Cw => Direction::Cw,
                };
                Path::circle(Vec2::new(center[0], center[1]), radius, dir)
                    .map_err(|e| invalid("path.radius", e.to_string()))?
                    .with_start_angle(start_angle.unwrap_or(CIRCLE_START_ANGLE))
            }
            PathSpec::Line { origin, heading } => Path::line(Vec2::new(origin[0], origin[1]), heading)
                .map_err(|e| invalid("path", e.to_string()))?,
        };
        let initial = match &self.initial {
            InitialSpec::Preset(PresetSpec::Equilibrium) => InitialCondition::Equilibrium,
            InitialSpec::Preset(PresetSpec::Offset { dr, dgamma }) => InitialCondition::Offset {
                dr: *dr,
                dgamma: *dgamma,
            },
            InitialSpec::Explicit(poses) => InitialCondition::Explicit(
                poses
                    .iter()
                    .map(|p| VehicleState::new(Vec2::new(p.x, p.y), p.gamma, p.v))
                    .collect(),
            ),
        };
        let scenario = Scenario {
            path,
            n: self.n,
            law: self.law.into(),
            params: GuidanceParams {
                d_star: self.d_star,
                k_v: self.k_v,
                v_c: self.v_c,
            },
            initial,
            disturbances: self
                .disturbances
                .iter()
                .map(|d| Disturbance {
                    vehicle: d.vehicle,
                    kind: match d.kind {
                        KindSpec::Lateral => DisturbanceKind::LateralAccel,
                        KindSpec::Velocity => DisturbanceKind::Velocity,
                    },
                    magnitude: d.magnitude,
                    t_start: d.t_start,
                    duration: d.duration,
                })
                .collect(),
            dt: self.dt,
            t_final: self.t_final,
            track_width: self.track_width,
            log_decimation: self
                .log_decimation
                .unwrap_or(platoon_core::sim::DEFAULT_LOG_DECIMATION),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Document form of a scenario; `to_scenario` of the result reproduces it.
    pub fn from_scenario(s: &Scenario) -> Self {
        let path = match s.path {
            Path::Circle {
                center,
                radius,
                direction,
                start_angle,
            } => PathSpec::Circle {
                center: [center.x, center.y],
                radius,
                direction: match direction {
                    Direction::Ccw => DirectionSpec::Ccw,
                    Direction::Cw => DirectionSpec::Cw,
                },
                start_angle: Some(start_angle),
            },
            Path::Line { origin, heading } => PathSpec::Line {
                origin: [origin.x, origin.y],
                heading,
            },
        };
        let initial = match &s.initial {
            InitialCondition::Equilibrium => InitialSpec::Preset(PresetSpec::Equilibrium),
            InitialCondition::Offset { dr, dgamma } => InitialSpec::Preset(PresetSpec::Offset {
                dr: *dr,
                dgamma: *dgamma,
            }),
            InitialCondition::Explicit(v) => InitialSpec::Explicit(
                v.iter()
                    .map(|p| PoseSpec {
                        x: p.position.x,
                        y: p.position.y,
                        gamma: p.heading,
                        v: p.speed,
                    })
                    .collect(),
            ),
        };
        ScenarioFile {
            path,
            n: s.n,
            law: s.law.into(),
            d_star: s.params.d_star,
            k_v: s.params.k_v,
            v_c: s.params.v_c,
            dt: s.dt,
            t_final: s.t_final,
            initial,
            disturbances: s
                .disturbances
                .iter()
                .map(|d| DisturbanceSpec {
                    vehicle: d.vehicle,
                    kind: match d.kind {
                        DisturbanceKind::LateralAccel => KindSpec::Lateral,
                        DisturbanceKind::Velocity => KindSpec::Velocity,
                    },
                    magnitude: d.magnitude,
                    t_start: d.t_start,
                    duration: d.duration,
                })
                .collect(),
            track_width: s.track_width,
            log_decimation: Some(s.log_decimation),
        }
    }

    pub fn parse_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn parse_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialize")
    }

    /// Reads a scenario document, choosing the format by extension.
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            Self::parse_json(&text)
        } else {
            Self::parse_toml(&text)
        };
        parsed.map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }
}

fn invalid(field: &str, reason: String) -> CliError {
    CliError::Core(platoon_core::Error::InvalidScenario {
        field: field.into(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HIGHWAY: &str = r#"
n = 4
law = "sine"
d_star = 75.0
k_v = 0.5
V_c = 25.0
dt = 0.01
t_final = 200.0

[path]
type = "circle"
center = [0.0, 0.0]
radius = 50.0
direction = "ccw"

[initial]
preset = "offset"
dr = 5.0
dgamma = 0.2

[[disturbances]]
vehicle = 1
kind = "lateral"
magnitude = 35.0
t_start = 35.0
duration = 1.0
"#;

    #[test]
    fn parses_full_document() {
        let f = ScenarioFile::parse_toml(HIGHWAY).unwrap();
        let s = f.to_scenario().unwrap();
        let mut preset = Scenario::highway(GuidanceLaw::Sine);
        preset.disturbances.push(Disturbance {
            vehicle: 1,
            kind: DisturbanceKind::LateralAccel,
            magnitude: 35.0,
            t_start: 35.0,
            duration: 1.0,
        });
        assert_eq!(s, preset);
    }

    #[test]
    fn round_trips_through_both_formats() {
        for law in [GuidanceLaw::Sine, GuidanceLaw::Regular] {
            for s in [Scenario::highway(law), Scenario::robot(law)] {
                let f = ScenarioFile::from_scenario(&s);
                let via_toml = ScenarioFile::parse_toml(&f.to_toml()).unwrap();
                let via_json = ScenarioFile::parse_json(&serde_json::to_string(&f).unwrap()).unwrap();
                assert_eq!(via_toml.to_scenario().unwrap(), s);
                assert_eq!(via_json.to_scenario().unwrap(), s);
            }
        }
    }

    #[test]
    fn explicit_poses_and_line() {
        let doc = r#"
n = 2
law = "regular"
d_star = 10.0
k_v = 0.5
V_c = 5.0
dt = 0.01
t_final = 1.0
initial = [{ x = -10.0, y = 0.0, gamma = 0.0, V = 5.0 }, { x = -20.0, y = 1.0, gamma = 0.1, V = 5.0 }]
[path]
type = "line"
origin = [0.0, 0.0]
heading = 0.0
"#;
        let s = ScenarioFile::parse_toml(doc).unwrap().to_scenario().unwrap();
        assert!(matches!(s.initial, InitialCondition::Explicit(ref v) if v.len() == 2));
        assert_eq!(s.path.curvature(), 0.0);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = HIGHWAY.replace("d_star = 75.0", "d_star = 100.0");
        let msg = ScenarioFile::parse_toml(&bad).unwrap().to_scenario().unwrap_err().to_string();
        assert!(msg.contains("d_star") && msg.contains("< 2R"), "{msg}");

        let bad = HIGHWAY.replace("vehicle = 1", "vehicle = 9");
        let msg = ScenarioFile::parse_toml(&bad).unwrap().to_scenario().unwrap_err().to_string();
        assert!(msg.contains("disturbances[0].vehicle"), "{msg}");

        let bad = HIGHWAY.replace("dt = 0.01", "dt = -1.0");
        let msg = ScenarioFile::parse_toml(&bad).unwrap().to_scenario().unwrap_err().to_string();
        assert!(msg.contains("dt"), "{msg}");

        let bad = HIGHWAY.replace("k_v = 0.5", "kv = 0.5");
        let msg = ScenarioFile::parse_toml(&bad).unwrap_err();
        assert!(msg.contains("kv"), "{msg}");

        let bad = HIGHWAY.replace("law = \"sine\"", "law = \"pursuit\"");
        let msg = ScenarioFile::parse_toml(&bad).unwrap_err();
        assert!(msg.contains("law") || msg.contains("pursuit"), "{msg}");
    }
}
