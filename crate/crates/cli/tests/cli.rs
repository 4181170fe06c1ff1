use std::path::Path;
use std::process::{Command, Output};

use platoon_cli::commands::{sweep_rows, SweepOptions};
use platoon_cli::{exit, Preset, ScenarioFile};
use platoon_core::GuidanceLaw;

fn platoon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platoon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, edit: impl FnOnce(&mut ScenarioFile)) -> String {
    let mut f = ScenarioFile::from_scenario(&Preset::Highway.scenario());
    f.t_final = 5.0;
    edit(&mut f);
    let path = dir.join(name);
    std::fs::write(&path, f.to_toml()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_scenario(dir.path(), "s.toml", |_| {});
    let out = dir.path().join("out");
    let o = platoon(&["simulate", "--scenario", &file, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,vehicle,x,y,gamma,V,d,alpha_t,alpha_v,a_cmd,V_cmd,path_err,gap_err,vel_err\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["tool", "version", "runtime_seconds", "scenario", "metrics"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["metrics"]["vehicles"].as_array().unwrap().len(), 4);
}

#[test]
fn chord_longer_than_diameter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_scenario(dir.path(), "s.toml", |f| f.d_star = 100.0);
    let o = platoon(&["simulate", "--scenario", &file]);
    assert_eq!(code(&o), exit::INVALID);
    assert!(stderr(&o).contains("< 2R"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "n = \"four\"\n").unwrap();
    let o = platoon(&["simulate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), exit::INVALID);
    assert!(stderr(&o).contains('n'), "{}", stderr(&o));

    let file = write_scenario(dir.path(), "s.toml", |f| f.disturbances.push(platoon_cli::scenario_file::DisturbanceSpec {
        vehicle: 7,
        kind: platoon_cli::scenario_file::KindSpec::Lateral,
        magnitude: 1.0,
        t_start: 0.0,
        duration: 1.0,
    }));
    let o = platoon(&["simulate", "--scenario", &file]);
    assert_eq!(code(&o), exit::INVALID);
    assert!(stderr(&o).contains("disturbances[0].vehicle"), "{}", stderr(&o));
}

#[test]
fn usage_and_io_errors_are_distinguished() {
    assert_eq!(code(&platoon(&["simulate"])), exit::USAGE);
    assert_eq!(code(&platoon(&["frobnicate"])), exit::USAGE);
    let o = platoon(&["simulate", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(code(&o), exit::IO);
}

#[test]
fn linearize_reports_and_flags_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let o = platoon(&["linearize", "--preset", "highway", "--n", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("linearization.json")).unwrap()).unwrap();
    for key in ["n", "d_star", "R", "V_c", "k_v", "alpha", "beta", "eigenvalues_numeric", "eigenvalues_closed_form", "max_block_discrepancy"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }

    // highway preset, n = 4: 16 stable eigenvalues, but no real beta pair at k_v = 0.5
    let o = platoon(&["linearize", "--preset", "highway", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), exit::MISMATCH);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("linearization.json")).unwrap()).unwrap();
    let ev = report["eigenvalues_numeric"].as_array().unwrap();
    assert_eq!(ev.len(), 16);
    assert!(ev.iter().all(|z| z[0].as_f64().unwrap() < 0.0));
}

#[test]
fn linearize_needs_a_circle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.toml");
    std::fs::write(
        &path,
        "n = 2\nlaw = \"sine\"\nd_star = 10.0\nk_v = 0.5\nV_c = 5.0\ndt = 0.01\nt_final = 1.0\n\
         [path]\ntype = \"line\"\norigin = [0.0, 0.0]\nheading = 0.0\n",
    )
    .unwrap();
    let o = platoon(&["linearize", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), exit::DOMAIN);

    let o = platoon(&["equilibrium", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK);
    let eq: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("equilibrium.json")).unwrap()).unwrap();
    assert!(eq["regular_residual"].as_f64().unwrap() <= 1e-12);
    assert!(eq["sine_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn equilibrium_on_circle_lists_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let o = platoon(&["equilibrium", "--preset", "highway", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK);
    let eq: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("equilibrium.json")).unwrap()).unwrap();
    assert!(eq["sine_residual"].as_f64().unwrap() <= 1e-12);
    assert!(eq["regular_residual"].as_f64().unwrap() > 0.0);
    assert_eq!(eq["regular_steady_state"]["vehicles"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_is_ordered_and_sine_column_vanishes() {
    let base = Preset::Highway.scenario();
    let rows = sweep_rows(
        &base,
        &SweepOptions {
            ratio_min: 0.05,
            ratio_max: 0.9,
            steps: 8,
            simulate: false,
            out: None,
        },
    )
    .unwrap();
    assert_eq!(rows.len(), 8 * 2 * 4);
    assert!(rows.windows(2).all(|w| w[0].ratio <= w[1].ratio));
    for r in rows.iter().filter(|r| r.law == GuidanceLaw::Sine) {
        assert!(r.radius_offset.abs() <= 1e-6 * 50.0, "{r:?}");
    }
    for vehicle in 1..=4 {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.law == GuidanceLaw::Regular && r.vehicle == vehicle)
            .map(|r| r.radius_offset.abs())
            .collect();
        assert!(series.windows(2).all(|w| w[1] > w[0]), "vehicle {vehicle}: {series:?}");
    }
}

#[test]
fn simulated_sweep_small_ratio_offset() {
    let mut base = Preset::HighwayRegular.scenario();
    base.n = 1;
    base.t_final = 60.0;
    let rows = sweep_rows(
        &base,
        &SweepOptions {
            ratio_min: 0.05,
            ratio_max: 0.1,
            steps: 2,
            simulate: true,
            out: None,
        },
    )
    .unwrap();
    let r = rows
        .iter()
        .find(|r| r.law == GuidanceLaw::Regular && r.ratio == 0.05)
        .unwrap();
    assert!(r.radius_offset.abs() < 0.005 * 50.0, "{r:?}");
}

#[test]
fn sweep_rejects_bad_ratio_range() {
    let o = platoon(&["sweep", "--preset", "highway", "--ratio-min", "0.6", "--ratio-max", "0.4"]);
    assert_eq!(code(&o), exit::INVALID);
    let o = platoon(&["sweep", "--preset", "highway", "--ratio-max", "1.2"]);
    assert_eq!(code(&o), exit::INVALID);
}

#[test]
fn presets_match_stated_parameters() {
    let h = Preset::Highway.scenario();
    assert_eq!(
        (h.path.radius(), h.params.d_star, h.params.v_c, h.params.k_v, h.n),
        (Some(50.0), 75.0, 25.0, 0.5, 4)
    );
    let r = Preset::Robot.scenario();
    assert_eq!(
        (r.path.radius(), r.params.d_star, r.params.v_c, r.params.k_v, r.n),
        (Some(1.0), 0.7, 0.35, 0.5, 6)
    );
    assert_eq!(Preset::HighwayRegular.scenario().law, GuidanceLaw::Regular);
}
