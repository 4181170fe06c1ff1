use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use platoon_core::sim::{self, metrics, InitialCondition, Thresholds};
use platoon_core::stability::{
    equilibrium_state, linearize, rhs_relative, steady_turn, ControlInput, LinearizationReport,
    SteadyState,
};
use platoon_core::{Complex64, GuidanceLaw, Scenario};

use crate::error::{exit, CliError, Result};
use crate::report::{SummaryReport, TOOL, VERSION};
use crate::scenario_file::ScenarioFile;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const LINEARIZATION_FILE: &str = "linearization.json";
pub const EQUILIBRIUM_FILE: &str = "equilibrium.json";
pub const SWEEP_FILE: &str = "sweep.csv";

fn ensure_dir(dir: &FsPath) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &FsPath, bytes: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn circle_radius(scenario: &Scenario, command: &str) -> Result<f64> {
    scenario.path.radius().ok_or_else(|| {
        CliError::Core(platoon_core::Error::Domain(format!(
            "{command} needs a circular path"
        )))
    })
}

pub struct SimulateOptions {
    pub out: Option<PathBuf>,
    pub linearize: bool,
}

pub fn simulate(scenario: &Scenario, opts: &SimulateOptions) -> Result<i32> {
    let started = Instant::now();
    let log = sim::run(scenario)?;
    let runtime_seconds = started.elapsed().as_secs_f64();
    let m = metrics(&log, scenario, Thresholds::relative_to(scenario));

    let steady_state = match (scenario.law, scenario.path.radius()) {
        (GuidanceLaw::Regular, Some(r)) => Some(steady_turn(scenario.n, &scenario.params, r, scenario.law)?),
        _ => None,
    };
    let linearization = if opts.linearize {
        Some(linearize(scenario.n, &scenario.params, circle_radius(scenario, "linearize")?)?)
    } else {
        None
    };
    let report = SummaryReport {
        tool: TOOL,
        version: VERSION,
        runtime_seconds,
        scenario: ScenarioFile::from_scenario(scenario),
        steps: scenario.steps(),
        final_time: log.final_time().unwrap_or(0.0),
        converged: m.all_settled(),
        metrics: m,
        steady_state,
        linearization,
    };

    println!(
        "{} law, n = {}, t_final = {} s, {} steps in {:.2} s",
        scenario.law.name(),
        scenario.n,
        scenario.t_final,
        report.steps,
        runtime_seconds
    );
    println!(
        "{:>7} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "vehicle", "max|path|", "mean|path|", "max|gap|", "max|V|", "settled"
    );
    for v in &report.metrics.vehicles {
        let settled = v
            .settling_time
            .map_or_else(|| "no".to_string(), |t| format!("{t:.1} s"));
        println!(
            "{:>7} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>10}",
            v.vehicle,
            v.max_abs_path_error,
            v.terminal_mean_abs_path_error,
            v.max_abs_gap_error,
            v.max_abs_speed_error,
            settled
        );
    }
    if let Some(ss) = &report.steady_state {
        let offsets: Vec<String> = ss
            .vehicles
            .iter()
            .map(|v| format!("{:.3}", v.radius_offset))
            .collect();
        println!("predicted steady radius offsets (m): {}", offsets.join(", "));
    }

    if let Some(dir) = &opts.out {
        ensure_dir(dir)?;
        let csv = dir.join(TRAJECTORY_FILE);
        let mut w = BufWriter::new(File::create(&csv).map_err(|e| CliError::io(&csv, e))?);
        log.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&csv, e))?;
        write_json(&dir.join(SUMMARY_FILE), &report)?;
        println!("wrote {} and {}", csv.display(), dir.join(SUMMARY_FILE).display());
    }
    Ok(exit::OK)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:>11.6} {:>+11.6}j", z.re, z.im)
}

/// Pairs numeric and closed-form eigenvalues, closest pairs first.
fn eigen_table(r: &LinearizationReport) -> String {
    let (num, cf) = (&r.eigenvalues_numeric, &r.eigenvalues_closed_form);
    let mut candidates: Vec<(f64, usize, usize)> = (0..num.len())
        .flat_map(|i| (0..cf.len()).map(move |k| ((num[i] - cf[k]).norm(), i, k)))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut partner: Vec<Option<usize>> = vec![None; num.len()];
    let mut taken = vec![false; cf.len()];
    for (_, i, k) in candidates {
        if partner[i].is_none() && !taken[k] {
            partner[i] = Some(k);
            taken[k] = true;
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{:>4} {:>24} {:>24} {:>10}", "#", "numeric", "closed form", "|delta|");
    for (i, z) in num.iter().enumerate() {
        match partner[i] {
            Some(k) => {
                let _ = writeln!(out, "{:>4} {} {} {:>10.3e}", i + 1, fmt_c(*z), fmt_c(cf[k]), (cf[k] - z).norm());
            }
            None => {
                let _ = writeln!(out, "{:>4} {} {:>24} {:>10}", i + 1, fmt_c(*z), "-", "-");
            }
        }
    }
    out
}

pub fn linearize_cmd(scenario: &Scenario, n: Option<usize>, out: Option<&FsPath>) -> Result<i32> {
    let radius = circle_radius(scenario, "linearize")?;
    let n = n.unwrap_or(scenario.n);
    let r = linearize(n, &scenario.params, radius)?;

    println!(
        "n = {}, d* = {}, R = {}, V_c = {}, k_v = {}: alpha = {:.6}, beta = {}",
        r.n,
        r.d_star,
        r.radius,
        r.v_c,
        r.k_v,
        r.alpha,
        r.beta.map_or_else(|| "n/a".to_string(), |b| format!("{b:.6}"))
    );
    print!("{}", eigen_table(&r));
    println!(
        "equilibrium residual {:.3e}; max block discrepancy {:.3e}; max eigenpair residual {:.3e}",
        r.equilibrium_residual, r.max_block_discrepancy, r.max_relative_residual
    );
    for d in &r.diagnostics {
        println!("diagnostic: {d}");
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(&dir.join(LINEARIZATION_FILE), &r)?;
        println!("wrote {}", dir.join(LINEARIZATION_FILE).display());
    }
    if !r.all_stable {
        return Err(CliError::Verification("unstable eigenvalue at the equilibrium".into()));
    }
    if !r.spectrum_matches {
        return Err(CliError::Verification(format!(
            "numeric spectrum does not match the closed form within {}",
            r.spectrum_match.tolerance
        )));
    }
    Ok(exit::OK)
}

#[derive(Debug, Serialize)]
struct EquilibriumReport {
    path: &'static str,
    curvature: f64,
    sine_residual: f64,
    regular_residual: f64,
    regular_steady_state: Option<SteadyState>,
}

pub fn equilibrium_cmd(scenario: &Scenario, out: Option<&FsPath>) -> Result<i32> {
    let p = &scenario.params;
    let curvature = scenario.path.curvature();
    let u = ControlInput::new(curvature, p.v_c)?;
    let x = equilibrium_state(scenario.n, p, curvature)?;
    let residual = |law| {
        rhs_relative(&x, &u, law, p)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let radius = scenario.path.radius().unwrap_or(f64::INFINITY);
    let report = EquilibriumReport {
        path: if scenario.path.radius().is_some() { "circle" } else { "line" },
        curvature,
        sine_residual: residual(GuidanceLaw::Sine),
        regular_residual: residual(GuidanceLaw::Regular),
        regular_steady_state: Some(steady_turn(scenario.n, p, radius, GuidanceLaw::Regular)?),
    };
    println!("|rhs|_inf at the on-path equilibrium ({} path):", report.path);
    println!("  sine    {:.3e}", report.sine_residual);
    println!("  regular {:.3e}", report.regular_residual);
    if let Some(ss) = &report.regular_steady_state {
        println!("regular-law steady turn ({:?}):", ss.method);
        println!("{:>7} {:>12} {:>12} {:>12}", "vehicle", "offset (m)", "gap (m)", "speed (m/s)");
        for v in &ss.vehicles {
            println!("{:>7} {:>12.4} {:>12.4} {:>12.4}", v.vehicle, v.radius_offset, v.gap, v.speed);
        }
        for d in &ss.diagnostics {
            println!("diagnostic: {d}");
        }
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(&dir.join(EQUILIBRIUM_FILE), &report)?;
    }
    Ok(exit::OK)
}

pub struct SweepOptions {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub steps: usize,
    /// Use long simulations instead of the steady-turn solver.
    pub simulate: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub d_star: f64,
    pub law: GuidanceLaw,
    pub vehicle: usize,
    pub radius_offset: f64,
    pub method: &'static str,
}

pub const SWEEP_HEADER: &str = "ratio,d_star,law,vehicle,radius_offset,method";

pub fn sweep_rows(base: &Scenario, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let (lo, hi) = (opts.ratio_min, opts.ratio_max);
    if !(lo > 0.0 && lo < hi && hi < 1.0) {
        return Err(CliError::Core(platoon_core::Error::InvalidScenario {
            field: "ratio".into(),
            reason: format!("need 0 < ratio-min < ratio-max < 1, got {lo} and {hi}"),
        }));
    }
    if opts.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    let radius = circle_radius(base, "sweep")?;
    let ratios: Vec<f64> = (0..opts.steps)
        .map(|k| lo + (hi - lo) * k as f64 / (opts.steps - 1) as f64)
        .collect();
    let jobs: Vec<(f64, GuidanceLaw)> = ratios
        .iter()
        .flat_map(|&r| [GuidanceLaw::Sine, GuidanceLaw::Regular].map(|l| (r, l)))
        .collect();
    let results: Vec<Result<Vec<SweepRow>>> = jobs
        .par_iter()
        .map(|&(ratio, law)| {
            let mut params = base.params;
            params.d_star = 2.0 * radius * ratio;
            let (offsets, method): (Vec<f64>, &'static str) = if opts.simulate {
                let mut s = base.clone();
                s.params = params;
                s.law = law;
                s.initial = InitialCondition::Equilibrium;
                s.disturbances.clear();
                let log = sim::run(&s)?;
                let m = metrics(&log, &s, Thresholds::relative_to(&s));
                (m.vehicles.iter().map(|v| v.terminal_mean_path_error).collect(), "simulation")
            } else {
                let ss = steady_turn(base.n, &params, radius, law)?;
                let method = match ss.method {
                    platoon_core::OffsetMethod::Newton => "newton",
                    platoon_core::OffsetMethod::Simulation => "simulation",
                };
                (ss.vehicles.iter().map(|v| v.radius_offset).collect(), method)
            };
            Ok(offsets
                .into_iter()
                .enumerate()
                .map(|(i, radius_offset)| SweepRow {
                    ratio,
                    d_star: params.d_star,
                    law,
                    vehicle: i + 1,
                    radius_offset,
                    method,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            sim::format_sig9(r.ratio),
            sim::format_sig9(r.d_star),
            r.law.name(),
            r.vehicle,
            sim::format_sig9(r.radius_offset),
            r.method
        );
    }
    out
}

pub fn sweep_cmd(base: &Scenario, opts: &SweepOptions) -> Result<i32> {
    let rows = sweep_rows(base, opts)?;
    let csv = sweep_csv(&rows);
    match &opts.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_file(&dir.join(SWEEP_FILE), csv.as_bytes())?;
            println!("wrote {}", dir.join(SWEEP_FILE).display());
        }
        None => print!("{csv}"),
    }
    // monotonicity of the regular-law offsets is reported, not enforced
    for vehicle in 1..=base.n {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.law == GuidanceLaw::Regular && r.vehicle == vehicle)
            .map(|r| r.radius_offset.abs())
            .collect();
        if !series.windows(2).all(|w| w[1] >= w[0]) {
            eprintln!("note: regular-law |offset| of vehicle {vehicle} is not monotone in the ratio");
        }
    }
    Ok(exit::OK)
}
