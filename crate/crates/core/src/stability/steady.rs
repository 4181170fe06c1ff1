use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Path, Vec2};
use crate::guidance::{accel_from_angles, GuidanceLaw, GuidanceParams};
use crate::sim::{self, metrics, InitialCondition, Scenario, Thresholds};

use super::jacobian::jacobian_fd;

const NEWTON_TOLERANCE: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// How the steady-turn offsets were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMethod {
    Newton,
    /// Root finding failed; offsets are terminal means of a long simulation.
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleOffset {
    /// 1-based, 1 = lead.
    pub vehicle: usize,
    /// Radius of the circle the vehicle settles on.
    pub radius: f64,
    /// `radius - R`; negative inside the path.
    pub radius_offset: f64,
    /// Range to the predecessor.
    pub gap: f64,
    pub speed: f64,
    pub alpha_t: f64,
    pub alpha_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub law: &'static str,
    pub method: OffsetMethod,
    /// Common angular rate about the path center, rad/s.
    pub angular_rate: f64,
    pub vehicles: Vec<VehicleOffset>,
    pub diagnostics: Vec<String>,
}

/// Converged circle offsets of a regular-law platoon.
pub fn steady_state_regular(n: usize, params: &GuidanceParams, radius: f64) -> Result<SteadyState> {
    steady_turn(n, params, radius, GuidanceLaw::Regular)
}

// Steady-turn residuals for one vehicle behind a predecessor on a circle of
// radius `r_p`, in units where the vehicle's speed is 1. Steady speeds give
// `V_p / V = d*/d`, and the common angular rate is `V_p / r_p`.
fn residual(law: GuidanceLaw, d_star: f64, r_p: f64, x: &[f64]) -> Vec<f64> {
    let (d, at, av) = (x[0], x[1], x[2]);
    let vp = d_star / d;
    let los_rate_d = vp * at.sin() - av.sin();
    vec![
        vp * at.cos() - av.cos(),
        d * vp / r_p - los_rate_d,
        d * accel_from_angles(law, d, at, av, 1.0) - los_rate_d,
    ]
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn newton(law: GuidanceLaw, d_star: f64, r_p: f64, guess: [f64; 3]) -> Option<[f64; 3]> {
    let f = |x: &[f64]| residual(law, d_star, r_p, x);
    let mut x = guess.to_vec();
    let mut fx = f(&x);
    for _ in 0..NEWTON_MAX_ITER {
        let norm = inf_norm(&fx);
        if !norm.is_finite() {
            return None;
        }
        if norm <= NEWTON_TOLERANCE {
            return Some([x[0], x[1], x[2]]);
        }
        let jac: DMatrix<f64> = jacobian_fd(f, &x).ok()?;
        let step = jac.lu().solve(&(-DVector::from_column_slice(&fx)))?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if trial[0] > 0.0 {
                let ft = f(&trial);
                if inf_norm(&ft) < (1.0 - 1e-4 * t) * norm {
                    x = trial;
                    fx = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-8 {
                return None;
            }
        }
    }
    (inf_norm(&fx) <= NEWTON_TOLERANCE).then(|| [x[0], x[1], x[2]])
}

/// Steady circular motion of every vehicle under `law`, solved vehicle by
/// vehicle down the chain. A non-finite `radius` means a straight path.
pub fn steady_turn(
    n: usize,
    params: &GuidanceParams,
    radius: f64,
    law: GuidanceLaw,
) -> Result<SteadyState> {
    if n == 0 {
        return Err(Error::Domain("platoon must contain at least one vehicle".into()));
    }
    params.validate()?;
    if radius.is_infinite() {
        let vehicles = (1..=n)
            .map(|vehicle| VehicleOffset {
                vehicle,
                radius: f64::INFINITY,
                radius_offset: 0.0,
                gap: params.d_star,
                speed: params.v_c,
                alpha_t: 0.0,
                alpha_v: 0.0,
            })
            .collect();
        return Ok(SteadyState {
            law: law.name(),
            method: OffsetMethod::Newton,
            angular_rate: 0.0,
            vehicles,
            diagnostics: Vec::new(),
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("radius must be > 0, got {radius}")));
    }
    params.validate_for_radius(radius)?;

    let ds = params.d_star;
    let mut r_p = radius;
    let mut previous: Option<[f64; 3]> = None;
    let mut solved = Vec::with_capacity(n);
    for _ in 0..n {
        let mut guesses = Vec::new();
        let half = ds / (2.0 * r_p);
        if half < 1.0 {
            guesses.push([ds, half.asin(), -half.asin()]);
        }
        guesses.extend(previous);
        let Some(x) = guesses.into_iter().find_map(|g| newton(law, ds, r_p, g)) else {
            return simulate_offsets(n, params, radius, law);
        };
        let r_f = r_p * x[0] / ds;
        solved.push((r_f, x));
        previous = Some(x);
        r_p = r_f;
    }

    // speeds from the back: V_n = V_c, V_i = V_{i+1} d*/d_{i+1}
    let mut speeds = vec![params.v_c; n];
    for i in (0..n.saturating_sub(1)).rev() {
        speeds[i] = speeds[i + 1] * ds / solved[i + 1].1[0];
    }
    let mut diagnostics = Vec::new();
    if let Some(i) = speeds.iter().position(|v| *v > params.speed_cap()) {
        diagnostics.push(format!(
            "vehicle {} steady speed {:.3} exceeds the command cap {:.3}",
            i + 1,
            speeds[i],
            params.speed_cap()
        ));
    }
    let vehicles = solved
        .iter()
        .zip(&speeds)
        .enumerate()
        .map(|(i, ((r, x), v))| VehicleOffset {
            vehicle: i + 1,
            radius: *r,
            radius_offset: r - radius,
            gap: x[0],
            speed: *v,
            alpha_t: x[1],
            alpha_v: x[2],
        })
        .collect();
    Ok(SteadyState {
        law: law.name(),
        method: OffsetMethod::Newton,
        angular_rate: speeds[n - 1] / solved[n - 1].0,
        vehicles,
        diagnostics,
    })
}

/// Long-horizon simulation estimate used when root finding fails.
fn simulate_offsets(n: usize, params: &GuidanceParams, radius: f64, law: GuidanceLaw) -> Result<SteadyState> {
    let time_scale = params.d_star / params.v_c;
    let scenario = Scenario {
        path: Path::circle(Vec2::ZERO, radius, Direction::Ccw)?,
        n,
        law,
        params: *params,
        initial: InitialCondition::Equilibrium,
        disturbances: Vec::new(),
        dt: time_scale / 300.0,
        t_final: 200.0 * time_scale,
        track_width: None,
        log_decimation: 30,
    };
    let log = sim::run(&scenario)?;
    let m = metrics(&log, &scenario, Thresholds::relative_to(&scenario));
    let last: Vec<_> = (1..=n).filter_map(|id| log.vehicle(id).last()).collect();
    let vehicles = m
        .vehicles
        .iter()
        .zip(&last)
        .map(|(vm, r)| VehicleOffset {
            vehicle: vm.vehicle,
            radius: radius + vm.terminal_mean_path_error,
            radius_offset: vm.terminal_mean_path_error,
            gap: r.d,
            speed: r.speed,
            alpha_t: r.alpha_t,
            alpha_v: r.alpha_v,
        })
        .collect::<Vec<_>>();
    let angular_rate = vehicles.last().map_or(0.0, |v| v.speed / v.radius);
    Ok(SteadyState {
        law: law.name(),
        method: OffsetMethod::Simulation,
        angular_rate,
        vehicles,
        diagnostics: vec!["steady-turn root finding failed; offsets estimated by simulation".into()],
    })
}
