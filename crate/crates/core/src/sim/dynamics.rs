use crate::error::{Error, Result};
use crate::geometry::{engagement, wrap, EngagementGeometry, VehicleState};
use crate::guidance::{lateral_accel, speed_commands, virtual_target_speed, wheel_speeds};

use super::scenario::{DisturbanceKind, Scenario};
use super::PlatoonState;

/// Guidance quantities of one platoon state.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Virtual target pose, with its speed `V_t`.
    pub target: VehicleState,
    /// Engagement of each vehicle with its predecessor (the virtual target for the lead).
    pub geometry: Vec<EngagementGeometry>,
    /// Applied lateral acceleration, guidance command plus active lateral disturbances.
    pub accel: Vec<f64>,
    pub speed_cmd: Vec<f64>,
}

/// Time derivative of a [`PlatoonState`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonRates {
    pub target_s: f64,
    /// Per vehicle `(ẋ, ẏ, γ̇, V̇)`.
    pub vehicles: Vec<[f64; 4]>,
}

fn target_pose(state: &PlatoonState, scenario: &Scenario, speed: f64) -> VehicleState {
    let (position, heading) = scenario.path.point(state.target_s);
    VehicleState {
        position,
        heading,
        speed,
    }
}

fn lead_engagement(state: &PlatoonState, scenario: &Scenario) -> Result<EngagementGeometry> {
    let target = target_pose(state, scenario, 0.0);
    engagement(&state.vehicles[0], &target).map_err(|_| {
        Error::DegenerateGeometry("vehicle 1 coincides with the virtual target".into())
    })
}

pub(crate) fn target_speed(state: &PlatoonState, scenario: &Scenario) -> Result<f64> {
    let g = lead_engagement(state, scenario)?;
    Ok(virtual_target_speed(state.vehicles[0].speed, g.d, &scenario.params))
}

pub fn evaluate(state: &PlatoonState, scenario: &Scenario) -> Result<Evaluation> {
    let n = state.vehicles.len();
    let floor = scenario.speed_floor();
    let mut geometry = Vec::with_capacity(n);
    geometry.push(lead_engagement(state, scenario)?);
    for i in 1..n {
        let g = engagement(&state.vehicles[i], &state.vehicles[i - 1]).map_err(|_| {
            Error::DegenerateGeometry(format!("vehicle {} coincides with vehicle {}", i + 1, i))
        })?;
        geometry.push(g);
    }
    let v_t = virtual_target_speed(state.vehicles[0].speed, geometry[0].d, &scenario.params);

    let speeds: Vec<f64> = state.vehicles.iter().map(|v| v.speed).collect();
    let gaps: Vec<f64> = geometry.iter().map(|g| g.d).collect();
    let speed_cmd = speed_commands(&speeds, &gaps, &scenario.params);

    let accel = state
        .vehicles
        .iter()
        .zip(&geometry)
        .enumerate()
        .map(|(i, (v, g))| {
            let mut a = lateral_accel(scenario.law, g, v.speed.max(floor));
            for d in &scenario.disturbances {
                if d.vehicle == i + 1 && d.kind == DisturbanceKind::LateralAccel && d.is_active(state.t) {
                    a += d.magnitude;
                }
            }
            a
        })
        .collect();

    Ok(Evaluation {
        target: target_pose(state, scenario, v_t),
        geometry,
        accel,
        speed_cmd,
    })
}

fn rates_from(state: &PlatoonState, scenario: &Scenario, eval: &Evaluation) -> PlatoonRates {
    let floor = scenario.speed_floor();
    let vehicles = state
        .vehicles
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let speed = v.speed.max(floor);
            let a = eval.accel[i];
            let mut dv = 0.0;
            for d in &scenario.disturbances {
                if d.vehicle == i + 1 && d.kind == DisturbanceKind::Velocity && d.is_active(state.t) {
                    dv += d.magnitude;
                }
            }
            let (forward, yaw_rate) = match scenario.track_width {
                Some(w) => {
                    let ws = wheel_speeds(speed, a, w);
                    (ws.forward_speed(), ws.yaw_rate(w))
                }
                None => (speed, a / speed),
            };
            let forward = forward + dv;
            let (sin_h, cos_h) = v.heading.sin_cos();
            [
                forward * cos_h,
                forward * sin_h,
                yaw_rate,
                scenario.params.k_v * (eval.speed_cmd[i] - v.speed),
            ]
        })
        .collect();
    PlatoonRates {
        target_s: eval.target.speed,
        vehicles,
    }
}

/// Time derivative of the Cartesian platoon state at `state.t`.
pub fn derivatives(state: &PlatoonState, scenario: &Scenario) -> Result<PlatoonRates> {
    let eval = evaluate(state, scenario)?;
    Ok(rates_from(state, scenario, &eval))
}

// Flat layout: [s, x1, y1, γ1, V1, x2, ...].
fn flatten(state: &PlatoonState) -> Vec<f64> {
    let mut y = Vec::with_capacity(1 + 4 * state.vehicles.len());
    y.push(state.target_s);
    for v in &state.vehicles {
        y.extend_from_slice(&[v.position.x, v.position.y, v.heading, v.speed]);
    }
    y
}

fn unflatten(y: &[f64], t: f64) -> PlatoonState {
    PlatoonState {
        t,
        target_s: y[0],
        target_speed: 0.0,
        vehicles: y[1..]
            .chunks_exact(4)
            .map(|c| VehicleState {
                position: crate::geometry::Vec2::new(c[0], c[1]),
                heading: c[2],
                speed: c[3],
            })
            .collect(),
    }
}

fn flat_rates(y: &[f64], t: f64, scenario: &Scenario) -> Result<Vec<f64>> {
    let st = unflatten(y, t);
    let r = derivatives(&st, scenario)?;
    let mut out = Vec::with_capacity(y.len());
    out.push(r.target_s);
    for v in &r.vehicles {
        out.extend_from_slice(v);
    }
    Ok(out)
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical fourth-order Runge-Kutta step of length `dt`.
///
/// Headings are wrapped and speeds floored at `0.01 V_c` afterwards.
pub fn step(state: &PlatoonState, scenario: &Scenario, dt: f64) -> Result<PlatoonState> {
    let t = state.t;
    let y = flatten(state);
    let k1 = flat_rates(&y, t, scenario)?;
    let k2 = flat_rates(&axpy(&y, 0.5 * dt, &k1), t + 0.5 * dt, scenario)?;
    let k3 = flat_rates(&axpy(&y, 0.5 * dt, &k2), t + 0.5 * dt, scenario)?;
    let k4 = flat_rates(&axpy(&y, dt, &k3), t + dt, scenario)?;
    let next: Vec<f64> = (0..y.len())
        .map(|j| y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();

    let t_next = t + dt;
    let mut out = unflatten(&next, t_next);
    if !out.target_s.is_finite() {
        return Err(Error::NonFiniteState {
            t: t_next,
            vehicle: 0,
        });
    }
    let floor = scenario.speed_floor();
    for (i, v) in out.vehicles.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState {
                t: t_next,
                vehicle: i + 1,
            });
        }
        v.heading = wrap(v.heading);
        v.speed = v.speed.max(floor);
    }
    out.target_speed = target_speed(&out, scenario)?;
    Ok(out)
}
