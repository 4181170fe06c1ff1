use std::f64::consts::FRAC_PI_2;

use platoon_core::geometry::{Direction, Path, Vec2, VehicleState};
use platoon_core::guidance::GuidanceLaw;
use platoon_core::sim::{self, metrics, step, Disturbance, DisturbanceKind, InitialCondition, Scenario, Thresholds};
use platoon_core::stability::{relative_state, rhs_relative, ControlInput};

fn short(mut s: Scenario, t_final: f64) -> Scenario {
    s.t_final = t_final;
    s
}

fn mirror(s: &Scenario) -> Scenario {
    let mut m = s.clone();
    m.path = Path::circle(Vec2::ZERO, s.path.radius().unwrap(), Direction::Cw)
        .unwrap()
        .with_start_angle(FRAC_PI_2);
    m.initial = match &s.initial {
        InitialCondition::Offset { dr, dgamma } => InitialCondition::Offset {
            dr: *dr,
            dgamma: -dgamma,
        },
        other => other.clone(),
    };
    for d in &mut m.disturbances {
        if d.kind == DisturbanceKind::LateralAccel {
            d.magnitude = -d.magnitude;
        }
    }
    m
}

#[test]
fn mirrored_scenario_gives_mirrored_log() {
    let mut s = short(Scenario::highway(GuidanceLaw::Sine), 20.0);
    s.disturbances.push(Disturbance {
        vehicle: 2,
        kind: DisturbanceKind::LateralAccel,
        magnitude: 10.0,
        t_start: 5.0,
        duration: 1.0,
    });
    let a = sim::run(&s).unwrap();
    let b = sim::run(&mirror(&s)).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (p, q) in a.records.iter().zip(&b.records) {
        assert_eq!(p.t, q.t);
        assert_eq!(p.x, q.x);
        assert_eq!(p.y, -q.y);
        assert_eq!(p.gamma, -q.gamma);
        assert_eq!(p.speed, q.speed);
        assert_eq!(p.d, q.d);
        assert_eq!(p.alpha_t, -q.alpha_t);
        assert_eq!(p.alpha_v, -q.alpha_v);
        assert_eq!(p.a_cmd, -q.a_cmd);
        assert_eq!(p.v_cmd, q.v_cmd);
        assert_eq!(p.path_err, q.path_err);
    }
}

#[test]
fn identical_scenarios_are_bit_identical() {
    let s = short(Scenario::highway(GuidanceLaw::Regular), 15.0);
    assert_eq!(sim::run(&s).unwrap().to_csv_string(), sim::run(&s).unwrap().to_csv_string());
}

#[test]
fn equilibrium_start_holds_the_path() {
    let mut s = Scenario::highway(GuidanceLaw::Sine);
    s.initial = InitialCondition::Equilibrium;
    let st0 = s.initial_state().unwrap();
    let st1 = step(&st0, &s, s.dt).unwrap();
    for v in &st1.vehicles {
        assert!(s.path.error(v.position).abs() <= 1e-9);
    }

    s.t_final = 50.0;
    let log = sim::run(&s).unwrap();
    let m = metrics(&log, &s, Thresholds::default());
    for v in &m.vehicles {
        assert!(v.terminal_mean_abs_path_error <= 1e-6, "{v:?}");
    }
}

#[test]
fn stalled_vehicle_is_floored_not_nan() {
    let mut s = short(Scenario::highway(GuidanceLaw::Sine), 2.0);
    s.n = 2;
    let eq = {
        let mut e = s.clone();
        e.initial = InitialCondition::Equilibrium;
        e.initial_state().unwrap().vehicles
    };
    // the follower sits far behind at rest, so the lead is commanded almost nothing
    let stalled = VehicleState::new(eq[1].position * 3.0, eq[1].heading, 0.0);
    s.initial = InitialCondition::Explicit(vec![VehicleState { speed: 0.0, ..eq[0] }, stalled]);
    let (log, end) = sim::run_with_state(&s).unwrap();
    assert!(log.records.iter().all(|r| [r.x, r.y, r.gamma, r.speed, r.a_cmd].iter().all(|v| v.is_finite())));
    assert!(end.vehicles.iter().all(|v| v.speed >= s.speed_floor()));
}

#[test]
fn coincident_vehicles_are_named() {
    let mut s = short(Scenario::highway(GuidanceLaw::Sine), 1.0);
    s.n = 3;
    let p = VehicleState::new(Vec2::new(0.0, -50.0), 0.0, 25.0);
    let q = VehicleState::new(Vec2::new(-40.0, -30.0), 0.0, 25.0);
    s.initial = InitialCondition::Explicit(vec![p, q, q]);
    let msg = sim::run(&s).unwrap_err().to_string();
    assert!(msg.contains("vehicle 3") && msg.contains("vehicle 2"), "{msg}");
}

// One RK4 step of the Cartesian model moves the relative coordinates by
// dt * rhs + O(dt²); halving dt must shrink the defect about fourfold.
#[test]
fn cartesian_and_relative_models_agree() {
    for (law, track_width) in [(GuidanceLaw::Sine, None), (GuidanceLaw::Regular, None), (GuidanceLaw::Sine, Some(2.0))] {
        let mut s = Scenario::highway(law);
        s.track_width = track_width;
        let x0 = s.initial_state().unwrap();
        let u = ControlInput::circle(50.0, 25.0).unwrap();
        let r0 = relative_state(&x0, &s.path).unwrap();
        let f = rhs_relative(&r0, &u, law, &s.params);
        let defect = |dt: f64| {
            let x1 = step(&x0, &s, dt).unwrap();
            let r1 = relative_state(&x1, &s.path).unwrap();
            r1.as_slice()
                .iter()
                .zip(r0.as_slice())
                .zip(&f)
                .map(|((a, b), g)| (a - b - dt * g).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (defect(0.02), defect(0.01));
        assert!(e1 < 1e-2, "{law:?}: defect {e1}");
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{law:?}: ratio {ratio}");
    }
}

#[test]
fn robot_preset_converges_with_relative_thresholds() {
    let s = Scenario::robot(GuidanceLaw::Sine);
    let log = sim::run(&s).unwrap();
    let m = metrics(&log, &s, Thresholds::relative_to(&s));
    assert!(m.all_settled(), "{:#?}", m.vehicles);
}

#[test]
fn velocity_disturbance_leaves_speed_state_alone() {
    let mut s = short(Scenario::highway(GuidanceLaw::Sine), 3.0);
    s.initial = InitialCondition::Equilibrium;
    s.disturbances.push(Disturbance {
        vehicle: 4,
        kind: DisturbanceKind::Velocity,
        magnitude: 5.0,
        t_start: 1.0,
        duration: 1.0,
    });
    let log = sim::run(&s).unwrap();
    // the speed state only reacts through the gap it changes, never by +5 m/s
    let max_speed = log.vehicle(4).map(|r| r.speed).fold(0.0, f64::max);
    assert!(max_speed < 25.5, "{max_speed}");
    let gap_err = log.vehicle(4).map(|r| r.gap_err.abs()).fold(0.0, f64::max);
    assert!(gap_err > 1.0);
}
