use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use platoon_core::sim::{self, Scenario};
use platoon_core::stability::{
    eigenvalues, equilibrium_state, linearize, relative_jacobian, steady_state_regular, ControlInput,
};
use platoon_core::{GuidanceLaw, GuidanceParams};

fn highway_params() -> GuidanceParams {
    GuidanceParams::new(75.0, 0.5, 25.0).unwrap()
}

fn simulation(c: &mut Criterion) {
    let scenario = Scenario::highway(GuidanceLaw::Sine);
    let state = scenario.initial_state().unwrap();
    c.bench_function("rk4_step_n4", |b| {
        b.iter(|| sim::step(black_box(&state), &scenario, scenario.dt).unwrap())
    });

    let mut short = Scenario::highway(GuidanceLaw::Regular);
    short.t_final = 10.0;
    c.bench_function("run_highway_10s", |b| b.iter(|| sim::run(black_box(&short)).unwrap()));
}

fn stability(c: &mut Criterion) {
    let params = highway_params();
    let u = ControlInput::circle(50.0, params.v_c).unwrap();
    let x0 = equilibrium_state(4, &params, 1.0 / 50.0).unwrap();
    let a = relative_jacobian(&x0, &u, GuidanceLaw::Sine, &params).unwrap();

    c.bench_function("jacobian_fd_n4", |b| {
        b.iter(|| relative_jacobian(black_box(&x0), &u, GuidanceLaw::Sine, &params).unwrap())
    });
    c.bench_function("eigenvalues_16x16", |b| {
        b.iter_batched(|| a.clone(), |m| eigenvalues(&m).unwrap(), BatchSize::SmallInput)
    });
    c.bench_function("linearize_n4", |b| {
        b.iter(|| linearize(black_box(4), &params, 50.0).unwrap())
    });
    c.bench_function("steady_state_regular_n4", |b| {
        b.iter(|| steady_state_regular(black_box(4), &params, 50.0).unwrap())
    });
}

criterion_group!(benches, simulation, stability);
criterion_main!(benches);
