use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pmsm_bench::{cutoff, ions, msm, parareal_config, parareal_system};
use pmsm_core::cost::{simulate_schedule, Plan, ScheduleParams};
use pmsm_core::parareal::{parareal_run, SequentialExecutor};
use pmsm_core::{direct_coulomb, ForceField, UnitsConfig, VerletState};

fn force_fields(c: &mut Criterion) {
    let u = UnitsConfig::physical();
    let mut g = c.benchmark_group("force_field");
    g.sample_size(20);
    for n in [250usize, 500, 1000] {
        let s = ions(n, 42);
        g.bench_with_input(BenchmarkId::new("direct", n), &s, |b, s| b.iter(|| direct_coulomb(black_box(s), &u)));
        let m = msm(8.0);
        g.bench_with_input(BenchmarkId::new("msm_a8", n), &s, |b, s| b.iter(|| m.evaluate(black_box(s), &u)));
        let sc = cutoff(8.0);
        g.bench_with_input(BenchmarkId::new("cutoff_8", n), &s, |b, s| b.iter(|| sc.evaluate(black_box(s), &u)));
    }
    g.finish();
}

fn verlet(c: &mut Criterion) {
    let u = UnitsConfig::physical();
    let m = msm(8.0);
    let state = VerletState::new(ions(500, 7), &m, &u).unwrap();
    c.bench_function("verlet_step_msm_500", |b| {
        b.iter_batched(
            || state.clone(),
            |mut st| st.step(&m, 0.5, &u).map(|_| st),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn parareal(c: &mut Criterion) {
    let u = UnitsConfig::reduced();
    let cfg = parareal_config(8);
    let s = parareal_system();
    let mut g = c.benchmark_group("parareal");
    g.sample_size(10);
    g.bench_function("two_windows_of_8", |b| b.iter(|| parareal_run(&s, 16, &cfg, &u, &SequentialExecutor)));
    g.finish();
}

fn schedule(c: &mut Criterion) {
    let p = ScheduleParams { t_total: 906, t_w: 906, k: 3, q_ratio: 453 };
    c.bench_function("schedule_plan2_q453_t906_k3", |b| b.iter(|| simulate_schedule(Plan::Two, black_box(&p))));
}

criterion_group!(benches, force_fields, verlet, parareal, schedule);
criterion_main!(benches);
