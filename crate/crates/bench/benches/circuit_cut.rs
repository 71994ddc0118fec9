use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qlink_core::{cut_costs, default_steane_encoder, inmotion_dqec_cost, steane_713_target};
use qlink_core::{validate_encoder, CostMethod, SyndromeSchedule};

fn bench_circuit_cut(c: &mut Criterion) {
    let circuit = default_steane_encoder();
    let target = steane_713_target();
    c.bench_function("cut costs steane", |b| {
        b.iter(|| cut_costs(black_box(&circuit)))
    });
    c.bench_function("in-motion dqec teledata", |b| {
        b.iter(|| {
            inmotion_dqec_cost(
                black_box(&circuit),
                CostMethod::Teledata,
                SyndromeSchedule::default(),
            )
            .unwrap()
        })
    });
    c.bench_function("validate encoder", |b| {
        b.iter(|| validate_encoder(black_box(&circuit), &target).unwrap())
    });
}

criterion_group!(benches, bench_circuit_cut);
criterion_main!(benches);
