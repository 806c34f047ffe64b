use std::hint::black_box;

use bphz::coincidence::plan_coincidence;
use bphz::config::{random_configurations, BoundingBox};
use bphz::fixtures;
use bphz::forest::{enumerate_forests_with, Connectivity};
use bphz::power_counting::{Degrees, SubtractionAssignment};
use bphz::subtraction::r_operation_with;
use bphz::zimmermann::ZiPlan;
use criterion::{criterion_group, criterion_main, Criterion};

fn forests(c: &mut Criterion) {
    let plan = plan_coincidence(&fixtures::join2(), &SubtractionAssignment::default()).unwrap();
    let mut group = c.benchmark_group("enumerate_forests");
    for (name, g) in fixtures::all_named() {
        let d = Degrees::minimal(&g);
        group.bench_function(name, |b| {
            b.iter(|| enumerate_forests_with(black_box(&g), &d, Connectivity::Connected))
        });
    }
    group.bench_function("join2_delta", |b| {
        b.iter(|| {
            enumerate_forests_with(
                black_box(&plan.delta),
                &plan.delta_degrees,
                Connectivity::Connected,
            )
        })
    });
    group.finish();
}

fn r_operation(c: &mut Criterion) {
    let mut group = c.benchmark_group("r_operation");
    for (name, g) in [
        ("nest", fixtures::nest()),
        ("join2", fixtures::join2()),
        ("raise_delta", fixtures::raise_delta()),
    ] {
        let d = Degrees::minimal(&g);
        let config = random_configurations(&g, 7, 1, &BoundingBox::default())
            .unwrap()
            .remove(0);
        group.bench_function(name, |b| {
            b.iter(|| r_operation_with(black_box(&g), &d, &config).unwrap())
        });
    }
    group.finish();
}

fn zimmermann(c: &mut Criterion) {
    let g = fixtures::nest();
    let d2 = Degrees::minimal(&g);
    let mut d1 = d2.clone();
    d1.vertex[0] += 2;
    let plan = ZiPlan::new(&g, d1, d2);
    let config = random_configurations(&g, 7, 1, &BoundingBox::default())
        .unwrap()
        .remove(0);
    c.bench_function("zi_rhs_nest", |b| {
        b.iter(|| plan.rhs(black_box(&config)).unwrap())
    });
}

criterion_group!(benches, forests, r_operation, zimmermann);
criterion_main!(benches);
