use asymptorus::{
    asymptotic_family, branch_slope, clifford_jet, integrate_line, perturbed_jet, poincare1,
    second_form, second_form_closed, second_variation, Branch, ChartPoint, IntegratorOptions,
    SinSqDiagonal, VariationSettings,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::f64::consts::TAU;
use std::hint::black_box;

fn bench_jets(c: &mut Criterion) {
    let h = SinSqDiagonal;
    let q = ChartPoint::new(1.3, 0.4);
    c.bench_function("clifford_jet", |b| b.iter(|| clifford_jet(black_box(q))));
    c.bench_function("perturbed_jet", |b| {
        b.iter(|| perturbed_jet(black_box(q), black_box(0.05), &h).unwrap())
    });
}

fn bench_coefficients(c: &mut Criterion) {
    let h = SinSqDiagonal;
    let q = ChartPoint::new(1.3, 0.4);
    c.bench_function("second_form_closed", |b| {
        b.iter(|| second_form_closed(black_box(q), black_box(0.05), &h))
    });
    c.bench_function("second_form_jet", |b| {
        b.iter(|| second_form(&perturbed_jet(black_box(q), black_box(0.05), &h).unwrap()).unwrap())
    });
    c.bench_function("branch_slope", |b| {
        b.iter(|| {
            branch_slope(
                black_box(0.4),
                black_box(0.6),
                black_box(0.4),
                Branch::First,
            )
        })
    });
}

fn bench_flow(c: &mut Criterion) {
    let h = SinSqDiagonal;
    let opts = IntegratorOptions::default();
    c.bench_function("integrate_line_period", |b| {
        b.iter(|| {
            integrate_line(
                ChartPoint::new(0.0, black_box(0.3)),
                Branch::First,
                0.02,
                &h,
                TAU,
                &opts,
            )
            .unwrap()
        })
    });
    c.bench_function("poincare1", |b| {
        b.iter(|| poincare1(black_box(0.3), 0.02, &h, &opts).unwrap())
    });
}

fn bench_variation(c: &mut Criterion) {
    let field = SinSqDiagonal;
    let settings = VariationSettings::default();
    c.bench_function("second_variation_period", |b| {
        b.iter(|| {
            let fam = asymptotic_family(&field);
            second_variation(&fam, black_box(0.3), TAU, &settings).unwrap()
        })
    });
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_jets, bench_coefficients, bench_flow, bench_variation
);
criterion_main!(benches);
