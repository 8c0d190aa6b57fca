use criterion::{black_box, criterion_group, criterion_main, Criterion};

use trifault_bench::{fault_record, fault_window};
use trifault_core::classify::{
    classify, summarize_record, ClassifierConfig, FaultLabel, SeverityModel,
};
use trifault_core::ga3::{Bivector3, Multivector3, Rotor3};
use trifault_core::gac::fit_centered_conic;
use trifault_core::pipeline::{
    analyze_record, analyze_window, reduce_to_plane, window_bivector, WindowConfig,
};

fn bench_ga3(c: &mut Criterion) {
    let a = Multivector3::new([0.3, -1.2, 0.7, 0.1, 0.9, -0.4, 0.2, -0.8]);
    let b = Multivector3::new([-0.5, 0.8, 0.2, -0.9, 0.3, 0.6, -0.1, 0.4]);
    c.bench_function("geometric_product", |bench| {
        bench.iter(|| black_box(a).geometric_product(black_box(&b)))
    });

    let rotor =
        Rotor3::between_bivectors(&Bivector3::SIGMA12, &Bivector3::kirchhoff_unit()).unwrap();
    c.bench_function("sandwich", |bench| {
        bench.iter(|| rotor.sandwich(black_box(&a)))
    });
}

fn bench_fit(c: &mut Criterion) {
    let window = fault_window(FaultLabel::AB, 0.4);
    let bivector = window_bivector(&window);
    let points = reduce_to_plane(&window, &bivector).unwrap();
    c.bench_function("fit_centered_conic_50pts", |bench| {
        bench.iter(|| fit_centered_conic(black_box(&points)).unwrap())
    });
}

fn bench_window(c: &mut Criterion) {
    let cfg = WindowConfig::default();
    let ccfg = ClassifierConfig::default();
    let model = SeverityModel::per_unit();
    let window = fault_window(FaultLabel::BCG, 0.6);
    c.bench_function("analyze_window", |bench| {
        bench.iter(|| analyze_window(black_box(&window), &cfg).unwrap())
    });
    let analysis = analyze_window(&window, &cfg).unwrap();
    c.bench_function("classify_window", |bench| {
        bench.iter(|| classify(black_box(&analysis), &ccfg, &model))
    });
}

fn bench_record(c: &mut Criterion) {
    let cfg = WindowConfig::default();
    let ccfg = ClassifierConfig::default();
    let model = SeverityModel::per_unit();
    let frames = fault_record(FaultLabel::AG, 0.4);
    let mut group = c.benchmark_group("record");
    group.sample_size(20);
    group.bench_function("analyze_record_2800_samples", |bench| {
        bench.iter(|| analyze_record(black_box(&frames), &cfg).unwrap())
    });
    let analyses = analyze_record(&frames, &cfg).unwrap();
    group.bench_function("summarize_record", |bench| {
        bench.iter(|| summarize_record(black_box(&analyses), &ccfg, &model))
    });
    group.finish();
}

criterion_group!(benches, bench_ga3, bench_fit, bench_window, bench_record);
criterion_main!(benches);
