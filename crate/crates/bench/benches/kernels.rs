use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lcl_core::circle::rotation_number;
use lcl_core::conjugacy::{classify_pipeline, detect_elementary_case, hyperbolic_case_conjugacy};
use lcl_core::convergence::collapse_map;
use lcl_core::desitter::de_sitter;
use lcl_core::schottky::limit_set;
use lcl_core::{fixtures, GroupSpec, MoebiusK, MonotoneLift};

fn rotation(c: &mut Criterion) {
    let f = fixtures::hyperbolic_at(0.3, 1).lift();
    let r = MonotoneLift::rotation((5f64.sqrt() - 1.0) / 2.0);
    c.bench_function("rotation_number/moebius_10k", |b| {
        b.iter(|| rotation_number(black_box(&f), 10_000))
    });
    c.bench_function("rotation_number/irrational_10k", |b| {
        b.iter(|| rotation_number(black_box(&r), 10_000))
    });
}

fn gaps(c: &mut Criterion) {
    let data = fixtures::schottky_pair(1);
    c.bench_function("limit_set/depth5", |b| b.iter(|| limit_set(black_box(&data), 5)));
    let sys = limit_set(&data, 6).unwrap();
    c.bench_function("collapse_map/depth6", |b| b.iter(|| collapse_map(black_box(&sys))));
}

fn conjugacy(c: &mut Criterion) {
    let f1 = MoebiusK::fixing_lift([4.0, 0.0, 0.0, 0.25], 2).unwrap();
    let g = GroupSpec::from_moebius(2, &[f1]);
    let case = detect_elementary_case(&g, &MoebiusK::center(2).lift(), 2).unwrap();
    c.bench_function("hyperbolic_conjugacy/grid4096", |b| {
        b.iter(|| hyperbolic_case_conjugacy(&g, &case, (0.05, 0.2), black_box(4096)))
    });

    let data = fixtures::schottky_pair(2);
    let mut g = GroupSpec::from_moebius(2, &data.generators);
    g.pingpong = Some(data);
    let model = de_sitter(2);
    let mut group = c.benchmark_group("classify");
    group.sample_size(10);
    group.bench_function("schottky_double_cover", |b| {
        b.iter(|| classify_pipeline(&model, &g, 1024, 0))
    });
    group.finish();
}

criterion_group!(benches, rotation, gaps, conjugacy);
criterion_main!(benches);
