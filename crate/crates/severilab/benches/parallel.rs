//! Compares the data-parallel entry points against their sequential
//! siblings.  Build with `--no-default-features` to measure the pure
//! sequential library (both sides then coincide).

use criterion::{criterion_group, criterion_main, Criterion};

use severilab::conditions::{condition_matrix, condition_matrix_seq, BaseCondition};
use severilab::construct::build_sigma;
use severilab::exactla::FieldSpec;
use severilab::forms::ProjPoint;
use severilab::verify::{singular_scan, singular_scan_seq};

/// Full-plane search for singular points of a quartic surface over F_101.
fn bench_singular_scan(c: &mut Criterion) {
    let field = FieldSpec::prime(101);
    let sm = build_sigma(field, 4, None, 1, 64).expect("instance over F_101");
    let mut group = c.benchmark_group("singular-scan");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| singular_scan(&sm.surface, 101).expect("scan"))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| singular_scan_seq(&sm.surface, 101).expect("scan"))
    });
    group.finish();
}

/// Row assembly for a heavy plane scheme: three 10-fold points plus a
/// ring of simple points, against degree-30 forms (496 columns).
fn bench_condition_matrix(c: &mut Criterion) {
    let field = FieldSpec::prime(10007);
    let mut scheme = vec![
        BaseCondition::FatPoint { p: ProjPoint::from_i64(field, &[1, 0, 0]), mult: 10 },
        BaseCondition::FatPoint { p: ProjPoint::from_i64(field, &[0, 1, 0]), mult: 10 },
        BaseCondition::FatPoint { p: ProjPoint::from_i64(field, &[0, 0, 1]), mult: 10 },
    ];
    for k in 1..=40 {
        scheme.push(BaseCondition::SimplePoint {
            p: ProjPoint::from_i64(field, &[1, k, k * k + 1]),
        });
    }
    let mut group = c.benchmark_group("condition-matrix");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| condition_matrix(field, 3, 30, &scheme).expect("rows"))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| condition_matrix_seq(field, 3, 30, &scheme).expect("rows"))
    });
    group.finish();
}

criterion_group!(benches, bench_singular_scan, bench_condition_matrix);
criterion_main!(benches);
