use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dca_core::curvature::{ExtReal, Splitting};
use dca_core::dca::{run_dca, DcaOptions};
use dca_core::regimes::{classify, contour_grid, SampleRange};
use dca_core::shift::{optimize_shift, ShiftSearch};
use dca_core::spca::{build_problem, run_experiment, EntryDistribution};
use dca_core::verify::{run_verify, Suite};
use dca_core::worstcase::{instance_p1, Anchors};

fn classification(c: &mut Criterion) {
    let s = Splitting::finite(1.5, 2.0, 1.0, 2.5).unwrap();
    c.bench_function("classify", |b| b.iter(|| classify(black_box(&s)).unwrap()));

    let t = Splitting::lenient(1.0, ExtReal::finite(2.0), -1.5, ExtReal::finite(1.5)).unwrap();
    c.bench_function("optimize_shift", |b| {
        b.iter(|| optimize_shift(black_box(&t), &ShiftSearch::default()).unwrap())
    });

    c.bench_function("contour_101x101", |b| {
        b.iter(|| {
            contour_grid(
                1.0,
                ExtReal::finite(2.0),
                SampleRange::new(-1.0, 2.0, 101),
                SampleRange::new(0.0, 4.0, 101),
            )
            .unwrap()
        })
    });
}

fn worst_case(c: &mut Criterion) {
    let mut g = c.benchmark_group("worst_case_p1");
    for n in [10usize, 100, 1000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let inst = instance_p1(0.5, 4.0, 0.3, 2.0, 1.0, n, Anchors::default()).unwrap();
                run_dca(&inst.as_oracles(), &[0.0], &DcaOptions::steps(n)).unwrap()
            })
        });
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    c.bench_function("verify_all_1000", |b| b.iter(|| run_verify(Suite::All, 1000, 1).unwrap()));
}

fn spca(c: &mut Criterion) {
    let problem = build_problem(30, 0.1, 0.02, 0.5, 0, EntryDistribution::Gaussian).unwrap();
    let mut g = c.benchmark_group("spca");
    g.sample_size(10);
    g.bench_function("n30_starts10", |b| {
        b.iter(|| run_experiment(&problem, &[0.0, 0.3], 10, &[1e-6], 5000, 0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, classification, worst_case, verification, spca);
criterion_main!(benches);
