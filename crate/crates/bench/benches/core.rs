use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use su11_core::{
    analytic_state, build_rho, enumerate_bipartitions, fock_vacuum, scan_lmu,
    symplectic_eigenvalues, Axis, FamilyTag, Grid, InterferometerParams, ScanSpec, TwoModeGate,
};

fn params() -> InterferometerParams {
    InterferometerParams::new(0.8, 0.6, 0.3, 0.2).unwrap()
}

fn construction(c: &mut Criterion) {
    let p = params();
    let mut group = c.benchmark_group("build_rho");
    for m in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| build_rho(black_box(m), &p))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("analytic_state");
    for tag in FamilyTag::ALL {
        group.bench_function(tag.name(), |b| {
            b.iter(|| analytic_state(tag, black_box(12), &p))
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let sigma = analytic_state(FamilyTag::Su11Sub, 6, &params())
        .unwrap()
        .to_quadrature()
        .unwrap();
    c.bench_function("symplectic_eigenvalues/6 modes", |b| {
        b.iter(|| symplectic_eigenvalues(black_box(&sigma)))
    });
}

fn ppt_scan(c: &mut Criterion) {
    let bips = enumerate_bipartitions(6, false).unwrap();
    let spec = ScanSpec::family(FamilyTag::Su11Sub, 6, 0.0, 0.0);
    let grid = Grid::square(Axis::new(0.7, 0.7, 1).unwrap());
    c.bench_function("scan_lmu/301 bipartitions, one point", |b| {
        b.iter(|| scan_lmu(&spec, black_box(&bips), &grid))
    });
}

fn fock(c: &mut Criterion) {
    let mut group = c.benchmark_group("fock");
    group.sample_size(20);
    group.bench_function("tmsq gate build, cutoff 12", |b| {
        b.iter(|| TwoModeGate::tmsq(black_box(12), 0.3, 0.5))
    });
    let gate = TwoModeGate::tmsq(12, 0.3, 0.5).unwrap();
    let vacuum = fock_vacuum(4, 12).unwrap();
    group.bench_function("tmsq gate apply, 4 modes", |b| {
        b.iter(|| gate.apply(black_box(&vacuum), 2, 3))
    });
    group.finish();
}

criterion_group!(benches, construction, spectra, ppt_scan, fock);
criterion_main!(benches);
