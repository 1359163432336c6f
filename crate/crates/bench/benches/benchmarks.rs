use criterion::{black_box, criterion_group, criterion_main, Criterion};

use gfi_bench::{bench_distributions, bench_measure};
use gfi_core::grid::GridDomain;
use gfi_core::spectral;
use gfi_core::transport::{cost_chain_checks, ot_entropic, ot_exact, CostKind, CostSpec};

fn density_and_hessian(c: &mut Criterion) {
    let sm = bench_measure();
    c.bench_function("density_2d_5atoms", |b| {
        b.iter(|| sm.density(black_box(&[0.3, -0.2])).unwrap())
    });
    c.bench_function("hessian_2d_5atoms", |b| {
        b.iter(|| sm.hessian_potential(black_box(&[0.3, -0.2])).unwrap())
    });
}

fn bound_catalog(c: &mut Criterion) {
    c.bench_function("best_bound", |b| {
        b.iter(|| {
            gfi_core::bounds::best_bound(
                black_box(0.7),
                black_box(1.1),
                black_box(4),
                Some(7),
                false,
            )
            .unwrap()
        })
    });
}

fn poincare_eigensolve(c: &mut Criterion) {
    let sm = bench_measure();
    let sm1 = {
        let base =
            gfi_core::measure::BallMeasure::uniform(vec![vec![-0.8], vec![0.8]]).unwrap();
        gfi_core::measure::SmoothedMeasure::new(base, 0.5).unwrap()
    };
    let grid1 = GridDomain::new(1, 0.8 + 6.0 * 0.5, 2001).unwrap();
    c.bench_function("poincare_1d_n2001", |b| {
        b.iter(|| spectral::estimate_poincare(black_box(&sm1), &grid1).unwrap())
    });
    let grid2 = GridDomain::new(2, sm.radius() + 6.0 * sm.delta(), 61).unwrap();
    c.bench_function("poincare_2d_n61", |b| {
        b.iter(|| spectral::estimate_poincare(black_box(&sm), &grid2).unwrap())
    });
}

fn transport_solvers(c: &mut Criterion) {
    let (src, tgt) = bench_distributions(100, 9);
    let spec = CostSpec::new(CostKind::Quadratic);
    c.bench_function("ot_exact_100x100", |b| {
        b.iter(|| ot_exact(black_box(&src), &tgt, &spec).unwrap())
    });
    c.bench_function("ot_entropic_100x100", |b| {
        b.iter(|| ot_entropic(black_box(&src), &tgt, &spec, 0.1, 5000).unwrap())
    });
}

fn chain_throughput(c: &mut Criterion) {
    c.bench_function("cost_chain_10k_d3", |b| {
        b.iter(|| cost_chain_checks(black_box(10_000), 3, 1).unwrap())
    });
}

criterion_group!(
    benches,
    density_and_hessian,
    bound_catalog,
    poincare_eigensolve,
    transport_solvers,
    chain_throughput
);
criterion_main!(benches);
