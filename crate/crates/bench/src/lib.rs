//! Shared fixtures for the criterion benchmarks.

use gfi_core::measure::{BallMeasure, SmoothedMeasure};
use gfi_core::transport::DiscreteDistribution;

/// Five-atom 2D measure used across benchmarks.
pub fn bench_measure() -> SmoothedMeasure {
    let atoms = vec![
        vec![0.9, 0.0],
        vec![-0.4, 0.7],
        vec![-0.6, -0.5],
        vec![0.2, -0.8],
        vec![0.0, 0.3],
    ];
    let base = BallMeasure::uniform(atoms).unwrap();
    SmoothedMeasure::new(base, 0.6).unwrap()
}

/// Uniform random point clouds for transport benchmarks.
pub fn bench_distributions(n: usize, seed: u64) -> (DiscreteDistribution, DiscreteDistribution) {
    use rand::Rng as _;
    let mut rng = gfi_core::rng::seeded(seed);
    let mut mk = |n: usize| {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        DiscreteDistribution::new(pts, vec![1.0 / n as f64; n]).unwrap()
    };
    (mk(n), mk(n))
}
