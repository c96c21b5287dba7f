//! Shared inputs for the criterion benchmarks.

use degroot_core::{generate, GeneratorParams, InfluenceMatrix, NetworkKind};

pub fn random_network(n: usize, seed: u64) -> InfluenceMatrix {
    generate(
        NetworkKind::RandomRowStochastic,
        n,
        seed,
        &GeneratorParams::default(),
    )
    .expect("valid generator settings")
}

pub fn spread_opinions(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 * 0.37).sin() * 10.0).collect()
}
