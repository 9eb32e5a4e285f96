//! Shared fixtures for the kernel benchmarks. The package exists for its
//! `benches/` target; run them with `cargo bench -p lrno-bench`.

use lrno_core::instances::{GenParams, Instance};
use lrno_core::rng::Rng;
use lrno_core::{Factor, NoiseFamily, Objective, OperatorKind, SymMatrix};

/// Random dense symmetric matrix from a fixed stream.
pub fn random_sym(n: usize, seed: u64) -> SymMatrix {
    let mut rng = Rng::stream(seed, "bench-sym");
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, rng.normal());
        }
    }
    m
}

/// Random factor with unit-scale Gaussian entries.
pub fn random_factor(n: usize, r: usize, seed: u64) -> Factor {
    let mut rng = Rng::stream(seed, "bench-factor");
    Factor::from_fn(n, r, |_, _| rng.normal())
}

/// The trace-experiment problem size: a sensing objective with a
/// recentered Gaussian ensemble at n = 40, m = 190, r = 5.
pub fn trace_scale_objective() -> Objective {
    let params = GenParams {
        n: 40,
        r: 5,
        m: 190,
        seed: 7,
        sigma: 0.05,
        family: NoiseFamily::Gaussian,
        lambda1: 1.5,
        lambda_r: 1.0,
        operator: OperatorKind::Gaussian,
    };
    Instance::generate(&params)
        .expect("benchmark instance")
        .objective()
        .expect("benchmark objective")
}
