//! Benchmark workloads shared by the criterion targets.

use hypercut::{generate, Circuit, GeneratorKind, GeneratorOptions};

/// The benchmark families at a given size; random circuits use depth 10, seed 1.
pub fn workloads(n: usize) -> Vec<Circuit> {
    let random = GeneratorOptions { depth: Some(10), seed: Some(1), ..Default::default() };
    [
        (GeneratorKind::Bv, GeneratorOptions::default()),
        (GeneratorKind::Ghz, GeneratorOptions::default()),
        (GeneratorKind::Qft, GeneratorOptions::default()),
        (GeneratorKind::Random, random),
    ]
    .into_iter()
    .map(|(kind, opts)| generate(kind, n, &opts).expect("valid generator options"))
    .collect()
}
