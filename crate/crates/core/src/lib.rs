//! Dynamic partitioning and hybrid classical/quantum execution of quantum
//! circuits.
//!
//! A circuit is turned into a temporal hypergraph, partitioned into
//! subcircuits joined by wire cuts, each subcircuit is flagged for exact
//! classical simulation or sampled quantum execution, and the full output
//! distribution is rebuilt from the per-variant results.

pub mod circuit;
pub mod cutter;
pub mod executor;
pub mod hypergraph;
pub mod metrics;
pub mod partitioner;
pub mod pipeline;
pub mod reconstructor;

pub use circuit::{
    classify_gate, emit_qasm, generate, parse_qasm, schedule_asap, Circuit, CircuitError, Gate, GateClass, GateKind,
    GeneratorKind, GeneratorOptions, QasmError,
};
pub use cutter::{
    extract_subcircuits, Basis, CutEnd, CutError, CutPoint, Prep, Subcircuit, SubcircuitSet, VariantLabel, Wire,
};
pub use executor::{
    decide, memory_requirement, run_classical, run_quantum_sim, Decision, Distribution, ExecMode, ResourceBudget,
    VariantResult,
};
pub use hypergraph::{build_hypergraph, clique_expand, TemporalHypergraph, TemporalNode, WeightedGraph};
pub use partitioner::{
    count_cut_points, gate_violations, reallocate_shared_qubits, repair_gate_colocation, sampling_overhead, sweep_k,
    sweep_k_with, PartitionAssignment, PartitionCandidate, PartitionError, SweepOutcome, SweepParams,
};

pub use metrics::{build_report, noise_score, NoiseParams, RunReport};
pub use pipeline::{RunConfig, RunDocument};
pub use reconstructor::{assemble_bitstring, reconstruct, reconstruct_naive};

/// Combines seed material into one 64-bit seed (splitmix64 finalizer per word).
pub fn mix_seed(words: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}
