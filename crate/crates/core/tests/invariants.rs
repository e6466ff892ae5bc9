mod common;

use std::collections::BTreeMap;

use hypercut::circuit::{emit_qasm, generate, parse_qasm, GeneratorKind, GeneratorOptions};
use hypercut::cutter::extract_subcircuits;
use hypercut::executor::{execute_all, Decision, DecisionReason, ExecConfig, ExecMode};
use hypercut::hypergraph::build_hypergraph;
use hypercut::partitioner::{
    count_cut_points, gate_violations, reallocate_assignment, repair_gate_colocation, sweep_k, PartitionAssignment,
};
use hypercut::reconstructor::{assemble_bitstring, reconstruct_raw};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop_oneof![
        Just(GeneratorKind::Bv),
        Just(GeneratorKind::Ghz),
        Just(GeneratorKind::Qft),
        Just(GeneratorKind::Random),
    ]
}

fn opts(kind: GeneratorKind, depth: usize, seed: u64) -> GeneratorOptions {
    match kind {
        GeneratorKind::Random => GeneratorOptions { depth: Some(depth), seed: Some(seed), ..Default::default() },
        _ => GeneratorOptions::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qasm_round_trip(kind in kind(), n in 1usize..=32, depth in 1usize..=6, seed in 0u64..10_000) {
        let c = generate(kind, n, &opts(kind, depth, seed)).unwrap();
        let back = parse_qasm(&emit_qasm(&c)).unwrap();
        prop_assert!(back.same_structure(&c));
        prop_assert_eq!(emit_qasm(&back), emit_qasm(&c));
    }

    #[test]
    fn repair_and_reallocation(n in 2usize..=12, depth in 1usize..=6, seed in 0u64..10_000, k in 2usize..=5, salt in any::<u64>()) {
        let c = generate(GeneratorKind::Random, n, &opts(GeneratorKind::Random, depth, seed)).unwrap();
        let hg = build_hypergraph(&c).unwrap();
        let parts = (0..hg.num_nodes()).map(|v| (salt.rotate_left(v as u32 % 64) as usize ^ v) % k).collect();
        let raw = PartitionAssignment::new(parts, k).unwrap();
        let fixed = repair_gate_colocation(&hg, &raw);
        prop_assert_eq!(gate_violations(&hg, &fixed), 0);
        let moved = reallocate_assignment(&c, &hg, &fixed);
        prop_assert_eq!(gate_violations(&hg, &moved), 0);
        prop_assert!(count_cut_points(&hg, &moved).unwrap() <= count_cut_points(&hg, &fixed).unwrap());
        // idempotent
        let again = reallocate_assignment(&c, &hg, &moved);
        prop_assert_eq!(again.parts(), moved.parts());
    }

    #[test]
    fn sweep_result_is_consistent(kind in kind(), n in 1usize..=10, depth in 1usize..=4, seed in 0u64..1000) {
        let c = generate(kind, n, &opts(kind, depth, seed)).unwrap();
        let hg = build_hypergraph(&c).unwrap();
        let cand = sweep_k(&c, 8, seed).unwrap();
        prop_assert_eq!(gate_violations(&hg, &cand.assignment), 0);
        prop_assert_eq!(count_cut_points(&hg, &cand.assignment).unwrap(), cand.cut_points);
        prop_assert!(cand.assignment.all_nonempty());
        let set = extract_subcircuits(&c, &hg, &cand.assignment).unwrap();
        prop_assert_eq!(set.cuts().len(), cand.cut_points);
        prop_assert_eq!(set.max_width(), cand.max_width);
    }

    /// Scaling one subcircuit's variant distributions scales the raw
    /// reconstruction by the same factor.
    #[test]
    fn reconstruction_is_linear(seed in 0u64..500, factor in 0.1f64..4.0) {
        let c = common::random(4, 3, seed);
        let hg = build_hypergraph(&c).unwrap();
        let set = extract_subcircuits(&c, &hg, &common::time_split(&hg, 2)).unwrap();
        prop_assume!(set.subcircuits.len() == 2);
        let decisions = vec![Decision { mode: ExecMode::Classical, reason: DecisionReason::WithinBudget }; 2];
        let results = execute_all(&set, &decisions, &ExecConfig::default()).unwrap();
        let base = reconstruct_raw(&set, &results).unwrap();
        let mut scaled = results.clone();
        for r in scaled.iter_mut().filter(|r| r.subcircuit == 0) {
            r.dist = r.dist.scaled(factor);
        }
        let got = reconstruct_raw(&set, &scaled).unwrap();
        for (x, p) in &base {
            prop_assert!((got.get(x).copied().unwrap_or(0.0) - factor * p).abs() < 1e-12);
        }
    }

    #[test]
    fn assembly_ignores_part_order(n in 1usize..=16, salt in any::<u64>(), chunks in 1usize..=4) {
        let mut qubits: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the salt
        for i in (1..n).rev() {
            qubits.swap(i, (salt.rotate_left(i as u32) as usize) % (i + 1));
        }
        let groups: Vec<Vec<usize>> = qubits.chunks(n.div_ceil(chunks)).map(<[usize]>::to_vec).collect();
        let parts: Vec<(&[usize], u64)> = groups.iter().enumerate().map(|(i, g)| (g.as_slice(), salt >> (i * 7))).collect();
        let forward = assemble_bitstring(n, &[], &parts).unwrap();
        let mut reversed = parts.clone();
        reversed.reverse();
        prop_assert_eq!(assemble_bitstring(n, &[], &reversed).unwrap(), forward);
        let mut expect = BTreeMap::new();
        for (g, bits) in &parts {
            for (j, &q) in g.iter().enumerate() {
                expect.insert(q, (bits >> j) & 1);
            }
        }
        for (q, b) in expect {
            prop_assert_eq!((forward >> q) & 1, b);
        }
    }
}
