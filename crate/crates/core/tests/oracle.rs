mod common;

use common::{bell, ghz, oracle_distribution, oracle_state, qft, random};
use hypercut::circuit::{Circuit, GateKind};
use hypercut::cutter::extract_subcircuits;
use hypercut::executor::{
    execute_all, run_classical, run_quantum_sim, Decision, DecisionReason, ExecConfig, ExecMode, ResourceBudget,
};
use hypercut::hypergraph::build_hypergraph;
use hypercut::partitioner::{repair_gate_colocation, PartitionAssignment};
use hypercut::pipeline::{run, RunConfig};
use hypercut::reconstructor::{reconstruct, reconstruct_naive, EXACT_TOLERANCE};
use proptest::prelude::*;

#[test]
fn oracle_self_check() {
    let b = oracle_distribution(&bell());
    assert!((b.get(0) - 0.5).abs() < 1e-15 && (b.get(3) - 0.5).abs() < 1e-15);
    let g = oracle_distribution(&ghz(5));
    assert!((g.get(0) - 0.5).abs() < 1e-15 && (g.get(31) - 0.5).abs() < 1e-15);
    // QFT of |0> is the uniform superposition
    for a in oracle_state(&qft(4)) {
        assert!((a.re - 0.25).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
}

#[test]
fn statevector_matches_oracle_on_every_gate() {
    let two = [GateKind::Cx, GateKind::Cz, GateKind::Cp, GateKind::Swap];
    let one = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rz,
        GateKind::Rx,
        GateKind::Ry,
    ];
    let mut c = Circuit::new("mix", 3);
    // a non-trivial start state so every gate acts on amplitude and phase
    for q in 0..3 {
        c.apply(GateKind::Ry, &[q], &[0.3 + q as f64]).unwrap();
        c.apply(GateKind::T, &[q], &[]).unwrap();
    }
    for (i, k) in one.iter().enumerate() {
        let params: Vec<f64> = (0..k.num_params()).map(|_| 0.7).collect();
        c.apply(*k, &[i % 3], &params).unwrap();
    }
    for (i, k) in two.iter().enumerate() {
        let params: Vec<f64> = (0..k.num_params()).map(|_| 1.1).collect();
        c.apply(*k, &[i % 3, (i + 1) % 3], &params).unwrap();
    }
    c.apply(GateKind::Ccx, &[2, 0, 1], &[]).unwrap();
    let got = run_classical(&c, &ResourceBudget::default()).unwrap();
    assert!(got.tvd(&oracle_distribution(&c)) < 1e-12);
}

#[test]
fn random_circuit_classical_output_matches_oracle() {
    let c = random(5, 8, 3);
    let got = run_classical(&c, &ResourceBudget::default()).unwrap();
    assert!(got.tvd(&oracle_distribution(&c)) < 1e-9);
}

#[test]
fn pipeline_run_matches_oracle() {
    for input in ["ghz:6", "bv:6", "random:6:depth=2:seed=11"] {
        let cfg = RunConfig { input: input.into(), ..RunConfig::default() };
        let out = run(&cfg).unwrap();
        let exec = out.execution.expect("small circuits execute");
        if exec.exact {
            assert!(exec.distribution.tvd(&oracle_distribution(&out.plan.circuit)) < 1e-9, "{input}");
        }
    }
}

fn classical(n: usize) -> Vec<Decision> {
    vec![Decision { mode: ExecMode::Classical, reason: DecisionReason::WithinBudget }; n]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any colocated partition reconstructs the uncut distribution exactly,
    /// and the sequential and naive contractions agree.
    #[test]
    fn arbitrary_cuts_reconstruct_exactly(n in 2usize..=5, depth in 1usize..=4, seed in 0u64..1000, k in 2usize..=3, salt in any::<u64>()) {
        let c = random(n, depth, seed);
        let hg = build_hypergraph(&c).unwrap();
        let parts = (0..hg.num_nodes()).map(|v| ((salt >> (v % 64)) as usize + v / 64) % k).collect();
        let a = repair_gate_colocation(&hg, &PartitionAssignment::new(parts, k).unwrap());
        let set = extract_subcircuits(&c, &hg, &a).unwrap();
        prop_assume!(set.cuts().len() <= 6);
        let results = execute_all(&set, &classical(set.subcircuits.len()), &ExecConfig::default()).unwrap();
        let oracle = oracle_distribution(&c);
        let seq = reconstruct(&set, &results, EXACT_TOLERANCE).unwrap();
        prop_assert!(seq.tvd(&oracle) < 1e-9);
        let naive = reconstruct_naive(&set, &results, EXACT_TOLERANCE).unwrap();
        prop_assert!(naive.tvd(&seq) < 1e-12);
    }

    #[test]
    fn sampler_converges(n in 1usize..=4, depth in 1usize..=4, seed in 0u64..1000) {
        let mut c = random(n, depth, seed);
        c.set_measure_all(true);
        let exact = oracle_distribution(&c);
        let sampled = run_quantum_sim(&c, 20_000, None, seed, 25).unwrap();
        prop_assert!((sampled.total() - 1.0).abs() < 1e-12);
        prop_assert!(sampled.tvd(&exact) < 0.05);
    }
}
