//! Classical/quantum flagging and execution of subcircuit variants.
//!
//! Classical execution is exact (dense statevector contraction). Quantum
//! execution is stood in for by a shot sampler with optional depolarizing
//! noise.

mod distribution;
mod statevector;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateClass};
use crate::cutter::{Subcircuit, SubcircuitSet, VariantLabel};
use crate::mix_seed;

pub use distribution::{Distribution, DUST};
pub use statevector::StateVector;

pub const BYTES_PER_AMPLITUDE: u64 = 16;
pub const DEFAULT_MEMORY_BYTES: u64 = 8 << 30;
pub const DEFAULT_SHOTS: usize = 1000;
pub const DEFAULT_SIMULATOR_CAP: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("classical execution of {width} qubits needs {required} bytes, budget is {available}")]
    BudgetExceeded { width: usize, required: u64, available: u64 },
    #[error("simulator cap is {cap} qubits, circuit has {width}")]
    WidthOverCap { width: usize, cap: usize },
    #[error("shot count must be positive")]
    NoShots,
    #[error("{given} decisions for {expected} subcircuits")]
    DecisionCount { expected: usize, given: usize },
}

/// `16 * 2^n` bytes for a dense complex vector on `n` qubits; saturates at `u64::MAX`.
pub fn memory_requirement(n: usize) -> u64 {
    if n >= 60 {
        u64::MAX
    } else {
        BYTES_PER_AMPLITUDE << n
    }
}

/// Multi-qubit gate threshold implied by a memory budget: the number of
/// qubits whose dense state fits, `floor(log2(memory / 16))`.
pub fn entanglement_threshold(memory_bytes: u64) -> usize {
    match memory_bytes / BYTES_PER_AMPLITUDE {
        0 => 0,
        amps => amps.ilog2() as usize,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceBudget {
    pub memory_bytes: u64,
    pub max_multiqubit_gates: usize,
    pub shots: usize,
    pub bytes_per_amplitude: u64,
}

impl ResourceBudget {
    /// Budget with the gate threshold derived from `memory_bytes`.
    pub fn with_memory(memory_bytes: u64) -> ResourceBudget {
        ResourceBudget {
            memory_bytes,
            max_multiqubit_gates: entanglement_threshold(memory_bytes),
            shots: DEFAULT_SHOTS,
            bytes_per_amplitude: BYTES_PER_AMPLITUDE,
        }
    }
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget::with_memory(DEFAULT_MEMORY_BYTES)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum DecisionReason {
    NonClifford { gate: usize },
    Memory { required: u64, available: u64 },
    Entanglement { multiqubit_gates: usize, threshold: usize },
    WithinBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub mode: ExecMode,
    pub reason: DecisionReason,
}

/// Flags a subcircuit: quantum on a non-Clifford gate, then on memory over
/// budget, then on too many multi-qubit gates; classical otherwise.
pub fn decide(s: &Subcircuit, budget: &ResourceBudget) -> Decision {
    decide_circuit(&s.circuit, s.width(), budget)
}

pub fn decide_circuit(c: &Circuit, width: usize, budget: &ResourceBudget) -> Decision {
    let quantum = |reason| Decision { mode: ExecMode::Quantum, reason };
    if let Some(gate) = c.gates().iter().position(|g| g.class() == GateClass::NonClifford) {
        return quantum(DecisionReason::NonClifford { gate });
    }
    let amplitudes = if width >= 64 { u64::MAX } else { 1u64 << width };
    let required = budget.bytes_per_amplitude.saturating_mul(amplitudes);
    if required > budget.memory_bytes {
        return quantum(DecisionReason::Memory { required, available: budget.memory_bytes });
    }
    let multi = c.multi_qubit_gate_count();
    if multi > budget.max_multiqubit_gates {
        return quantum(DecisionReason::Entanglement {
            multiqubit_gates: multi,
            threshold: budget.max_multiqubit_gates,
        });
    }
    Decision { mode: ExecMode::Classical, reason: DecisionReason::WithinBudget }
}

fn final_state(c: &Circuit) -> StateVector {
    let mut sv = StateVector::zero(c.num_qubits());
    for g in c.gates() {
        sv.apply(g);
    }
    sv
}

/// Exact output distribution, contracting gates in time order.
pub fn run_classical(c: &Circuit, budget: &ResourceBudget) -> Result<Distribution, ExecError> {
    let width = c.num_qubits();
    let required = memory_requirement(width);
    if required > budget.memory_bytes {
        return Err(ExecError::BudgetExceeded { width, required, available: budget.memory_bytes });
    }
    Ok(Distribution::from_dense(width, &final_state(c).probabilities()))
}

/// Per-gate depolarizing rates for the shot sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub eps_single: f64,
    pub eps_multi: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { eps_single: 0.001, eps_multi: 0.01 }
    }
}

/// Samples `shots` outcomes. With noise, after each gate a uniformly random
/// non-identity Pauli string hits its operands with the gate's error rate;
/// shots sharing an error pattern share one simulation.
pub fn run_quantum_sim(
    c: &Circuit,
    shots: usize,
    noise: Option<&NoiseModel>,
    seed: u64,
    cap: usize,
) -> Result<Distribution, ExecError> {
    let width = c.num_qubits();
    if width > cap {
        return Err(ExecError::WidthOverCap { width, cap });
    }
    if shots == 0 {
        return Err(ExecError::NoShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // error pattern: (gate position, pauli code) pairs
    let mut groups: BTreeMap<Vec<(usize, u64)>, usize> = BTreeMap::new();
    for _ in 0..shots {
        let mut pattern = Vec::new();
        if let Some(m) = noise {
            for (gi, g) in c.gates().iter().enumerate() {
                let eps = if g.is_multi_qubit() { m.eps_multi } else { m.eps_single };
                if eps > 0.0 && rng.gen_bool(eps.min(1.0)) {
                    let strings = 4u64.pow(g.operands.len() as u32);
                    pattern.push((gi, rng.gen_range(1..strings)));
                }
            }
        }
        *groups.entry(pattern).or_insert(0) += 1;
    }

    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for (pattern, n) in groups {
        let mut sv = StateVector::zero(width);
        let mut errors = pattern.iter().peekable();
        for (gi, g) in c.gates().iter().enumerate() {
            sv.apply(g);
            while let Some(&&(at, code)) = errors.peek() {
                if at != gi {
                    break;
                }
                for (j, &q) in g.operands.iter().enumerate() {
                    sv.apply_pauli(q, ((code >> (2 * j)) & 3) as u8);
                }
                errors.next();
            }
        }
        let probs = sv.probabilities();
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in probs {
            acc += p;
            cumulative.push(acc);
        }
        for _ in 0..n {
            let u: f64 = rng.gen::<f64>() * acc;
            let idx = cumulative.partition_point(|&x| x <= u).min(last);
            *counts.entry(idx as u64).or_insert(0) += 1;
        }
    }
    Ok(Distribution::from_counts(width, &counts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub subcircuit: usize,
    pub label: VariantLabel,
    pub mode: ExecMode,
    /// Over the subcircuit's measurement layout: output bits, then cut bits.
    pub dist: Distribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    pub budget: ResourceBudget,
    pub noise: Option<NoiseModel>,
    pub seed: u64,
    pub simulator_cap: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { budget: ResourceBudget::default(), noise: None, seed: 0, simulator_cap: DEFAULT_SIMULATOR_CAP }
    }
}

/// RNG seed for one variant, independent of scheduling order.
pub fn variant_seed(seed: u64, subcircuit: usize, label: &VariantLabel) -> u64 {
    mix_seed(&[seed, subcircuit as u64, label.bases.len() as u64, label.preps.len() as u64, label.index()])
}

pub fn run_variant(
    s: &Subcircuit,
    label: &VariantLabel,
    mode: ExecMode,
    cfg: &ExecConfig,
) -> Result<VariantResult, ExecError> {
    let circuit = s.variant_circuit(label);
    let raw = match mode {
        ExecMode::Classical => run_classical(&circuit, &cfg.budget)?,
        ExecMode::Quantum => run_quantum_sim(
            &circuit,
            cfg.budget.shots,
            cfg.noise.as_ref(),
            variant_seed(cfg.seed, s.id, label),
            cfg.simulator_cap,
        )?,
    };
    Ok(VariantResult { subcircuit: s.id, label: label.clone(), mode, dist: raw.permuted(&s.measurement_layout()) })
}

/// Runs every physical variant of every subcircuit in parallel. Results come
/// back ordered by subcircuit, then label.
pub fn execute_all(
    set: &SubcircuitSet,
    decisions: &[Decision],
    cfg: &ExecConfig,
) -> Result<Vec<VariantResult>, ExecError> {
    if decisions.len() != set.subcircuits.len() {
        return Err(ExecError::DecisionCount { expected: set.subcircuits.len(), given: decisions.len() });
    }
    let jobs: Vec<(&Subcircuit, VariantLabel, ExecMode)> = set
        .subcircuits
        .iter()
        .zip(decisions)
        .flat_map(|(s, d)| s.physical_labels().into_iter().map(move |l| (s, l, d.mode)))
        .collect();
    jobs.par_iter().map(|(s, l, mode)| run_variant(s, l, *mode, cfg)).collect()
}
