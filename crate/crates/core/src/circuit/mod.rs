//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over `n` qubits. Gates carry an
//! optional time step assigned by [`schedule_asap`]; every other stage of the
//! pipeline expects a scheduled circuit.

mod gate;
pub mod generate;
pub mod qasm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gate::{classify_gate, Gate, GateClass, GateKind};
pub use generate::{generate, GeneratorKind, GeneratorOptions};
pub use qasm::{emit_qasm, parse_qasm, QasmError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate} takes {expected} qubit(s), got {found}")]
    OperandCount { gate: GateKind, expected: usize, found: usize },
    #[error("gate {gate} takes {expected} parameter(s), got {found}")]
    ParamCount { gate: GateKind, expected: usize, found: usize },
    #[error("gate {gate} repeats qubit {qubit}")]
    DuplicateOperand { gate: GateKind, qubit: usize },
    #[error("gate {gate} has non-finite parameter {value}")]
    NonFiniteParam { gate: GateKind, value: f64 },
    #[error("qubit {qubit} out of range for a {n}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("invalid generator options: {0}")]
    InvalidOptions(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Circuit {
    name: String,
    n: usize,
    gates: Vec<Gate>,
    depth: usize,
    measure_all: bool,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n: usize) -> Circuit {
        Circuit { name: name.into(), n, gates: Vec::new(), depth: 0, measure_all: false }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// `1 + max time_step`, or 0 for an empty or unscheduled circuit.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn measure_all(&self) -> bool {
        self.measure_all
    }

    pub fn set_measure_all(&mut self, on: bool) {
        self.measure_all = on;
    }

    /// Appends a gate. Appending clears any previous schedule.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        if let Some(&q) = gate.operands.iter().find(|&&q| q >= self.n) {
            return Err(CircuitError::QubitOutOfRange { qubit: q, n: self.n });
        }
        if self.is_scheduled() {
            for g in &mut self.gates {
                g.time_step = None;
            }
            self.depth = 0;
        }
        self.gates.push(Gate { time_step: None, ..gate });
        Ok(self)
    }

    pub fn apply(&mut self, kind: GateKind, operands: &[usize], params: &[f64]) -> Result<&mut Self, CircuitError> {
        let gate = Gate::new(kind, operands, params)?;
        self.push(gate)
    }

    /// True when every gate carries a time step (vacuously true when empty).
    pub fn is_scheduled(&self) -> bool {
        self.gates.iter().all(|g| g.time_step.is_some())
    }

    pub fn single_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_multi_qubit()).count()
    }

    pub fn multi_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_multi_qubit()).count()
    }

    /// Qubits touched by at least one gate, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for g in &self.gates {
            for &q in &g.operands {
                seen[q] = true;
            }
        }
        (0..self.n).filter(|&q| seen[q]).collect()
    }

    pub fn has_non_clifford(&self) -> bool {
        self.gates.iter().any(|g| g.class() == GateClass::NonClifford)
    }

    /// Equality of qubit count, gate operations and measurement flag.
    /// Names and schedules are not compared.
    pub fn same_structure(&self, other: &Circuit) -> bool {
        self.n == other.n
            && self.measure_all == other.measure_all
            && self.gates.len() == other.gates.len()
            && self.gates.iter().zip(&other.gates).all(|(a, b)| a.same_op(b))
    }
}

/// As-soon-as-possible scheduling: each gate lands one step after the latest
/// gate already placed on any of its qubits.
pub fn schedule_asap(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    let mut last: Vec<Option<usize>> = vec![None; c.n];
    let mut depth = 0;
    for g in &mut out.gates {
        let t = g.operands.iter().filter_map(|&q| last[q]).max().map_or(0, |m| m + 1);
        for &q in &g.operands {
            last[q] = Some(t);
        }
        g.time_step = Some(t);
        depth = depth.max(t + 1);
    }
    out.depth = depth;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Circuit {
        let mut c = Circuit::new("t", 3);
        c.apply(GateKind::H, &[0], &[]).unwrap();
        c.apply(GateKind::Cx, &[0, 1], &[]).unwrap();
        c.apply(GateKind::H, &[2], &[]).unwrap();
        c.apply(GateKind::Cx, &[1, 2], &[]).unwrap();
        c
    }

    fn steps(c: &Circuit) -> Vec<usize> {
        c.gates().iter().map(|g| g.time_step.unwrap()).collect()
    }

    #[test]
    fn asap_basic() {
        let mut c = Circuit::new("t", 2);
        c.apply(GateKind::H, &[0], &[]).unwrap();
        c.apply(GateKind::Cx, &[0, 1], &[]).unwrap();
        assert_eq!(steps(&schedule_asap(&c)), vec![0, 1]);

        let mut c = Circuit::new("t", 2);
        c.apply(GateKind::H, &[0], &[]).unwrap();
        c.apply(GateKind::H, &[1], &[]).unwrap();
        let s = schedule_asap(&c);
        assert_eq!(steps(&s), vec![0, 0]);
        assert_eq!(s.depth(), 1);
    }

    #[test]
    fn asap_idempotent() {
        let once = schedule_asap(&chain());
        let twice = schedule_asap(&once);
        assert_eq!(steps(&once), vec![0, 1, 0, 2]);
        assert_eq!(steps(&once), steps(&twice));
        assert_eq!(once.depth(), 3);
    }

    #[test]
    fn empty_circuit_depth_zero() {
        let s = schedule_asap(&Circuit::new("e", 3));
        assert_eq!(s.depth(), 0);
        assert!(s.is_scheduled());
    }

    #[test]
    fn push_rejects_out_of_range() {
        let mut c = Circuit::new("t", 2);
        assert_eq!(c.apply(GateKind::Cx, &[0, 2], &[]).unwrap_err(), CircuitError::QubitOutOfRange { qubit: 2, n: 2 });
    }

    #[test]
    fn push_clears_schedule() {
        let mut s = schedule_asap(&chain());
        s.apply(GateKind::X, &[0], &[]).unwrap();
        assert!(!s.is_scheduled());
        assert_eq!(s.depth(), 0);
    }
}
