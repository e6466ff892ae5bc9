use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CircuitError;

/// Angles within this distance of a Clifford grid point count as on the grid.
const CLIFFORD_ANGLE_TOL: f64 = 1e-12;

/// The gate vocabulary understood by the parser, the generators and the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz,
    Rx,
    Ry,
    Cx,
    Cz,
    Cp,
    Swap,
    Ccx,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
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
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Cp,
        GateKind::Swap,
        GateKind::Ccx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Cp => "cp",
            GateKind::Swap => "swap",
            GateKind::Ccx => "ccx",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Number of qubit operands.
    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Cp | GateKind::Swap => 2,
            GateKind::Ccx => 3,
            _ => 1,
        }
    }

    /// Number of real angle parameters.
    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rx | GateKind::Ry | GateKind::Cp => 1,
            _ => 0,
        }
    }

    pub fn is_multi_qubit(self) -> bool {
        self.num_qubits() > 1
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateClass {
    Clifford,
    NonClifford,
}

fn is_multiple_of(angle: f64, unit: f64) -> bool {
    let k = (angle / unit).round();
    (angle - k * unit).abs() <= CLIFFORD_ANGLE_TOL
}

/// Clifford membership of a gate.
///
/// Single-qubit rotations are Clifford on multiples of pi/2. A controlled
/// phase is Clifford only on multiples of pi (identity or CZ); controlled-S
/// already sits outside the Clifford group.
pub fn classify_gate(kind: GateKind, params: &[f64]) -> GateClass {
    let clifford = match kind {
        GateKind::H
        | GateKind::X
        | GateKind::Y
        | GateKind::Z
        | GateKind::S
        | GateKind::Sdg
        | GateKind::Cx
        | GateKind::Cz
        | GateKind::Swap => true,
        GateKind::T | GateKind::Tdg | GateKind::Ccx => false,
        GateKind::Rz | GateKind::Rx | GateKind::Ry => params.first().is_some_and(|&a| is_multiple_of(a, FRAC_PI_2)),
        GateKind::Cp => params.first().is_some_and(|&a| is_multiple_of(a, PI)),
    };
    if clifford {
        GateClass::Clifford
    } else {
        GateClass::NonClifford
    }
}

/// One gate application. `time_step` is filled in by scheduling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub operands: Vec<usize>,
    pub params: Vec<f64>,
    pub time_step: Option<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, operands: &[usize], params: &[f64]) -> Result<Gate, CircuitError> {
        if operands.len() != kind.num_qubits() {
            return Err(CircuitError::OperandCount { gate: kind, expected: kind.num_qubits(), found: operands.len() });
        }
        if params.len() != kind.num_params() {
            return Err(CircuitError::ParamCount { gate: kind, expected: kind.num_params(), found: params.len() });
        }
        for (i, q) in operands.iter().enumerate() {
            if operands[..i].contains(q) {
                return Err(CircuitError::DuplicateOperand { gate: kind, qubit: *q });
            }
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(CircuitError::NonFiniteParam { gate: kind, value: *p });
        }
        Ok(Gate { kind, operands: operands.to_vec(), params: params.to_vec(), time_step: None })
    }

    pub fn class(&self) -> GateClass {
        classify_gate(self.kind, &self.params)
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.kind.is_multi_qubit()
    }

    /// Same kind, operands and parameters; the schedule is ignored.
    pub fn same_op(&self, other: &Gate) -> bool {
        self.kind == other.kind && self.operands == other.operands && self.params == other.params
    }
}
