//! Noise score, resource savings and tabular reports.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::cutter::SubcircuitSet;
use crate::executor::{memory_requirement, Decision, DecisionReason, ExecMode};
use crate::partitioner::sampling_overhead;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub eps_single: f64,
    pub eps_multi: f64,
    /// Crosstalk per qubit.
    pub gamma: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { eps_single: 0.001, eps_multi: 0.01, gamma: 0.05 }
    }
}

/// `N = S_single * eps_single + S_multi * eps_multi + Q * gamma`.
/// `qubits` is fractional when a qubit is shared between subcircuits.
pub fn noise_score(single: usize, multi: usize, qubits: f64, p: &NoiseParams) -> f64 {
    single as f64 * p.eps_single + multi as f64 * p.eps_multi + qubits * p.gamma
}

pub fn circuit_noise(c: &Circuit, p: &NoiseParams) -> f64 {
    noise_score(c.single_qubit_gate_count(), c.multi_qubit_gate_count(), c.active_qubits().len() as f64, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcircuitReport {
    pub id: usize,
    pub mode: ExecMode,
    pub reason: DecisionReason,
    pub width: usize,
    pub qubits: Vec<usize>,
    pub single_qubit_gates: usize,
    pub multi_qubit_gates: usize,
    /// This subcircuit's share of the circuit's qubits; a qubit touched by
    /// `m` subcircuits counts `1/m` in each.
    pub qubit_share: f64,
    pub noise: f64,
    pub memory_bytes: u64,
    pub out_cuts: Vec<usize>,
    pub in_cuts: Vec<usize>,
    pub physical_variants: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub original_noise: f64,
    pub quantum_noise: f64,
    pub noise_saved_pct: f64,
    /// Active qubits of the uncut circuit.
    pub qubit_total: usize,
    pub qubit_max: usize,
    /// Dense memory for the uncut circuit.
    pub classical_total: u64,
    pub classical_max: u64,
    pub cut_points: usize,
    /// `4^C`; absent when it does not fit in an `i64`.
    pub sampling_overhead: Option<u64>,
    pub classical_subcircuits: usize,
    pub quantum_subcircuits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: String,
    pub num_qubits: usize,
    pub subcircuits: Vec<SubcircuitReport>,
    pub aggregates: Aggregates,
}

pub fn build_report(c: &Circuit, set: &SubcircuitSet, decisions: &[Decision], p: &NoiseParams) -> RunReport {
    assert_eq!(decisions.len(), set.subcircuits.len(), "one decision per subcircuit");
    let mut holders = vec![0usize; c.num_qubits()];
    let qubit_sets: Vec<Vec<usize>> = set
        .subcircuits
        .iter()
        .map(|s| {
            let mut q = s.qubit_map();
            q.sort_unstable();
            q.dedup();
            q
        })
        .collect();
    for q in qubit_sets.iter().flatten() {
        holders[*q] += 1;
    }

    let subcircuits: Vec<SubcircuitReport> = set
        .subcircuits
        .iter()
        .zip(decisions)
        .zip(qubit_sets)
        .map(|((s, d), qubits)| {
            let share: f64 = qubits.iter().map(|&q| 1.0 / holders[q] as f64).sum();
            let single = s.circuit.single_qubit_gate_count();
            let multi = s.circuit.multi_qubit_gate_count();
            SubcircuitReport {
                id: s.id,
                mode: d.mode,
                reason: d.reason.clone(),
                width: s.width(),
                qubits,
                single_qubit_gates: single,
                multi_qubit_gates: multi,
                qubit_share: share,
                noise: noise_score(single, multi, share, p),
                memory_bytes: memory_requirement(s.width()),
                out_cuts: s.out_cuts.clone(),
                in_cuts: s.in_cuts.clone(),
                physical_variants: s.num_physical_variants(),
            }
        })
        .collect();

    let original_noise = circuit_noise(c, p);
    let quantum: Vec<&SubcircuitReport> = subcircuits.iter().filter(|s| s.mode == ExecMode::Quantum).collect();
    let classical: Vec<&SubcircuitReport> = subcircuits.iter().filter(|s| s.mode == ExecMode::Classical).collect();
    let quantum_noise = quantum.iter().fold(0.0, |acc, s| acc + s.noise);
    // the end points are exact; in between the ratio carries rounding
    let noise_saved_pct = if original_noise == 0.0 || classical.is_empty() {
        0.0
    } else if quantum.is_empty() {
        100.0
    } else {
        100.0 * (1.0 - quantum_noise / original_noise)
    };
    let cut_points = set.cuts().len();
    let aggregates = Aggregates {
        original_noise,
        quantum_noise,
        noise_saved_pct,
        qubit_total: c.active_qubits().len(),
        qubit_max: quantum.iter().map(|s| s.width).max().unwrap_or(0),
        classical_total: memory_requirement(c.num_qubits()),
        classical_max: classical.iter().map(|s| s.memory_bytes).max().unwrap_or(0),
        cut_points,
        sampling_overhead: sampling_overhead(cut_points, 4),
        classical_subcircuits: classical.len(),
        quantum_subcircuits: quantum.len(),
    };
    RunReport { circuit: c.name().to_string(), num_qubits: c.num_qubits(), subcircuits, aggregates }
}

fn overhead_cell(v: Option<u64>) -> String {
    v.map_or_else(|| "overflow".to_string(), |v| v.to_string())
}

/// One row per report: noise and cost columns, floats at 2 decimals.
pub fn write_tables_csv<W: Write>(reports: &[RunReport], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "circuit,size,original_noise,quantum_noise,noise_saved_pct,classical_total,classical_max,qubit_total,qubit_max,cut_points,sampling_overhead"
    )?;
    for r in reports {
        let a = &r.aggregates;
        writeln!(
            out,
            "{},{},{:.2},{:.2},{:.2},{},{},{},{},{},{}",
            r.circuit,
            r.num_qubits,
            a.original_noise,
            a.quantum_noise,
            a.noise_saved_pct,
            a.classical_total,
            a.classical_max,
            a.qubit_total,
            a.qubit_max,
            a.cut_points,
            overhead_cell(a.sampling_overhead)
        )?;
    }
    Ok(())
}

/// Bar-chart data: original vs executed-quantum noise per circuit.
pub fn write_noise_plot_csv<W: Write>(reports: &[RunReport], mut out: W) -> io::Result<()> {
    writeln!(out, "circuit,size,original,quantum")?;
    for r in reports {
        writeln!(out, "{},{},{},{}", r.circuit, r.num_qubits, r.aggregates.original_noise, r.aggregates.quantum_noise)?;
    }
    Ok(())
}

pub fn write_cost_plot_csv<W: Write>(reports: &[RunReport], mut out: W) -> io::Result<()> {
    writeln!(out, "circuit,size,classical_total,classical_max,qubit_total,qubit_max")?;
    for r in reports {
        let a = &r.aggregates;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.circuit, r.num_qubits, a.classical_total, a.classical_max, a.qubit_total, a.qubit_max
        )?;
    }
    Ok(())
}

/// Per-subcircuit widths and noise for one report.
pub fn write_subcircuit_plot_csv<W: Write>(report: &RunReport, mut out: W) -> io::Result<()> {
    writeln!(out, "subcircuit,mode,width,noise,memory_bytes")?;
    for s in &report.subcircuits {
        let mode = match s.mode {
            ExecMode::Classical => "classical",
            ExecMode::Quantum => "quantum",
        };
        writeln!(out, "{},{},{},{},{}", s.id, mode, s.width, s.noise, s.memory_bytes)?;
    }
    Ok(())
}
