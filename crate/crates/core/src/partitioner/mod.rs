//! Partitioning of the clique-expanded temporal hypergraph.
//!
//! The flow for one part count `k` is: [`partition_k`] on the weighted
//! graph, [`repair_gate_colocation`] so no gate straddles parts, a
//! gate-atomic rebalance/refine pass, extraction, then
//! [`reallocate_shared_qubits`]. [`sweep_k`] runs that flow for every `k`
//! in range and keeps the candidate with the fewest cut points.

mod multilevel;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::cutter::{extract_subcircuits, CutError, SubcircuitSet};
use crate::hypergraph::{HyperedgeKind, HypergraphError, TemporalHypergraph};

pub use multilevel::{partition_k, partition_k_with, PartitionParams};
pub use sweep::{
    polish_reallocated, refine_colocated, sweep_k, sweep_k_with, KEvaluation, PartitionCandidate, SweepOutcome,
    SweepParams,
};

/// Default allowed overshoot of the ideal part size.
pub const DEFAULT_IMBALANCE: f64 = 0.05;

/// Bases per wire cut in the overhead law.
pub const BASES_PER_CUT: u64 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("part count {k} invalid for a graph with {nodes} nodes (need 2 <= k <= nodes)")]
    InvalidK { k: usize, nodes: usize },
    #[error("part id {part} out of range for k = {k}")]
    PartOutOfRange { part: usize, k: usize },
    #[error("assignment cuts gate {gate}")]
    GateCut { gate: usize },
    #[error("assignment covers {found} nodes, hypergraph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Largest part size allowed: `ceil((1 + imbalance) * nodes / k)`.
pub fn max_part_size(nodes: usize, k: usize, imbalance: f64) -> usize {
    // integer arithmetic in millionths avoids 1.05 * 40 / 2 rounding up to 22
    let scale = 1_000_000u128;
    let factor = ((1.0 + imbalance) * scale as f64).round() as u128;
    let num = nodes as u128 * factor;
    let den = k as u128 * scale;
    num.div_ceil(den) as usize
}

/// Node-to-part map over hypergraph node ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    part_of: Vec<usize>,
    k: usize,
}

impl PartitionAssignment {
    pub fn new(part_of: Vec<usize>, k: usize) -> Result<PartitionAssignment, PartitionError> {
        if let Some(&part) = part_of.iter().find(|&&p| p >= k) {
            return Err(PartitionError::PartOutOfRange { part, k });
        }
        Ok(PartitionAssignment { part_of, k })
    }

    /// Everything in part 0.
    pub fn single(nodes: usize) -> PartitionAssignment {
        PartitionAssignment { part_of: vec![0; nodes], k: 1 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn part(&self, node: usize) -> usize {
        self.part_of[node]
    }

    pub fn parts(&self) -> &[usize] {
        &self.part_of
    }

    pub fn num_nodes(&self) -> usize {
        self.part_of.len()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &p in &self.part_of {
            sizes[p] += 1;
        }
        sizes
    }

    pub fn all_nonempty(&self) -> bool {
        self.part_sizes().iter().all(|&s| s > 0)
    }

    pub fn is_balanced(&self, imbalance: f64) -> bool {
        let maxw = max_part_size(self.part_of.len(), self.k, imbalance);
        self.part_sizes().iter().all(|&s| s <= maxw)
    }

    pub(crate) fn set(&mut self, node: usize, part: usize) {
        debug_assert!(part < self.k);
        self.part_of[node] = part;
    }

    /// Renumbers the used parts to `0..m` in increasing order of old id.
    pub fn compacted(&self) -> PartitionAssignment {
        let mut remap = vec![usize::MAX; self.k];
        for &p in &self.part_of {
            remap[p] = 0;
        }
        let mut next = 0;
        for slot in remap.iter_mut().filter(|s| **s == 0) {
            *slot = next;
            next += 1;
        }
        PartitionAssignment { part_of: self.part_of.iter().map(|&p| remap[p]).collect(), k: next.max(1) }
    }
}

fn check_size(hg: &TemporalHypergraph, a: &PartitionAssignment) -> Result<(), PartitionError> {
    if hg.num_nodes() != a.num_nodes() {
        return Err(PartitionError::SizeMismatch { expected: hg.num_nodes(), found: a.num_nodes() });
    }
    Ok(())
}

/// Gate hyperedges whose nodes do not all share a part.
pub fn gate_violations(hg: &TemporalHypergraph, a: &PartitionAssignment) -> usize {
    hg.gate_edges().filter(|e| e.nodes.iter().any(|&v| a.part(v) != a.part(e.nodes[0]))).count()
}

/// Moves every split gate onto the part holding most of its nodes (ties to
/// the lowest part id) until no gate is split.
pub fn repair_gate_colocation(hg: &TemporalHypergraph, a: &PartitionAssignment) -> PartitionAssignment {
    let mut out = a.clone();
    let mut counts = vec![0usize; a.k()];
    loop {
        let mut changed = false;
        for e in hg.gate_edges() {
            let first = out.part(e.nodes[0]);
            if e.nodes.iter().all(|&v| out.part(v) == first) {
                continue;
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for &v in &e.nodes {
                counts[out.part(v)] += 1;
            }
            let mut target = 0;
            for p in 1..counts.len() {
                if counts[p] > counts[target] {
                    target = p;
                }
            }
            for &v in &e.nodes {
                out.set(v, target);
            }
            changed = true;
        }
        if !changed {
            return out;
        }
    }
}

/// Number of temporal hyperedges whose endpoints sit in different parts.
pub fn count_cut_points(hg: &TemporalHypergraph, a: &PartitionAssignment) -> Result<usize, PartitionError> {
    check_size(hg, a)?;
    let mut cuts = 0;
    for e in hg.edges() {
        let split = e.nodes.iter().any(|&v| a.part(v) != a.part(e.nodes[0]));
        match e.kind {
            HyperedgeKind::Gate if split => {
                return Err(PartitionError::GateCut { gate: e.gate_index.expect("gate edge") })
            }
            HyperedgeKind::Temporal if split => cuts += 1,
            _ => {}
        }
    }
    Ok(cuts)
}

/// Sampling overhead `bases^cuts`, or `None` past `i64::MAX`.
pub fn sampling_overhead(cuts: usize, bases: u64) -> Option<u64> {
    let exp = u32::try_from(cuts).ok()?;
    bases.checked_pow(exp).filter(|&v| v <= i64::MAX as u64)
}

/// Assignment-level reallocation: for each qubit split over several parts
/// whose multi-qubit gates all sit in one part, pull its single-qubit gate
/// nodes into that part.
pub fn reallocate_assignment(c: &Circuit, hg: &TemporalHypergraph, a: &PartitionAssignment) -> PartitionAssignment {
    let mut out = a.clone();
    for q in 0..hg.num_qubits() {
        let nodes = hg.qubit_nodes(q);
        let Some(&first) = nodes.first() else { continue };
        if nodes.iter().all(|&v| a.part(v) == a.part(first)) {
            continue;
        }
        let mut home: Option<usize> = None;
        let mut single_home = true;
        for &v in nodes {
            if c.gates()[hg.node_gate(v)].is_multi_qubit() {
                match home {
                    None => home = Some(a.part(v)),
                    Some(h) if h != a.part(v) => single_home = false,
                    _ => {}
                }
            }
        }
        if let (Some(target), true) = (home, single_home) {
            for &v in nodes {
                out.set(v, target);
            }
        }
    }
    out
}

/// Applies [`reallocate_assignment`] to an extracted set and re-extracts.
/// Parts left without gates disappear.
pub fn reallocate_shared_qubits(
    c: &Circuit,
    hg: &TemporalHypergraph,
    subs: &SubcircuitSet,
) -> Result<SubcircuitSet, PartitionError> {
    let moved = reallocate_assignment(c, hg, subs.assignment());
    Ok(extract_subcircuits(c, hg, &moved.compacted())?)
}
