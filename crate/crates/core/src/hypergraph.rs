//! Temporal hypergraph of a scheduled circuit and its clique expansion.
//!
//! Vertices are `(qubit, time)` pairs at which the qubit takes part in a
//! gate. Every multi-qubit gate becomes a gate hyperedge over its operand
//! vertices; consecutive participations of one qubit are joined by a
//! temporal hyperedge. Single-qubit gates only contribute vertices.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;

/// Weight of a temporal continuity hyperedge.
pub const TEMPORAL_WEIGHT: f64 = 10.0;

/// Pairwise weight of a `k`-qubit gate hyperedge: `1000 k / (k - 1)`.
pub fn gate_pair_weight(k: usize) -> f64 {
    assert!(k >= 2, "gate hyperedges need at least two qubits");
    1000.0 * k as f64 / (k as f64 - 1.0)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("circuit `{0}` is not scheduled")]
    Unscheduled(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemporalNode {
    pub qubit: usize,
    pub time: usize,
}

impl fmt::Display for TemporalNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}_t{}", self.qubit, self.time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperedgeKind {
    Gate,
    Temporal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    /// Node ids, in operand order for gate edges and time order for temporal edges.
    pub nodes: Vec<usize>,
    pub weight: f64,
    pub kind: HyperedgeKind,
    pub gate_index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TemporalHypergraph {
    nodes: Vec<TemporalNode>,
    edges: Vec<Hyperedge>,
    qubit_nodes: Vec<Vec<usize>>,
    gate_nodes: Vec<Vec<usize>>,
    node_gate: Vec<usize>,
}

impl TemporalHypergraph {
    /// Nodes sorted by `(qubit, time)`; a node's id is its index here.
    pub fn nodes(&self) -> &[TemporalNode] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn gate_edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().filter(|e| e.kind == HyperedgeKind::Gate)
    }

    pub fn temporal_edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().filter(|e| e.kind == HyperedgeKind::Temporal)
    }

    /// Node ids of one qubit's participations in time order.
    pub fn qubit_nodes(&self, qubit: usize) -> &[usize] {
        &self.qubit_nodes[qubit]
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_nodes.len()
    }

    /// Operand-ordered node ids touched by gate `gate_index`.
    pub fn gate_nodes(&self, gate_index: usize) -> &[usize] {
        &self.gate_nodes[gate_index]
    }

    /// Index of the gate acting at a node.
    pub fn node_gate(&self, node: usize) -> usize {
        self.node_gate[node]
    }

    pub fn node_id(&self, node: TemporalNode) -> Option<usize> {
        let ids = self.qubit_nodes.get(node.qubit)?;
        ids.binary_search_by_key(&node.time, |&id| self.nodes[id].time).ok().map(|i| ids[i])
    }
}

/// Builds the temporal hypergraph of a scheduled circuit.
pub fn build_hypergraph(c: &Circuit) -> Result<TemporalHypergraph, HypergraphError> {
    if !c.is_scheduled() {
        return Err(HypergraphError::Unscheduled(c.name().to_string()));
    }
    let mut keyed: Vec<(TemporalNode, usize)> = Vec::new();
    for (gi, g) in c.gates().iter().enumerate() {
        let time = g.time_step.expect("checked scheduled");
        for &qubit in &g.operands {
            keyed.push((TemporalNode { qubit, time }, gi));
        }
    }
    keyed.sort_unstable();
    let nodes: Vec<TemporalNode> = keyed.iter().map(|(n, _)| *n).collect();
    let node_gate: Vec<usize> = keyed.iter().map(|(_, g)| *g).collect();

    let mut qubit_nodes = vec![Vec::new(); c.num_qubits()];
    for (id, n) in nodes.iter().enumerate() {
        qubit_nodes[n.qubit].push(id);
    }

    let mut gate_nodes: Vec<Vec<usize>> = vec![Vec::new(); c.gates().len()];
    let mut edges = Vec::new();
    for (gi, g) in c.gates().iter().enumerate() {
        let time = g.time_step.expect("checked scheduled");
        let ids: Vec<usize> = g
            .operands
            .iter()
            .map(|&qubit| {
                let qn = &qubit_nodes[qubit];
                let at = qn.binary_search_by_key(&time, |&id| nodes[id].time).expect("every operand has a node");
                qn[at]
            })
            .collect();
        if ids.len() >= 2 {
            edges.push(Hyperedge {
                nodes: ids.clone(),
                weight: gate_pair_weight(ids.len()),
                kind: HyperedgeKind::Gate,
                gate_index: Some(gi),
            });
        }
        gate_nodes[gi] = ids;
    }
    for qn in &qubit_nodes {
        for pair in qn.windows(2) {
            edges.push(Hyperedge {
                nodes: pair.to_vec(),
                weight: TEMPORAL_WEIGHT,
                kind: HyperedgeKind::Temporal,
                gate_index: None,
            });
        }
    }
    Ok(TemporalHypergraph { nodes, edges, qubit_nodes, gate_nodes, node_gate })
}

/// Undirected weighted graph over temporal nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    pub nodes: Vec<TemporalNode>,
    /// `(u, v, weight)` with `u < v`, sorted, no duplicates.
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by(|&(a, b, _)| (a, b).cmp(&key)).ok().map(|i| self.edges[i].2)
    }

    /// One `node node weight` line per edge, nodes written as `q{qubit}_t{time}`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for &(u, v, w) in &self.edges {
            writeln!(out, "{} {} {}", self.nodes[u], self.nodes[v], w)?;
        }
        Ok(())
    }
}

/// Replaces each hyperedge by a clique; a pair covered by several hyperedges
/// gets the mean of their weights.
pub fn clique_expand(hg: &TemporalHypergraph) -> WeightedGraph {
    expand_edges(hg.nodes.clone(), &hg.edges)
}

pub(crate) fn expand_edges(nodes: Vec<TemporalNode>, edges: &[Hyperedge]) -> WeightedGraph {
    let mut acc: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for e in edges {
        for (i, &a) in e.nodes.iter().enumerate() {
            for &b in &e.nodes[i + 1..] {
                if a == b {
                    continue;
                }
                let slot = acc.entry((a.min(b), a.max(b))).or_insert((0.0, 0));
                slot.0 += e.weight;
                slot.1 += 1;
            }
        }
    }
    let edges = acc.into_iter().map(|((u, v), (sum, count))| (u, v, sum / count as f64)).collect();
    WeightedGraph { nodes, edges }
}
