//! Test oracles: a dense-unitary simulator written independently of the
//! library's statevector code, and an exhaustive partition search.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use hypercut::circuit::{generate, schedule_asap, Circuit, Gate, GateKind, GeneratorKind, GeneratorOptions};
use hypercut::executor::Distribution;
use hypercut::hypergraph::{build_hypergraph, HyperedgeKind, TemporalHypergraph};
use hypercut::partitioner::{count_cut_points, max_part_size, reallocate_assignment, PartitionAssignment};
use num_complex::Complex64 as C;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Full local matrix of a gate; local basis index bit `j` is operand `j`.
fn local_matrix(g: &Gate) -> Vec<Vec<C>> {
    let one = |m: [[C; 2]; 2]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let diag = |d: Vec<C>| {
        let n = d.len();
        (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { c(0.0, 0.0) }).collect()).collect()
    };
    let perm = |n: usize, f: &dyn Fn(usize) -> usize| {
        let mut m = vec![vec![c(0.0, 0.0); n]; n];
        for j in 0..n {
            m[f(j)][j] = c(1.0, 0.0);
        }
        m
    };
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    let h = FRAC_1_SQRT_2;
    match g.kind {
        GateKind::H => one([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        GateKind::X => one([[z, o], [o, z]]),
        GateKind::Y => one([[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        GateKind::Z => diag(vec![o, -o]),
        GateKind::S => diag(vec![o, c(0.0, 1.0)]),
        GateKind::Sdg => diag(vec![o, c(0.0, -1.0)]),
        GateKind::T => diag(vec![o, C::from_polar(1.0, FRAC_PI_4)]),
        GateKind::Tdg => diag(vec![o, C::from_polar(1.0, -FRAC_PI_4)]),
        GateKind::Rz => diag(vec![C::from_polar(1.0, -g.params[0] / 2.0), C::from_polar(1.0, g.params[0] / 2.0)]),
        GateKind::Rx => {
            let (s, co) = (g.params[0] / 2.0).sin_cos();
            one([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        GateKind::Ry => {
            let (s, co) = (g.params[0] / 2.0).sin_cos();
            one([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        // control is operand 0 (bit 0), target operand 1 (bit 1)
        GateKind::Cx => perm(4, &|j| if j & 1 == 1 { j ^ 2 } else { j }),
        GateKind::Cz => diag(vec![o, o, o, -o]),
        GateKind::Cp => diag(vec![o, o, o, C::from_polar(1.0, g.params[0])]),
        GateKind::Swap => perm(4, &|j| ((j & 1) << 1) | (j >> 1)),
        GateKind::Ccx => perm(8, &|j| if j & 3 == 3 { j ^ 4 } else { j }),
    }
}

/// Final state of `c` from `|0...0>`, one full local-matrix application per gate.
pub fn oracle_state(c: &Circuit) -> Vec<C> {
    let n = c.num_qubits();
    let mut psi = vec![C::new(0.0, 0.0); 1 << n];
    psi[0] = C::new(1.0, 0.0);
    for g in c.gates() {
        let m = local_matrix(g);
        let mut next = vec![C::new(0.0, 0.0); psi.len()];
        for (i, out) in next.iter_mut().enumerate() {
            let row = g.operands.iter().enumerate().map(|(j, &q)| ((i >> q) & 1) << j).sum::<usize>();
            let base = g.operands.iter().fold(i, |acc, &q| acc & !(1 << q));
            for (col, entry) in m[row].iter().enumerate() {
                let src = g.operands.iter().enumerate().fold(base, |acc, (j, &q)| acc | (((col >> j) & 1) << q));
                *out += entry * psi[src];
            }
        }
        psi = next;
    }
    psi
}

pub fn oracle_distribution(c: &Circuit) -> Distribution {
    let probs: Vec<f64> = oracle_state(c).iter().map(|a| a.norm_sqr()).collect();
    Distribution::from_dense(c.num_qubits(), &probs)
}

pub fn ghz(n: usize) -> Circuit {
    generate(GeneratorKind::Ghz, n, &GeneratorOptions::default()).unwrap()
}

pub fn bv(n: usize) -> Circuit {
    generate(GeneratorKind::Bv, n, &GeneratorOptions::default()).unwrap()
}

pub fn qft(n: usize) -> Circuit {
    generate(GeneratorKind::Qft, n, &GeneratorOptions::default()).unwrap()
}

pub fn random(n: usize, depth: usize, seed: u64) -> Circuit {
    generate(GeneratorKind::Random, n, &GeneratorOptions { depth: Some(depth), seed: Some(seed), ..Default::default() })
        .unwrap()
}

pub fn bell() -> Circuit {
    let mut c = Circuit::new("bell", 2);
    c.apply(GateKind::H, &[0], &[]).unwrap();
    c.apply(GateKind::Cx, &[0, 1], &[]).unwrap();
    schedule_asap(&c)
}

/// Assignment putting every node at or after `time` in part 1.
pub fn time_split(hg: &TemporalHypergraph, time: usize) -> PartitionAssignment {
    PartitionAssignment::new(hg.nodes().iter().map(|n| usize::from(n.time >= time)).collect(), 2).unwrap()
}

/// Exhaustive minimum, over every K the sweep would try, of the cut count
/// after reallocation, taken over balanced, gate-colocated assignments with
/// no empty part that still span two parts after reallocation. Only values
/// up to `bound` are searched for; `None` means nothing at or below `bound`
/// exists.
pub fn brute_force_min_cuts(c: &Circuit, k_cap: usize, imbalance: f64, bound: usize) -> Option<usize> {
    let hg = build_hypergraph(c).unwrap();
    let k_max = (c.num_qubits() / 2).min(k_cap).min(hg.num_nodes());
    let mut best = None;
    let mut limit = bound;
    for k in 2..=k_max {
        let mut search = Search::new(c, &hg, k, imbalance);
        if let Some(found) = search.run(limit) {
            limit = found;
            best = Some(best.map_or(found, |b: usize| b.min(found)));
        }
    }
    best
}

struct Search<'a> {
    c: &'a Circuit,
    hg: &'a TemporalHypergraph,
    k: usize,
    maxw: usize,
    /// Multi-qubit gate units in time order, then single-qubit nodes.
    units: Vec<Vec<usize>>,
    gate_units: usize,
    unit_part: Vec<usize>,
    sizes: Vec<usize>,
    node_unit: Vec<usize>,
    /// Per qubit: node ids in time order.
    qubit_nodes: Vec<Vec<usize>>,
    is_multi: Vec<bool>,
    best: usize,
}

const UNSET: usize = usize::MAX;

impl<'a> Search<'a> {
    fn new(c: &'a Circuit, hg: &'a TemporalHypergraph, k: usize, imbalance: f64) -> Search<'a> {
        let n = hg.num_nodes();
        let mut gates: Vec<(usize, Vec<usize>)> = hg
            .edges()
            .iter()
            .filter(|e| e.kind == HyperedgeKind::Gate)
            .map(|e| (hg.nodes()[e.nodes[0]].time, e.nodes.clone()))
            .collect();
        gates.sort();
        let mut is_multi = vec![false; n];
        let mut units: Vec<Vec<usize>> = Vec::new();
        for (_, nodes) in gates {
            for &v in &nodes {
                is_multi[v] = true;
            }
            units.push(nodes);
        }
        let gate_units = units.len();
        units.extend((0..n).filter(|&v| !is_multi[v]).map(|v| vec![v]));
        let mut node_unit = vec![0; n];
        for (u, nodes) in units.iter().enumerate() {
            for &v in nodes {
                node_unit[v] = u;
            }
        }
        Search {
            c,
            hg,
            k,
            maxw: max_part_size(n, k, imbalance),
            unit_part: vec![UNSET; units.len()],
            sizes: vec![0; k],
            units,
            gate_units,
            node_unit,
            qubit_nodes: (0..hg.num_qubits()).map(|q| hg.qubit_nodes(q).to_vec()).collect(),
            is_multi,
            best: 0,
        }
    }

    fn part(&self, v: usize) -> usize {
        self.unit_part[self.node_unit[v]]
    }

    /// Qubit whose multi-qubit nodes, all assigned, share one part.
    fn settled(&self, q: usize) -> bool {
        let mut home = None;
        for &v in &self.qubit_nodes[q] {
            if self.is_multi[v] {
                let p = self.part(v);
                if p == UNSET || home.is_some_and(|h| h != p) {
                    return false;
                }
                home = Some(p);
            }
        }
        home.is_some()
    }

    /// Cut points that reallocation can no longer remove: every change on a
    /// qubit without multi-qubit gates, or whose multi-qubit nodes already
    /// sit in more than one part.
    fn lower_bound(&self) -> usize {
        let mut lb = 0;
        for nodes in &self.qubit_nodes {
            let has_multi = nodes.iter().any(|&v| self.is_multi[v]);
            let mut homes = Vec::new();
            let mut prev = None;
            let mut changes = 0;
            for &v in nodes {
                let p = self.part(v);
                if p == UNSET {
                    continue;
                }
                if self.is_multi[v] && !homes.contains(&p) {
                    homes.push(p);
                }
                if prev.is_some_and(|x| x != p) {
                    changes += 1;
                }
                prev = Some(p);
            }
            if !has_multi || homes.len() > 1 {
                lb += changes;
            }
        }
        lb
    }

    fn run(&mut self, limit: usize) -> Option<usize> {
        self.best = limit + 1;
        self.dfs(0, 0);
        (self.best <= limit).then_some(self.best)
    }

    fn dfs(&mut self, i: usize, used: usize) {
        let remaining = self.units.len() - i;
        if remaining < self.k - used || self.lower_bound() >= self.best {
            return;
        }
        if i == self.gate_units {
            return self.singles(i, used);
        }
        for p in 0..=used.min(self.k - 1) {
            let w = self.units[i].len();
            if self.sizes[p] + w > self.maxw {
                continue;
            }
            self.unit_part[i] = p;
            self.sizes[p] += w;
            self.dfs(i + 1, used.max(p + 1));
            self.sizes[p] -= w;
            self.unit_part[i] = UNSET;
        }
    }

    /// Single-qubit nodes of settled qubits are reallocated home whatever
    /// their part, so they only matter for balance; the rest are searched.
    fn singles(&mut self, start: usize, used: usize) {
        let (mut free, mut bound) = (Vec::new(), Vec::new());
        for u in start..self.units.len() {
            let q = self.hg.nodes()[self.units[u][0]].qubit;
            if self.settled(q) {
                free.push(u);
            } else {
                bound.push(u);
            }
        }
        self.assign_bound(&bound, 0, &free, used);
    }

    fn assign_bound(&mut self, bound: &[usize], j: usize, free: &[usize], used: usize) {
        if bound.len() - j + free.len() < self.k - used || self.lower_bound() >= self.best {
            return;
        }
        if j == bound.len() {
            return self.leaf(free);
        }
        let u = bound[j];
        for p in 0..=used.min(self.k - 1) {
            if self.sizes[p] + 1 > self.maxw {
                continue;
            }
            self.unit_part[u] = p;
            self.sizes[p] += 1;
            self.assign_bound(bound, j + 1, free, used.max(p + 1));
            self.sizes[p] -= 1;
            self.unit_part[u] = UNSET;
        }
    }

    fn leaf(&mut self, free: &[usize]) {
        let need: usize = self.sizes.iter().filter(|&&s| s == 0).count();
        let room: usize = self.sizes.iter().map(|&s| self.maxw - s).sum();
        if free.len() < need || free.len() > room {
            return;
        }
        let parts = (0..self.hg.num_nodes()).map(|v| self.part(v)).map(|p| if p == UNSET { 0 } else { p }).collect();
        let a = PartitionAssignment::new(parts, self.k).unwrap();
        let moved = reallocate_assignment(self.c, self.hg, &a);
        // a partition that reallocation folds back into one part is the uncut circuit
        if moved.part_sizes().iter().filter(|&&s| s > 0).count() < 2 {
            return;
        }
        let cuts = count_cut_points(self.hg, &moved).unwrap();
        if cuts < self.best {
            self.best = cuts;
        }
    }
}
