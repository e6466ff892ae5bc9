//! Subcircuit extraction and variant enumeration.
//!
//! Each part of a gate-colocated assignment becomes one subcircuit. A
//! qubit's timeline is split into segments of consecutive nodes in the same
//! part; every segment is a local wire of its part's subcircuit, and every
//! boundary between segments is a cut point: the upstream wire is measured
//! in a Pauli basis, the downstream wire starts from a prepared state.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{emit_qasm, Circuit, CircuitError, GateKind};
use crate::hypergraph::TemporalHypergraph;
use crate::partitioner::{gate_violations, PartitionAssignment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("gate {gate} spans more than one part")]
    GateSpansParts { gate: usize },
    #[error("assignment covers {found} nodes, hypergraph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Measurement basis on the upstream side of a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    I,
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::I, Basis::X, Basis::Y, Basis::Z];

    pub fn symbol(self) -> char {
        match self {
            Basis::I => 'I',
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    /// I and Z are read off the same computational-basis measurement.
    pub fn physical(self) -> Basis {
        match self {
            Basis::I => Basis::Z,
            b => b,
        }
    }
}

/// Initial state on the downstream side of a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prep {
    Zero,
    One,
    Plus,
    IPlus,
}

impl Prep {
    pub const ALL: [Prep; 4] = [Prep::Zero, Prep::One, Prep::Plus, Prep::IPlus];

    pub fn symbol(self) -> char {
        match self {
            Prep::Zero => '0',
            Prep::One => '1',
            Prep::Plus => 'p',
            Prep::IPlus => 'i',
        }
    }
}

/// One basis per out-cut and one preparation per in-cut, in the
/// subcircuit's cut-list order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariantLabel {
    pub bases: Vec<Basis>,
    pub preps: Vec<Prep>,
}

impl VariantLabel {
    pub fn physical(&self) -> VariantLabel {
        VariantLabel { bases: self.bases.iter().map(|b| b.physical()).collect(), preps: self.preps.clone() }
    }

    pub fn is_physical(&self) -> bool {
        !self.bases.contains(&Basis::I)
    }

    /// Mixed-radix index, bases first; distinct labels of one shape get distinct indices.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for b in &self.bases {
            idx = idx.wrapping_mul(4).wrapping_add(*b as u64);
        }
        for p in &self.preps {
            idx = idx.wrapping_mul(4).wrapping_add(*p as u64);
        }
        idx
    }
}

impl fmt::Display for VariantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bases {
            write!(f, "{}", b.symbol())?;
        }
        f.write_str("-")?;
        for p in &self.preps {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEnd {
    pub subcircuit: usize,
    pub wire: usize,
    pub time: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPoint {
    pub id: usize,
    pub qubit: usize,
    /// Last use of the qubit before the cut.
    pub upstream: CutEnd,
    /// First use of the qubit after the cut.
    pub downstream: CutEnd,
}

/// A local wire: one segment of a global qubit's timeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub qubit: usize,
    pub in_cut: Option<usize>,
    pub out_cut: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subcircuit {
    pub id: usize,
    /// Gates over local wire indices, in original order.
    pub circuit: Circuit,
    pub wires: Vec<Wire>,
    /// Global gate indices, parallel to `circuit.gates()`.
    pub gate_indices: Vec<usize>,
    pub out_cuts: Vec<usize>,
    pub in_cuts: Vec<usize>,
}

impl Subcircuit {
    /// Number of local wires, cut wires included.
    pub fn width(&self) -> usize {
        self.wires.len()
    }

    /// Local wire to global qubit.
    pub fn qubit_map(&self) -> Vec<usize> {
        self.wires.iter().map(|w| w.qubit).collect()
    }

    pub fn distinct_qubits(&self) -> usize {
        let mut q = self.qubit_map();
        q.sort_unstable();
        q.dedup();
        q.len()
    }

    /// Global qubits whose final measurement this subcircuit owns, in wire order.
    pub fn output_qubits(&self) -> Vec<usize> {
        self.wires.iter().filter(|w| w.out_cut.is_none()).map(|w| w.qubit).collect()
    }

    /// Wires in measurement-bit order: output wires, then out-cut wires in cut-id order.
    pub fn measurement_layout(&self) -> Vec<usize> {
        let mut layout: Vec<usize> = (0..self.wires.len()).filter(|&w| self.wires[w].out_cut.is_none()).collect();
        for &cut in &self.out_cuts {
            layout.push(self.wires.iter().position(|w| w.out_cut == Some(cut)).expect("cut wire"));
        }
        layout
    }

    pub fn num_labels(&self) -> u64 {
        4u64.saturating_pow((self.out_cuts.len() + self.in_cuts.len()) as u32)
    }

    pub fn num_physical_variants(&self) -> u64 {
        3u64.saturating_pow(self.out_cuts.len() as u32).saturating_mul(4u64.saturating_pow(self.in_cuts.len() as u32))
    }

    /// Every label in mixed-radix order, bases before preparations.
    pub fn labels(&self) -> Vec<VariantLabel> {
        product(self.out_cuts.len(), &Basis::ALL)
            .into_iter()
            .flat_map(|bases| {
                product(self.in_cuts.len(), &Prep::ALL)
                    .into_iter()
                    .map(move |preps| VariantLabel { bases: bases.clone(), preps })
            })
            .collect()
    }

    pub fn physical_labels(&self) -> Vec<VariantLabel> {
        self.labels().into_iter().filter(VariantLabel::is_physical).collect()
    }

    /// Concrete circuit for a label: preparations prepended on in-cut wires,
    /// basis changes appended on out-cut wires, every wire measured.
    pub fn variant_circuit(&self, label: &VariantLabel) -> Circuit {
        assert_eq!(label.bases.len(), self.out_cuts.len(), "label does not match out-cuts");
        assert_eq!(label.preps.len(), self.in_cuts.len(), "label does not match in-cuts");
        let wire_of = |cut: usize, inbound: bool| {
            self.wires
                .iter()
                .position(|w| if inbound { w.in_cut == Some(cut) } else { w.out_cut == Some(cut) })
                .expect("cut wire")
        };
        let mut c = Circuit::new(format!("{}.var{}", self.circuit.name(), label), self.width());
        let add = |c: &mut Circuit, kind: GateKind, w: usize| {
            c.apply(kind, &[w], &[]).expect("valid local gate");
        };
        for (&cut, &prep) in self.in_cuts.iter().zip(&label.preps) {
            let w = wire_of(cut, true);
            match prep {
                Prep::Zero => {}
                Prep::One => add(&mut c, GateKind::X, w),
                Prep::Plus => add(&mut c, GateKind::H, w),
                Prep::IPlus => {
                    add(&mut c, GateKind::H, w);
                    add(&mut c, GateKind::S, w);
                }
            }
        }
        for g in self.circuit.gates() {
            c.push(g.clone()).expect("valid local gate");
        }
        for (&cut, &basis) in self.out_cuts.iter().zip(&label.bases) {
            let w = wire_of(cut, false);
            match basis {
                Basis::I | Basis::Z => {}
                Basis::X => add(&mut c, GateKind::H, w),
                Basis::Y => {
                    add(&mut c, GateKind::Sdg, w);
                    add(&mut c, GateKind::H, w);
                }
            }
        }
        c.set_measure_all(true);
        c
    }
}

fn product<T: Copy>(len: usize, alphabet: &[T]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubcircuitSet {
    pub name: String,
    pub num_qubits: usize,
    pub subcircuits: Vec<Subcircuit>,
    cuts: Vec<CutPoint>,
    assignment: PartitionAssignment,
    /// Qubits without gates; they belong to no subcircuit and read 0.
    pub idle_qubits: Vec<usize>,
}

impl SubcircuitSet {
    pub fn cuts(&self) -> &[CutPoint] {
        &self.cuts
    }

    /// The compacted assignment the set was extracted from.
    pub fn assignment(&self) -> &PartitionAssignment {
        &self.assignment
    }

    pub fn max_width(&self) -> usize {
        self.subcircuits.iter().map(Subcircuit::width).max().unwrap_or(0)
    }

    /// Writes one QASM file per physical variant, `{name}.part{p}.var{label}.qasm`.
    pub fn write_variants_qasm(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for s in &self.subcircuits {
            for label in s.physical_labels() {
                let path = dir.join(format!("{}.part{}.var{}.qasm", self.name, s.id, label));
                fs::write(&path, emit_qasm(&s.variant_circuit(&label)))?;
                paths.push(path);
            }
        }
        Ok(paths)
    }
}

/// Builds one subcircuit per part of `a`. Unused part ids are compacted away.
pub fn extract_subcircuits(
    c: &Circuit,
    hg: &TemporalHypergraph,
    a: &PartitionAssignment,
) -> Result<SubcircuitSet, CutError> {
    if hg.num_nodes() != a.num_nodes() {
        return Err(CutError::SizeMismatch { expected: hg.num_nodes(), found: a.num_nodes() });
    }
    if gate_violations(hg, a) > 0 {
        let gate = hg
            .gate_edges()
            .find(|e| e.nodes.iter().any(|&v| a.part(v) != a.part(e.nodes[0])))
            .and_then(|e| e.gate_index)
            .expect("violation exists");
        return Err(CutError::GateSpansParts { gate });
    }
    let a = a.compacted();
    let k = if a.num_nodes() == 0 { 0 } else { a.k() };

    let mut wires: Vec<Vec<Wire>> = vec![Vec::new(); k];
    let mut node_wire = vec![0usize; hg.num_nodes()];
    let mut cuts: Vec<CutPoint> = Vec::new();
    let mut idle_qubits = Vec::new();
    for q in 0..c.num_qubits() {
        let nodes = hg.qubit_nodes(q);
        if nodes.is_empty() {
            idle_qubits.push(q);
            continue;
        }
        let mut prev: Option<(usize, usize, usize)> = None; // (part, wire, time)
        for &v in nodes {
            let p = a.part(v);
            let time = hg.nodes()[v].time;
            match prev {
                Some((pp, w, _)) if pp == p => {
                    node_wire[v] = w;
                    prev = Some((p, w, time));
                }
                _ => {
                    let in_cut = prev.map(|(pp, pw, pt)| {
                        let id = cuts.len();
                        wires[pp][pw].out_cut = Some(id);
                        cuts.push(CutPoint {
                            id,
                            qubit: q,
                            upstream: CutEnd { subcircuit: pp, wire: pw, time: pt },
                            downstream: CutEnd { subcircuit: p, wire: wires[p].len(), time },
                        });
                        id
                    });
                    let w = wires[p].len();
                    wires[p].push(Wire { qubit: q, in_cut, out_cut: None });
                    node_wire[v] = w;
                    prev = Some((p, w, time));
                }
            }
        }
    }

    let mut circuits: Vec<Circuit> =
        (0..k).map(|p| Circuit::new(format!("{}.part{}", c.name(), p), wires[p].len())).collect();
    let mut gate_indices = vec![Vec::new(); k];
    for (gi, g) in c.gates().iter().enumerate() {
        let nodes = hg.gate_nodes(gi);
        let p = a.part(nodes[0]);
        let local: Vec<usize> = nodes.iter().map(|&v| node_wire[v]).collect();
        circuits[p].apply(g.kind, &local, &g.params)?;
        gate_indices[p].push(gi);
    }

    let subcircuits = circuits
        .into_iter()
        .zip(wires)
        .zip(gate_indices)
        .enumerate()
        .map(|(id, ((circuit, wires), gate_indices))| Subcircuit {
            id,
            out_cuts: cuts.iter().filter(|x| x.upstream.subcircuit == id).map(|x| x.id).collect(),
            in_cuts: cuts.iter().filter(|x| x.downstream.subcircuit == id).map(|x| x.id).collect(),
            circuit: crate::circuit::schedule_asap(&circuit),
            wires,
            gate_indices,
        })
        .collect();

    Ok(SubcircuitSet {
        name: c.name().to_string(),
        num_qubits: c.num_qubits(),
        subcircuits,
        cuts,
        assignment: a,
        idle_qubits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, GeneratorKind, GeneratorOptions};
    use crate::hypergraph::build_hypergraph;

    fn ghz(n: usize) -> Circuit {
        generate(GeneratorKind::Ghz, n, &GeneratorOptions::default()).unwrap()
    }

    fn split_ghz4() -> SubcircuitSet {
        let c = ghz(4);
        let hg = build_hypergraph(&c).unwrap();
        // cx(0,1) in part 0; cx(1,2), cx(2,3) in part 1
        let parts = hg.nodes().iter().map(|n| usize::from(n.time >= 2)).collect();
        extract_subcircuits(&c, &hg, &PartitionAssignment::new(parts, 2).unwrap()).unwrap()
    }

    #[test]
    fn single_part_is_identity() {
        let c = ghz(2);
        let hg = build_hypergraph(&c).unwrap();
        let set = extract_subcircuits(&c, &hg, &PartitionAssignment::single(hg.num_nodes())).unwrap();
        assert_eq!(set.subcircuits.len(), 1);
        assert!(set.cuts().is_empty());
        let s = &set.subcircuits[0];
        assert!(s.circuit.same_structure(&c));
        assert_eq!(s.qubit_map(), vec![0, 1]);
        assert_eq!(s.labels().len(), 1);
        assert_eq!(s.labels()[0].to_string(), "-");
    }

    #[test]
    fn ghz4_split_widths() {
        let set = split_ghz4();
        assert_eq!(set.cuts().len(), 1);
        let widths: Vec<usize> = set.subcircuits.iter().map(Subcircuit::width).collect();
        assert_eq!(widths, vec![2, 3]);
        let cut = &set.cuts()[0];
        assert_eq!(cut.qubit, 1);
        assert_eq!((cut.upstream.subcircuit, cut.upstream.time), (0, 1));
        assert_eq!((cut.downstream.subcircuit, cut.downstream.time), (1, 2));
        assert_eq!(set.subcircuits[0].out_cuts, vec![0]);
        assert_eq!(set.subcircuits[1].in_cuts, vec![0]);
        assert_eq!(set.subcircuits[0].output_qubits(), vec![0]);
        assert_eq!(set.subcircuits[1].output_qubits(), vec![1, 2, 3]);
        assert_eq!(set.subcircuits[0].measurement_layout(), vec![0, 1]);
    }

    #[test]
    fn variant_counts() {
        let set = split_ghz4();
        let up = &set.subcircuits[0];
        assert_eq!((up.labels().len(), up.physical_labels().len()), (4, 3));
        assert_eq!(up.num_physical_variants(), 3);
        let mut both = up.clone();
        both.in_cuts = vec![7];
        both.wires[0].in_cut = Some(7);
        assert_eq!((both.labels().len(), both.physical_labels().len()), (16, 12));
    }

    #[test]
    fn variant_circuits() {
        let set = split_ghz4();
        let up = &set.subcircuits[0];
        let y = VariantLabel { bases: vec![Basis::Y], preps: vec![] };
        let kinds: Vec<GateKind> = up.variant_circuit(&y).gates().iter().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::H, GateKind::Cx, GateKind::Sdg, GateKind::H]);
        let i = VariantLabel { bases: vec![Basis::I], preps: vec![] };
        let z = VariantLabel { bases: vec![Basis::Z], preps: vec![] };
        assert!(up.variant_circuit(&i).same_structure(&up.variant_circuit(&z)));

        let down = &set.subcircuits[1];
        let ip = VariantLabel { bases: vec![], preps: vec![Prep::IPlus] };
        let c = down.variant_circuit(&ip);
        assert_eq!(c.gates()[0].kind, GateKind::H);
        assert_eq!(c.gates()[1].kind, GateKind::S);
        assert_eq!(c.gates()[1].operands, vec![0]);
        assert!(c.measure_all());
        assert_eq!(ip.to_string(), "-i");
    }

    #[test]
    fn gates_conserved() {
        let c = generate(GeneratorKind::Qft, 5, &GeneratorOptions::default()).unwrap();
        let hg = build_hypergraph(&c).unwrap();
        let parts = hg
            .nodes()
            .iter()
            .map(|n| {
                let gi = hg.node_gate(hg.node_id(*n).unwrap());
                usize::from(gi >= c.gates().len() / 2)
            })
            .collect();
        let set = extract_subcircuits(&c, &hg, &PartitionAssignment::new(parts, 2).unwrap()).unwrap();
        let mut seen: Vec<usize> = set.subcircuits.iter().flat_map(|s| s.gate_indices.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..c.gates().len()).collect::<Vec<_>>());
        for cut in set.cuts() {
            assert!(cut.upstream.time < cut.downstream.time);
            assert_ne!(cut.upstream.subcircuit, cut.downstream.subcircuit);
        }
    }

    #[test]
    fn reentering_qubit_gets_new_wire() {
        // q0 goes part 0 -> part 1 -> part 0
        let mut c = Circuit::new("re", 3);
        c.apply(GateKind::Cx, &[0, 1], &[]).unwrap();
        c.apply(GateKind::Cx, &[0, 2], &[]).unwrap();
        c.apply(GateKind::Cx, &[0, 1], &[]).unwrap();
        let c = crate::circuit::schedule_asap(&c);
        let hg = build_hypergraph(&c).unwrap();
        let parts = hg.nodes().iter().map(|n| usize::from(n.qubit == 2 || (n.qubit == 0 && n.time == 1))).collect();
        let set = extract_subcircuits(&c, &hg, &PartitionAssignment::new(parts, 2).unwrap()).unwrap();
        assert_eq!(set.cuts().len(), 2);
        assert_eq!(set.subcircuits[0].qubit_map(), vec![0, 0, 1]);
        assert_eq!(set.subcircuits[0].distinct_qubits(), 2);
        assert_eq!(set.subcircuits[1].qubit_map(), vec![0, 2]);
    }

    #[test]
    fn spanning_gate_rejected() {
        let c = ghz(3);
        let hg = build_hypergraph(&c).unwrap();
        let parts = hg.nodes().iter().map(|n| usize::from(n.qubit >= 1)).collect();
        let err = extract_subcircuits(&c, &hg, &PartitionAssignment::new(parts, 2).unwrap()).unwrap_err();
        assert_eq!(err, CutError::GateSpansParts { gate: 1 });
    }

    #[test]
    fn idle_qubits_listed() {
        let mut c = Circuit::new("idle", 3);
        c.apply(GateKind::H, &[1], &[]).unwrap();
        let c = crate::circuit::schedule_asap(&c);
        let hg = build_hypergraph(&c).unwrap();
        let set = extract_subcircuits(&c, &hg, &PartitionAssignment::single(hg.num_nodes())).unwrap();
        assert_eq!(set.idle_qubits, vec![0, 2]);
        assert_eq!(set.subcircuits[0].qubit_map(), vec![1]);
    }

    #[test]
    fn qasm_export_names() {
        let set = split_ghz4();
        let dir = tempfile::tempdir().unwrap();
        let paths = set.write_variants_qasm(dir.path()).unwrap();
        let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names.len(), 3 + 4);
        assert!(names.contains(&"ghz4.part0.varX-.qasm".to_string()));
        assert!(names.contains(&"ghz4.part1.var-i.qasm".to_string()));
    }
}
