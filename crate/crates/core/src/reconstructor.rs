//! Recombination of subcircuit variant distributions.
//!
//! Each cut wire carries the identity channel, written as
//! `rho = 1/2 * sum_O Tr(O rho) O` over `O` in {I, X, Y, Z}. The upstream
//! side supplies `Tr(O rho)` through signed measurement outcomes, the
//! downstream side rebuilds `O` from the four prepared states.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cutter::{Basis, Prep, Subcircuit, SubcircuitSet, VariantLabel};
use crate::executor::{Distribution, VariantResult};

/// Normalization slack for exact inputs.
pub const EXACT_TOLERANCE: f64 = 1e-6;
/// Normalization slack for shot-sampled inputs.
pub const SAMPLED_TOLERANCE: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("missing variant {label} of subcircuit {subcircuit}")]
    MissingVariant { subcircuit: usize, label: String },
    #[error("reconstructed total {total} is outside 1 +/- {tolerance}")]
    Normalization { total: f64, tolerance: f64 },
    #[error("qubit {qubit} has its final measurement in {owners} subcircuits")]
    Ownership { qubit: usize, owners: usize },
    #[error("naive reconstruction limited to {max} cuts, got {cuts}")]
    TooManyCuts { cuts: usize, max: usize },
}

/// Weight of upstream outcome `m` when estimating `Tr(O rho)`.
pub fn upstream_weight(basis: Basis, m: u64) -> f64 {
    match basis {
        Basis::I => 1.0,
        _ if m == 0 => 1.0,
        _ => -1.0,
    }
}

/// Preparations and weights whose combination equals `O` on the downstream side.
pub fn downstream_weights(basis: Basis) -> &'static [(Prep, f64)] {
    match basis {
        Basis::I => &[(Prep::Zero, 1.0), (Prep::One, 1.0)],
        Basis::Z => &[(Prep::Zero, 1.0), (Prep::One, -1.0)],
        Basis::X => &[(Prep::Plus, 2.0), (Prep::Zero, -1.0), (Prep::One, -1.0)],
        Basis::Y => &[(Prep::IPlus, 2.0), (Prep::Zero, -1.0), (Prep::One, -1.0)],
    }
}

/// Maps local outcomes onto a global bitstring. `parts` pairs each
/// subcircuit's output qubits with its output bits; every qubit outside
/// `idle` must be claimed exactly once.
pub fn assemble_bitstring(
    num_qubits: usize,
    idle: &[usize],
    parts: &[(&[usize], u64)],
) -> Result<u64, ReconstructError> {
    let mut owners = vec![0usize; num_qubits];
    let mut x = 0u64;
    for (qubits, bits) in parts {
        for (j, &q) in qubits.iter().enumerate() {
            owners[q] += 1;
            x |= ((bits >> j) & 1) << q;
        }
    }
    check_owners(&owners, idle)?;
    Ok(x)
}

fn check_owners(owners: &[usize], idle: &[usize]) -> Result<(), ReconstructError> {
    for (qubit, &n) in owners.iter().enumerate() {
        let expected = usize::from(!idle.contains(&qubit));
        if n != expected {
            return Err(ReconstructError::Ownership { qubit, owners: n });
        }
    }
    Ok(())
}

/// Per-subcircuit tensor: for each basis assignment over the subcircuit's
/// cuts (ascending cut id), the signed weights of its global output bits.
struct CutTensor {
    cuts: Vec<usize>,
    entries: BTreeMap<Vec<Basis>, Vec<(u64, f64)>>,
}

type Lookup<'a> = BTreeMap<(usize, &'a VariantLabel), &'a Distribution>;

fn tensor(s: &Subcircuit, lookup: &Lookup<'_>) -> Result<CutTensor, ReconstructError> {
    let mut cuts: Vec<usize> = s.out_cuts.iter().chain(&s.in_cuts).copied().collect();
    cuts.sort_unstable();
    let outputs = s.output_qubits();
    let n_out = outputs.len();
    let n_cuts = cuts.len();

    let mut entries = BTreeMap::new();
    for code in 0..4usize.pow(n_cuts as u32) {
        let bases: Vec<Basis> = (0..n_cuts).map(|i| Basis::ALL[(code >> (2 * (n_cuts - 1 - i))) & 3]).collect();
        let basis_of = |cut: usize| bases[cuts.binary_search(&cut).expect("own cut")];
        let out_bases: Vec<Basis> = s.out_cuts.iter().map(|&c| basis_of(c)).collect();
        let in_bases: Vec<Basis> = s.in_cuts.iter().map(|&c| basis_of(c)).collect();

        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        let mut preps = vec![Prep::Zero; in_bases.len()];
        add_prep_terms(s, lookup, &out_bases, &in_bases, &mut preps, 0, 1.0, n_out, &outputs, &mut acc)?;
        entries.insert(bases, acc.into_iter().filter(|&(_, w)| w != 0.0).collect());
    }
    Ok(CutTensor { cuts, entries })
}

#[allow(clippy::too_many_arguments)]
fn add_prep_terms(
    s: &Subcircuit,
    lookup: &Lookup<'_>,
    out_bases: &[Basis],
    in_bases: &[Basis],
    preps: &mut Vec<Prep>,
    depth: usize,
    weight: f64,
    n_out: usize,
    outputs: &[usize],
    acc: &mut BTreeMap<u64, f64>,
) -> Result<(), ReconstructError> {
    if depth < in_bases.len() {
        for &(prep, w) in downstream_weights(in_bases[depth]) {
            preps[depth] = prep;
            add_prep_terms(s, lookup, out_bases, in_bases, preps, depth + 1, weight * w, n_out, outputs, acc)?;
        }
        return Ok(());
    }
    let label = VariantLabel { bases: out_bases.iter().map(|b| b.physical()).collect(), preps: preps.clone() };
    let dist = lookup
        .get(&(s.id, &label))
        .ok_or_else(|| ReconstructError::MissingVariant { subcircuit: s.id, label: label.to_string() })?;
    for (y, p) in dist.iter() {
        let mut sign = 1.0;
        for (i, &b) in out_bases.iter().enumerate() {
            sign *= upstream_weight(b, (y >> (n_out + i)) & 1);
        }
        let mut x = 0u64;
        for (j, &q) in outputs.iter().enumerate() {
            x |= ((y >> j) & 1) << q;
        }
        *acc.entry(x).or_insert(0.0) += weight * sign * p;
    }
    Ok(())
}

fn prepare<'a>(set: &SubcircuitSet, results: &'a [VariantResult]) -> Result<Vec<CutTensor>, ReconstructError> {
    let mut owners = vec![0usize; set.num_qubits];
    for s in &set.subcircuits {
        for q in s.output_qubits() {
            owners[q] += 1;
        }
    }
    check_owners(&owners, &set.idle_qubits)?;
    let lookup: Lookup<'a> = results.iter().map(|r| ((r.subcircuit, &r.label), &r.dist)).collect();
    set.subcircuits.iter().map(|s| tensor(s, &lookup)).collect()
}

/// Unclipped quasi-distribution, contracting one subcircuit at a time and
/// summing each cut index as soon as both of its ends are absorbed.
pub fn reconstruct_raw(set: &SubcircuitSet, results: &[VariantResult]) -> Result<BTreeMap<u64, f64>, ReconstructError> {
    let tensors = prepare(set, results)?;
    let mut open: Vec<usize> = Vec::new();
    let mut acc: BTreeMap<(u64, Vec<Basis>), f64> = BTreeMap::from([((0, Vec::new()), 1.0)]);
    for t in &tensors {
        let mut next_open: Vec<usize> = open.iter().chain(&t.cuts).copied().collect();
        next_open.sort_unstable();
        let closing: Vec<usize> = next_open.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
        next_open.retain(|c| !closing.contains(c));
        let factor = 0.5f64.powi(closing.len() as i32);

        let mut next: BTreeMap<(u64, Vec<Basis>), f64> = BTreeMap::new();
        for ((bits, open_bases), &v) in &acc {
            'terms: for (t_bases, items) in &t.entries {
                for &c in &closing {
                    let a = open_bases[open.binary_search(&c).expect("open cut")];
                    let b = t_bases[t.cuts.binary_search(&c).expect("own cut")];
                    if a != b {
                        continue 'terms;
                    }
                }
                let key: Vec<Basis> = next_open
                    .iter()
                    .map(|c| match open.binary_search(c) {
                        Ok(i) => open_bases[i],
                        Err(_) => t_bases[t.cuts.binary_search(c).expect("own cut")],
                    })
                    .collect();
                for &(x, w) in items {
                    *next.entry((bits | x, key.clone())).or_insert(0.0) += v * w * factor;
                }
            }
        }
        acc = next;
        open = next_open;
    }
    let mut out = BTreeMap::new();
    for ((bits, rest), v) in acc {
        debug_assert!(rest.is_empty());
        *out.entry(bits).or_insert(0.0) += v;
    }
    Ok(out)
}

/// The literal `(1/2)^C * sum over all 4^C basis assignments` of the
/// product of subcircuit terms. Exponential in C; meant for cross-checks.
pub fn reconstruct_naive_raw(
    set: &SubcircuitSet,
    results: &[VariantResult],
) -> Result<BTreeMap<u64, f64>, ReconstructError> {
    const MAX: usize = 10;
    let c = set.cuts().len();
    if c > MAX {
        return Err(ReconstructError::TooManyCuts { cuts: c, max: MAX });
    }
    let tensors = prepare(set, results)?;
    let scale = 0.5f64.powi(c as i32);
    let mut out: BTreeMap<u64, f64> = BTreeMap::new();
    for code in 0..4usize.pow(c as u32) {
        let global: Vec<Basis> = (0..c).map(|i| Basis::ALL[(code >> (2 * i)) & 3]).collect();
        let mut terms: Vec<(u64, f64)> = vec![(0, scale)];
        for t in &tensors {
            let key: Vec<Basis> = t.cuts.iter().map(|&cut| global[cut]).collect();
            let items = &t.entries[&key];
            terms = terms.iter().flat_map(|&(bits, v)| items.iter().map(move |&(x, w)| (bits | x, v * w))).collect();
        }
        for (bits, v) in terms {
            *out.entry(bits).or_insert(0.0) += v;
        }
    }
    Ok(out)
}

/// Clips negative entries and renormalizes when the clipped total is within
/// `tolerance` of 1.
pub fn finalize(bits: usize, raw: &BTreeMap<u64, f64>, tolerance: f64) -> Result<Distribution, ReconstructError> {
    let total: f64 = raw.values().filter(|&&p| p > 0.0).sum();
    if !((1.0 - tolerance)..=(1.0 + tolerance)).contains(&total) {
        return Err(ReconstructError::Normalization { total, tolerance });
    }
    let mut d = Distribution::new(bits);
    for (&x, &p) in raw {
        if p > 0.0 {
            d.add(x, p / total);
        }
    }
    Ok(d)
}

/// Full output distribution over the original circuit's qubits.
pub fn reconstruct(
    set: &SubcircuitSet,
    results: &[VariantResult],
    tolerance: f64,
) -> Result<Distribution, ReconstructError> {
    finalize(set.num_qubits, &reconstruct_raw(set, results)?, tolerance)
}

pub fn reconstruct_naive(
    set: &SubcircuitSet,
    results: &[VariantResult],
    tolerance: f64,
) -> Result<Distribution, ReconstructError> {
    finalize(set.num_qubits, &reconstruct_naive_raw(set, results)?, tolerance)
}
