//! The K-sweep: evaluate every part count in `2..=min(n/2, k_cap)` and keep
//! the partition with the fewest cut points.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    gate_violations, max_part_size, partition_k_with, reallocate_shared_qubits, repair_gate_colocation,
    PartitionAssignment, PartitionError, PartitionParams, DEFAULT_IMBALANCE,
};
use crate::circuit::{schedule_asap, Circuit};
use crate::cutter::extract_subcircuits;
use crate::hypergraph::{build_hypergraph, clique_expand, TemporalHypergraph};
use crate::mix_seed;

/// Perturbations tried by [`polish_reallocated`] after its first climb.
const KICKS: usize = 48;
/// Caps `kicks * moves per climb pass`.
const KICK_BUDGET: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub k_cap: usize,
    pub seed: u64,
    pub imbalance: f64,
    /// Independently seeded partitioning runs per part count.
    pub attempts: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams { k_cap: 8, seed: 0, imbalance: DEFAULT_IMBALANCE, attempts: 4 }
    }
}

/// One evaluated partition: the final (repaired, refined, reallocated and
/// compacted) assignment and its cut points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCandidate {
    /// Requested part count; 1 for the unpartitioned passthrough.
    pub k: usize,
    pub assignment: PartitionAssignment,
    pub cut_points: usize,
    /// Gate hyperedges split by the raw graph partition, before repair.
    pub gate_violations: usize,
    /// Balance and non-emptiness held before reallocation.
    pub balanced: bool,
    /// Balanced, and still at least two parts after reallocation.
    pub valid: bool,
    pub max_width: usize,
    pub attempt: usize,
}

impl PartitionCandidate {
    fn passthrough(c: &Circuit, hg: &TemporalHypergraph) -> Result<PartitionCandidate, PartitionError> {
        let assignment = PartitionAssignment::single(hg.num_nodes());
        let subs = extract_subcircuits(c, hg, &assignment)?;
        Ok(PartitionCandidate {
            k: 1,
            assignment,
            cut_points: 0,
            gate_violations: 0,
            balanced: true,
            valid: true,
            max_width: subs.max_width(),
            attempt: 0,
        })
    }

    fn rank(&self) -> (bool, usize, usize, usize, usize) {
        (!self.valid, self.cut_points, self.k, self.max_width, self.attempt)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KEvaluation {
    pub k: usize,
    /// Fewest cut points over this k's valid attempts.
    pub best_cut_points: Option<usize>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub candidate: PartitionCandidate,
    pub evaluations: Vec<KEvaluation>,
    pub elapsed: Duration,
}

/// Runs the sweep with default parameters apart from `k_cap` and `seed`.
pub fn sweep_k(c: &Circuit, k_cap: usize, seed: u64) -> Result<PartitionCandidate, PartitionError> {
    let params = SweepParams { k_cap, seed, ..SweepParams::default() };
    Ok(sweep_k_with(c, &params)?.candidate)
}

pub fn sweep_k_with(c: &Circuit, params: &SweepParams) -> Result<SweepOutcome, PartitionError> {
    let start = Instant::now();
    let c = if c.is_scheduled() { c.clone() } else { schedule_asap(c) };
    let hg = build_hypergraph(&c)?;
    let graph = clique_expand(&hg);
    let k_max = (c.num_qubits() / 2).min(params.k_cap).min(hg.num_nodes());
    let ks: Vec<usize> = (2..=k_max).collect();
    let pparams = PartitionParams { imbalance: params.imbalance, ..PartitionParams::default() };

    let per_k: Vec<(Vec<PartitionCandidate>, Duration)> = ks
        .par_iter()
        .map(|&k| {
            let t0 = Instant::now();
            let found = (0..params.attempts.max(1))
                .map(|attempt| {
                    let seed = mix_seed(&[params.seed, k as u64, attempt as u64]);
                    evaluate(&c, &hg, &graph, k, seed, attempt, params.imbalance, &pparams)
                })
                .collect::<Result<Vec<_>, _>>();
            found.map(|v| (v, t0.elapsed()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut best = PartitionCandidate::passthrough(&c, &hg)?;
    let mut have_partition = false;
    let mut evaluations = Vec::new();
    for (&k, (cands, elapsed)) in ks.iter().zip(per_k) {
        evaluations.push(KEvaluation {
            k,
            best_cut_points: cands.iter().filter(|c| c.valid).map(|c| c.cut_points).min(),
            elapsed,
        });
        for cand in cands {
            if !have_partition || cand.rank() < best.rank() {
                best = cand;
                have_partition = true;
            }
        }
    }
    Ok(SweepOutcome { candidate: best, evaluations, elapsed: start.elapsed() })
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    c: &Circuit,
    hg: &TemporalHypergraph,
    graph: &crate::hypergraph::WeightedGraph,
    k: usize,
    seed: u64,
    attempt: usize,
    imbalance: f64,
    pparams: &PartitionParams,
) -> Result<PartitionCandidate, PartitionError> {
    let raw = partition_k_with(graph, k, seed, pparams)?;
    let violations = gate_violations(hg, &raw);
    let repaired = repair_gate_colocation(hg, &raw);
    let refined = polish_reallocated(hg, &refine_colocated(hg, &repaired, imbalance), imbalance, seed);
    let balanced = refined.is_balanced(imbalance) && refined.all_nonempty();
    let subs = extract_subcircuits(c, hg, &refined.compacted())?;
    let subs = reallocate_shared_qubits(c, hg, &subs)?;
    // reallocation can pull everything back into one part; that is the uncut circuit
    let split = subs.subcircuits.len() >= 2;
    Ok(PartitionCandidate {
        k,
        assignment: subs.assignment().clone(),
        cut_points: subs.cuts().len(),
        gate_violations: violations,
        balanced,
        valid: balanced && split,
        max_width: subs.max_width(),
        attempt,
    })
}

/// Gate-atomic improvement of a colocated assignment. Each gate's nodes
/// move together; single-qubit nodes move alone. Empty parts are filled,
/// overfull parts drained, then positive-gain moves (gain counted in
/// temporal edges) are applied while balance holds.
pub fn refine_colocated(hg: &TemporalHypergraph, a: &PartitionAssignment, imbalance: f64) -> PartitionAssignment {
    let n = hg.num_nodes();
    let k = a.k();
    if n == 0 || k < 2 {
        return a.clone();
    }
    let maxw = max_part_size(n, k, imbalance);

    let mut unit_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for e in hg.gate_edges() {
        let u = members.len();
        for &v in &e.nodes {
            unit_of[v] = u;
        }
        members.push(e.nodes.clone());
    }
    for (v, unit) in unit_of.iter_mut().enumerate() {
        if *unit == usize::MAX {
            *unit = members.len();
            members.push(vec![v]);
        }
    }
    let units = members.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); units];
    for e in hg.temporal_edges() {
        let (x, y) = (unit_of[e.nodes[0]], unit_of[e.nodes[1]]);
        if x != y {
            adj[x].push(y);
            adj[y].push(x);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    let size: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut part: Vec<usize> = members.iter().map(|m| a.part(m[0])).collect();
    let mut pw = vec![0usize; k];
    for u in 0..units {
        pw[part[u]] += size[u];
    }

    let mut conn = vec![0i64; k];
    let connectivity = |u: usize, part: &[usize], conn: &mut [i64]| {
        conn.iter_mut().for_each(|c| *c = 0);
        for &x in &adj[u] {
            conn[part[x]] += 1;
        }
    };

    // fill empty parts
    for empty in 0..k {
        if pw[empty] > 0 {
            continue;
        }
        let mut best: Option<(usize, i64)> = None;
        for u in 0..units {
            let from = part[u];
            if pw[from] <= size[u] || size[u] > maxw {
                continue;
            }
            connectivity(u, &part, &mut conn);
            let gain = conn[empty] - conn[from];
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((u, gain));
            }
        }
        if let Some((u, _)) = best {
            pw[part[u]] -= size[u];
            pw[empty] += size[u];
            part[u] = empty;
        }
    }

    // drain overfull parts
    while let Some(heavy) = (0..k).filter(|&p| pw[p] > maxw).max_by_key(|&p| (pw[p], std::cmp::Reverse(p))) {
        let mut best: Option<(usize, usize, i64)> = None;
        for u in (0..units).filter(|&u| part[u] == heavy && pw[heavy] > size[u]) {
            connectivity(u, &part, &mut conn);
            for to in 0..k {
                if to == heavy || pw[to] + size[u] > maxw {
                    continue;
                }
                let gain = conn[to] - conn[heavy];
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((u, to, gain));
                }
            }
        }
        let Some((u, to, _)) = best else { break };
        pw[heavy] -= size[u];
        pw[to] += size[u];
        part[u] = to;
    }

    // positive-gain moves
    for _ in 0..32 {
        let mut moved = false;
        for u in 0..units {
            let from = part[u];
            if pw[from] <= size[u] {
                continue;
            }
            connectivity(u, &part, &mut conn);
            let mut best: Option<(usize, i64)> = None;
            for to in 0..k {
                if to == from || conn[to] == 0 || pw[to] + size[u] > maxw {
                    continue;
                }
                let gain = conn[to] - conn[from];
                if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                    best = Some((to, gain));
                }
            }
            if let Some((to, _)) = best {
                pw[from] -= size[u];
                pw[to] += size[u];
                part[u] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let mut out = a.clone();
    for (u, m) in members.iter().enumerate() {
        for &v in m {
            out.set(v, part[u]);
        }
    }
    out
}

/// Hill climbing on the cut count that survives reallocation. A qubit whose
/// multi-qubit nodes share one part costs nothing whatever its single-qubit
/// nodes do, so those nodes are used as ballast: after each trial move they
/// are shifted out of overfull parts and into empty ones. A move is kept when
/// it lowers (cuts after reallocation, raw cuts). Seeded random kicks then
/// restart the climb from nearby assignments.
pub fn polish_reallocated(
    hg: &TemporalHypergraph,
    a: &PartitionAssignment,
    imbalance: f64,
    seed: u64,
) -> PartitionAssignment {
    let n = hg.num_nodes();
    let k = a.k();
    if n == 0 || k < 2 {
        return a.clone();
    }
    let maxw = max_part_size(n, k, imbalance);
    let mut multi = vec![false; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for e in hg.gate_edges() {
        for &v in &e.nodes {
            multi[v] = true;
        }
        members.push(e.nodes.clone());
    }
    members.extend((0..n).filter(|&v| !multi[v]).map(|v| vec![v]));
    let qubit_nodes: Vec<&[usize]> = (0..hg.num_qubits()).map(|q| hg.qubit_nodes(q)).collect();
    // whole-qubit moves: the qubit's nodes plus every gate it takes part in
    for nodes in &qubit_nodes {
        let mut group: Vec<usize> = nodes.to_vec();
        for &v in nodes.iter() {
            if multi[v] {
                group.extend(hg.gate_nodes(hg.node_gate(v)).iter().copied());
            }
        }
        group.sort_unstable();
        group.dedup();
        if group.len() > 1 {
            members.push(group);
        }
    }

    let settled = |part: &[usize], q: usize| {
        let mut home = None;
        for &v in qubit_nodes[q].iter().filter(|&&v| multi[v]) {
            match home {
                None => home = Some(part[v]),
                Some(h) if h != part[v] => return false,
                _ => {}
            }
        }
        home.is_some()
    };
    let score = |part: &[usize]| {
        let (mut kept, mut raw) = (0usize, 0usize);
        for (q, nodes) in qubit_nodes.iter().enumerate() {
            let changes = nodes.windows(2).filter(|w| part[w[0]] != part[w[1]]).count();
            raw += changes;
            if changes > 0 && !settled(part, q) {
                kept += changes;
            }
        }
        (kept, raw)
    };
    // parts that still hold a node once settled qubits are pulled home
    let survivors = |part: &[usize]| {
        let mut alive = vec![false; k];
        for (q, nodes) in qubit_nodes.iter().enumerate() {
            if settled(part, q) {
                let home = nodes.iter().find(|&&v| multi[v]).expect("settled qubit has a gate");
                alive[part[*home]] = true;
            } else {
                nodes.iter().for_each(|&v| alive[part[v]] = true);
            }
        }
        alive.iter().filter(|&&x| x).count()
    };
    // moves ballast nodes until every part is within [1, maxw]; false if stuck
    let rebalance = |part: &mut [usize], sizes: &mut [usize]| {
        let ballast: Vec<usize> = (0..n).filter(|&v| !multi[v] && settled(part, hg.nodes()[v].qubit)).collect();
        for &v in &ballast {
            let from = part[v];
            let to = if sizes[from] > maxw || sizes[from] > 1 && sizes.contains(&0) {
                (0..k).filter(|&p| p != from && sizes[p] < maxw).min_by_key(|&p| sizes[p])
            } else {
                None
            };
            if let Some(to) = to {
                sizes[from] -= 1;
                sizes[to] += 1;
                part[v] = to;
            }
        }
        sizes.iter().all(|&s| s >= 1 && s <= maxw)
    };

    let mut part: Vec<usize> = a.parts().to_vec();
    let mut sizes = a.part_sizes();
    if !(sizes.iter().all(|&s| s >= 1 && s <= maxw)) {
        return a.clone();
    }
    // (kept, raw) cut contribution of one qubit
    let qubit_cost = |part: &[usize], q: usize| {
        let changes = qubit_nodes[q].windows(2).filter(|w| part[w[0]] != part[w[1]]).count();
        let kept = if changes > 0 && !settled(part, q) { changes } else { 0 };
        (kept, changes)
    };
    let touched: Vec<Vec<usize>> = members
        .iter()
        .map(|m| {
            let mut qs: Vec<usize> = m.iter().map(|&v| hg.nodes()[v].qubit).collect();
            qs.sort_unstable();
            qs.dedup();
            qs
        })
        .collect();
    let local = |part: &[usize], qs: &[usize]| {
        qs.iter().map(|&q| qubit_cost(part, q)).fold((0, 0), |(a, b), (x, y)| (a + x, b + y))
    };
    let climb = |part: &mut Vec<usize>, sizes: &mut Vec<usize>| {
        let mut current = score(part);
        for _ in 0..16 {
            let mut improved = false;
            for (m, qs) in members.iter().zip(&touched) {
                let before = local(part, qs);
                let old: Vec<usize> = m.iter().map(|&v| part[v]).collect();
                for to in 0..k {
                    if old.iter().all(|&p| p == to) {
                        continue;
                    }
                    m.iter().for_each(|&v| part[v] = to);
                    let after = local(part, qs);
                    m.iter().zip(&old).for_each(|(&v, &p)| part[v] = p);
                    if after >= before {
                        continue;
                    }
                    let mut trial = part.clone();
                    let mut trial_sizes = sizes.clone();
                    for &v in m {
                        trial_sizes[trial[v]] -= 1;
                        trial_sizes[to] += 1;
                        trial[v] = to;
                    }
                    if !rebalance(&mut trial, &mut trial_sizes) || survivors(&trial) < 2 {
                        continue;
                    }
                    let s = score(&trial);
                    if s < current {
                        *part = trial;
                        *sizes = trial_sizes;
                        current = s;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        current
    };

    let mut best = climb(&mut part, &mut sizes);
    // random kicks out of local minima, each followed by another climb
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // fewer kicks on large circuits keeps the sweep interactive
    let kicks = (KICK_BUDGET / members.len().max(1)).min(KICKS);
    for _ in 0..kicks {
        let mut trial = part.clone();
        let mut trial_sizes = sizes.clone();
        let m = &members[rng.gen_range(0..members.len())];
        let to = rng.gen_range(0..k);
        for &v in m {
            trial_sizes[trial[v]] -= 1;
            trial_sizes[to] += 1;
            trial[v] = to;
        }
        if !rebalance(&mut trial, &mut trial_sizes) || survivors(&trial) < 2 {
            continue;
        }
        let s = climb(&mut trial, &mut trial_sizes);
        if s < best {
            best = s;
            part = trial;
            sizes = trial_sizes;
        }
    }
    PartitionAssignment::new(part, k).expect("parts stay in range")
}
