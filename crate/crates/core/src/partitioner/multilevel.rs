//! Multilevel k-way partitioning: heavy-edge matching coarsening, greedy
//! graph-growing initial partition, and boundary refinement projected back
//! through every level.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{max_part_size, PartitionAssignment, PartitionError, DEFAULT_IMBALANCE};
use crate::hypergraph::WeightedGraph;

const UNASSIGNED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionParams {
    /// Allowed overshoot of the ideal part size, as a fraction.
    pub imbalance: f64,
    /// Independent graph-growing starts tried on the coarsest graph.
    pub initial_tries: usize,
    /// Upper bound on refinement passes per level.
    pub refine_passes: usize,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams { imbalance: DEFAULT_IMBALANCE, initial_tries: 4, refine_passes: 16 }
    }
}

/// Compressed adjacency with integer edge and vertex weights.
#[derive(Clone, Debug)]
struct Csr {
    xadj: Vec<usize>,
    adj: Vec<usize>,
    ew: Vec<i64>,
    vw: Vec<i64>,
}

impl Csr {
    fn from_graph(g: &WeightedGraph) -> Csr {
        let n = g.num_nodes();
        let mut lists: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &g.edges {
            let w = w.round() as i64;
            lists[u].push((v, w));
            lists[v].push((u, w));
        }
        Csr::from_lists(lists, vec![1; n])
    }

    fn from_lists(mut lists: Vec<Vec<(usize, i64)>>, vw: Vec<i64>) -> Csr {
        let mut xadj = Vec::with_capacity(lists.len() + 1);
        let mut adj = Vec::new();
        let mut ew = Vec::new();
        xadj.push(0);
        for l in &mut lists {
            l.sort_unstable();
            for &(v, w) in l.iter() {
                adj.push(v);
                ew.push(w);
            }
            xadj.push(adj.len());
        }
        Csr { xadj, adj, ew, vw }
    }

    fn n(&self) -> usize {
        self.vw.len()
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        (self.xadj[v]..self.xadj[v + 1]).map(move |i| (self.adj[i], self.ew[i]))
    }

    fn total_weight(&self) -> i64 {
        self.vw.iter().sum()
    }
}

fn edge_cut(g: &Csr, part: &[usize]) -> i64 {
    let mut cut = 0;
    for v in 0..g.n() {
        for (u, w) in g.neighbors(v) {
            if u > v && part[u] != part[v] {
                cut += w;
            }
        }
    }
    cut
}

fn part_weights(g: &Csr, part: &[usize], k: usize) -> Vec<i64> {
    let mut pw = vec![0; k];
    for v in 0..g.n() {
        pw[part[v]] += g.vw[v];
    }
    pw
}

/// Heavy-edge matching in a seeded random visiting order. Returns the
/// coarse graph and the fine-to-coarse map.
fn coarsen(g: &Csr, rng: &mut ChaCha8Rng, max_vw: i64) -> (Csr, Vec<usize>) {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut mate = vec![UNASSIGNED; n];
    for &v in &order {
        if mate[v] != UNASSIGNED {
            continue;
        }
        let mut best: Option<(usize, i64)> = None;
        for (u, w) in g.neighbors(v) {
            if u == v || mate[u] != UNASSIGNED || g.vw[u] + g.vw[v] > max_vw {
                continue;
            }
            if best.is_none_or(|(bu, bw)| w > bw || (w == bw && u < bu)) {
                best = Some((u, w));
            }
        }
        match best {
            Some((u, _)) => {
                mate[v] = u;
                mate[u] = v;
            }
            None => mate[v] = v,
        }
    }

    let mut cmap = vec![UNASSIGNED; n];
    let mut members: Vec<(usize, usize)> = Vec::new();
    for v in 0..n {
        if cmap[v] == UNASSIGNED {
            let c = members.len();
            cmap[v] = c;
            cmap[mate[v]] = c;
            members.push((v, mate[v]));
        }
    }

    let cn = members.len();
    let mut vw = Vec::with_capacity(cn);
    let mut lists = Vec::with_capacity(cn);
    let mut slot = vec![UNASSIGNED; cn];
    for (c, &(a, b)) in members.iter().enumerate() {
        vw.push(if a == b { g.vw[a] } else { g.vw[a] + g.vw[b] });
        let mut list: Vec<(usize, i64)> = Vec::new();
        let fine: &[usize] = if a == b { &[a][..] } else { &[a, b][..] };
        for &f in fine {
            for (u, w) in g.neighbors(f) {
                let cu = cmap[u];
                if cu == c {
                    continue;
                }
                if slot[cu] == UNASSIGNED {
                    slot[cu] = list.len();
                    list.push((cu, w));
                } else {
                    list[slot[cu]].1 += w;
                }
            }
        }
        for &(cu, _) in &list {
            slot[cu] = UNASSIGNED;
        }
        lists.push(list);
    }
    (Csr::from_lists(lists, vw), cmap)
}

/// Grows parts 0..k-1 one after another from random seeds, always absorbing
/// the unassigned vertex most strongly connected to the growing part. The
/// last part takes the remainder.
fn grow_initial(g: &Csr, k: usize, maxw: i64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.n();
    let mut part = vec![UNASSIGNED; n];
    let mut remaining = g.total_weight();
    let mut conn = vec![0i64; n];
    for p in 0..k - 1 {
        let target = remaining / (k - p) as i64;
        let unassigned: Vec<usize> = (0..n).filter(|&v| part[v] == UNASSIGNED).collect();
        if unassigned.is_empty() {
            break;
        }
        conn.iter_mut().for_each(|c| *c = 0);
        let mut weight = 0i64;
        let mut skipped = vec![false; n];
        let mut next = Some(unassigned[rng.gen_range(0..unassigned.len())]);
        while let Some(v) = next {
            if weight > 0 && weight + g.vw[v] > maxw {
                skipped[v] = true;
            } else {
                part[v] = p;
                weight += g.vw[v];
                for (u, w) in g.neighbors(v) {
                    conn[u] += w;
                }
            }
            if weight >= target {
                break;
            }
            next = None;
            let mut best_conn = -1;
            for u in 0..n {
                if part[u] == UNASSIGNED && !skipped[u] && conn[u] > best_conn {
                    best_conn = conn[u];
                    next = Some(u);
                }
            }
        }
        remaining -= weight;
    }
    for p in part.iter_mut() {
        if *p == UNASSIGNED {
            *p = k - 1;
        }
    }
    part
}

/// Per-part connection weight of `v`, written into `conn` (length k).
fn connectivity(g: &Csr, part: &[usize], v: usize, conn: &mut [i64]) {
    conn.iter_mut().for_each(|c| *c = 0);
    for (u, w) in g.neighbors(v) {
        conn[part[u]] += w;
    }
}

/// Greedy boundary passes: move a vertex to the neighbouring part with the
/// largest positive gain that keeps the target under `maxw` and the source
/// nonempty. Zero-gain moves are taken only when they strictly even out the
/// two parts involved. Ties go to the lowest part id.
fn refine(g: &Csr, part: &mut [usize], k: usize, maxw: i64, passes: usize) {
    let mut pw = part_weights(g, part, k);
    let mut conn = vec![0i64; k];
    for _ in 0..passes {
        let mut moved = false;
        for v in 0..g.n() {
            let from = part[v];
            connectivity(g, part, v, &mut conn);
            let internal = conn[from];
            let vw = g.vw[v];
            if pw[from] - vw < 1 {
                continue;
            }
            let mut best: Option<(usize, i64)> = None;
            for to in 0..k {
                if to == from || conn[to] == 0 || pw[to] + vw > maxw {
                    continue;
                }
                let gain = conn[to] - internal;
                let acceptable = gain > 0 || (gain == 0 && pw[to] + vw < pw[from]);
                if acceptable && best.is_none_or(|(_, bg)| gain > bg) {
                    best = Some((to, gain));
                }
            }
            if let Some((to, _)) = best {
                part[v] = to;
                pw[from] -= vw;
                pw[to] += vw;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Moves vertices out of overweight parts, cheapest cut increase first.
fn rebalance(g: &Csr, part: &mut [usize], k: usize, maxw: i64) {
    let mut pw = part_weights(g, part, k);
    let mut conn = vec![0i64; k];
    loop {
        let Some(heavy) = (0..k).filter(|&p| pw[p] > maxw).max_by_key(|&p| (pw[p], std::cmp::Reverse(p))) else {
            return;
        };
        let mut best: Option<(usize, usize, i64)> = None;
        for v in (0..g.n()).filter(|&v| part[v] == heavy) {
            connectivity(g, part, v, &mut conn);
            for to in 0..k {
                if to == heavy || pw[to] + g.vw[v] > maxw {
                    continue;
                }
                let gain = conn[to] - conn[heavy];
                if best.is_none_or(|(_, _, bg)| gain > bg) {
                    best = Some((v, to, gain));
                }
            }
        }
        let Some((v, to, _)) = best else {
            return;
        };
        part[v] = to;
        pw[heavy] -= g.vw[v];
        pw[to] += g.vw[v];
    }
}

/// Gives every empty part one vertex, taken where it costs least.
fn fill_empty(g: &Csr, part: &mut [usize], k: usize, maxw: i64) {
    let mut pw = part_weights(g, part, k);
    let mut count = vec![0usize; k];
    for &p in part.iter() {
        count[p] += 1;
    }
    let mut conn = vec![0i64; k];
    for empty in 0..k {
        if count[empty] > 0 {
            continue;
        }
        let mut best: Option<(usize, i64)> = None;
        for v in 0..g.n() {
            let from = part[v];
            if count[from] < 2 || g.vw[v] > maxw {
                continue;
            }
            connectivity(g, part, v, &mut conn);
            let gain = conn[empty] - conn[from];
            if best.is_none_or(|(_, bg)| gain > bg) {
                best = Some((v, gain));
            }
        }
        if let Some((v, _)) = best {
            let from = part[v];
            part[v] = empty;
            count[from] -= 1;
            count[empty] += 1;
            pw[from] -= g.vw[v];
            pw[empty] += g.vw[v];
        }
    }
}

fn improve(g: &Csr, part: &mut [usize], k: usize, maxw: i64, passes: usize) {
    rebalance(g, part, k, maxw);
    refine(g, part, k, maxw, passes);
}

/// Splits `g` into `k` parts of at most `ceil((1 + imbalance) |V| / k)`
/// nodes each while keeping the cut weight low. Deterministic in `seed`.
pub fn partition_k(g: &WeightedGraph, k: usize, seed: u64) -> Result<PartitionAssignment, PartitionError> {
    partition_k_with(g, k, seed, &PartitionParams::default())
}

pub fn partition_k_with(
    g: &WeightedGraph,
    k: usize,
    seed: u64,
    params: &PartitionParams,
) -> Result<PartitionAssignment, PartitionError> {
    let n = g.num_nodes();
    if k < 2 || k > n {
        return Err(PartitionError::InvalidK { k, nodes: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maxw = max_part_size(n, k, params.imbalance) as i64;

    let coarsen_to = 30.max(4 * k);
    let max_vw = ((1.5 * n as f64 / coarsen_to as f64).ceil() as i64).max(1);
    let mut levels: Vec<(Csr, Vec<usize>)> = Vec::new();
    let mut current = Csr::from_graph(g);
    while current.n() > coarsen_to {
        let (coarse, cmap) = coarsen(&current, &mut rng, max_vw);
        if coarse.n() * 20 > current.n() * 19 {
            break;
        }
        levels.push((current, cmap));
        current = coarse;
    }

    let mut best: Option<(bool, i64, Vec<usize>)> = None;
    for _ in 0..params.initial_tries.max(1) {
        let mut part = grow_initial(&current, k, maxw, &mut rng);
        improve(&current, &mut part, k, maxw, params.refine_passes);
        let balanced = part_weights(&current, &part, k).iter().all(|&w| w <= maxw);
        let cut = edge_cut(&current, &part);
        let better = match &best {
            None => true,
            Some((b_bal, b_cut, _)) => (balanced, -cut) > (*b_bal, -*b_cut),
        };
        if better {
            best = Some((balanced, cut, part));
        }
    }
    let mut part = best.expect("at least one try").2;

    while let Some((fine, cmap)) = levels.pop() {
        part = cmap.iter().map(|&c| part[c]).collect();
        current = fine;
        improve(&current, &mut part, k, maxw, params.refine_passes);
    }
    fill_empty(&current, &mut part, k, maxw);
    improve(&current, &mut part, k, maxw, params.refine_passes);
    fill_empty(&current, &mut part, k, maxw);

    PartitionAssignment::new(part, k)
}
