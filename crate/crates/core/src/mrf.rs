//! Pairwise MRF over vessel points and its minimization by sequential
//! tree-reweighted message passing (TRW-S).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::candidates::CandidateSet;
use crate::geom::Pixel;
use crate::graph::VesselGraph;
use crate::{Error, Result};

/// Pairwise term between nodes `a` and `b`; `costs[la * labels(b) + lb]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTerm {
    pub a: usize,
    pub b: usize,
    pub costs: Vec<f64>,
}

/// Discrete pairwise energy `sum_i unary_i(x_i) + sum_(i,j) pairwise_ij(x_i, x_j)`.
/// Unary entries may be `+inf` to forbid a label; pairwise entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfProblem {
    unaries: Vec<Vec<f64>>,
    edges: Vec<PairwiseTerm>,
}

impl MrfProblem {
    pub fn new(unaries: Vec<Vec<f64>>, edges: Vec<PairwiseTerm>) -> Result<Self> {
        for (i, u) in unaries.iter().enumerate() {
            if u.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
                return Err(Error::InvalidParameter(format!("unary table of node {i} has NaN or -inf")));
            }
        }
        for e in &edges {
            if e.a >= unaries.len() || e.b >= unaries.len() || e.a == e.b {
                return Err(Error::InvalidParameter(format!("bad pairwise term ({}, {})", e.a, e.b)));
            }
            if e.costs.len() != unaries[e.a].len() * unaries[e.b].len() {
                return Err(Error::InvalidParameter(format!("pairwise table ({}, {}) has wrong size", e.a, e.b)));
            }
            if e.costs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("pairwise table ({}, {}) is not finite", e.a, e.b)));
            }
        }
        Ok(MrfProblem { unaries, edges })
    }

    pub fn num_nodes(&self) -> usize {
        self.unaries.len()
    }

    pub fn unary(&self, node: usize) -> &[f64] {
        &self.unaries[node]
    }

    pub fn edges(&self) -> &[PairwiseTerm] {
        &self.edges
    }

    pub fn pairwise(&self, edge: usize, la: usize, lb: usize) -> f64 {
        let e = &self.edges[edge];
        e.costs[la * self.unaries[e.b].len() + lb]
    }

    /// Energy of a full labeling.
    pub fn energy(&self, labels: &[usize]) -> f64 {
        let mut total: f64 = labels.iter().enumerate().map(|(i, &l)| self.unaries[i][l]).sum();
        for (k, e) in self.edges.iter().enumerate() {
            total += self.pairwise(k, labels[e.a], labels[e.b]);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrwsOptions {
    pub max_iters: usize,
    /// Stop once the bound gained less than this over the last 5 iterations.
    pub convergence_eps: f64,
}

impl Default for TrwsOptions {
    fn default() -> Self {
        TrwsOptions { max_iters: 200, convergence_eps: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: Vec<usize>,
    pub energy: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    /// Lower bound after each iteration.
    pub bound_history: Vec<f64>,
}

const STALL_WINDOW: usize = 5;

/// TRW-S over the problem's nodes in index order.
///
/// Each iteration runs a forward and a backward message pass, then evaluates
/// the dual bound on the monotonic-chain decomposition and decodes a
/// labeling by conditioning each node on its already-labeled predecessors.
/// The best labeling seen is returned. Ties in every argmin go to the lowest
/// label index.
pub fn minimize(problem: &MrfProblem, opts: &TrwsOptions) -> Result<Labeling> {
    let mut solver = Trws::new(problem)?;
    let mut best_labels = solver.decode();
    let mut best_energy = problem.energy(&solver.expand(&best_labels));
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..opts.max_iters.max(1) {
        iterations += 1;
        solver.pass(true);
        solver.pass(false);
        let bound = solver.lower_bound();
        history.push(bound);
        let labels = solver.decode();
        let energy = problem.energy(&solver.expand(&labels));
        if energy < best_energy {
            best_energy = energy;
            best_labels = labels;
        }
        let gap_closed = best_energy - bound <= 1e-9 * best_energy.abs().max(1.0);
        let stalled = history.len() > STALL_WINDOW
            && history[history.len() - 1] - history[history.len() - 1 - STALL_WINDOW] < opts.convergence_eps;
        if gap_closed || stalled {
            break;
        }
    }
    let labels = solver.expand(&best_labels);
    let energy = problem.energy(&labels);
    let lower_bound = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Labeling { labels, energy, lower_bound, iterations, bound_history: history })
}

struct Incidence {
    edge: usize,
    other: usize,
    /// This node is the edge's `a` side.
    is_a: bool,
}

struct Chain {
    nodes: Vec<usize>,
    /// `edges[k]` joins `nodes[k]` and `nodes[k + 1]`.
    edges: Vec<usize>,
}

/// Solver state over finite labels only.
struct Trws {
    /// Original label index of each compressed label.
    active: Vec<Vec<usize>>,
    unary: Vec<Vec<f64>>,
    edges: Vec<(usize, usize, Vec<f64>)>,
    incidence: Vec<Vec<Incidence>>,
    gamma: Vec<f64>,
    to_a: Vec<Vec<f64>>,
    to_b: Vec<Vec<f64>>,
    chains: Vec<Chain>,
}

impl Trws {
    fn new(problem: &MrfProblem) -> Result<Self> {
        let n = problem.num_nodes();
        let mut active = Vec::with_capacity(n);
        let mut unary = Vec::with_capacity(n);
        for i in 0..n {
            let idx: Vec<usize> = (0..problem.unaries[i].len()).filter(|&l| problem.unaries[i][l].is_finite()).collect();
            if idx.is_empty() {
                return Err(Error::InfeasibleNode(i));
            }
            unary.push(idx.iter().map(|&l| problem.unaries[i][l]).collect());
            active.push(idx);
        }
        let mut edges = Vec::with_capacity(problem.edges.len());
        let mut incidence: Vec<Vec<Incidence>> = (0..n).map(|_| Vec::new()).collect();
        for (k, e) in problem.edges.iter().enumerate() {
            let mut table = Vec::with_capacity(active[e.a].len() * active[e.b].len());
            for &la in &active[e.a] {
                for &lb in &active[e.b] {
                    table.push(problem.pairwise(k, la, lb));
                }
            }
            edges.push((e.a, e.b, table));
            incidence[e.a].push(Incidence { edge: k, other: e.b, is_a: true });
            incidence[e.b].push(Incidence { edge: k, other: e.a, is_a: false });
        }
        let gamma = (0..n)
            .map(|i| {
                let lower = incidence[i].iter().filter(|inc| inc.other < i).count();
                let higher = incidence[i].len() - lower;
                1.0 / lower.max(higher).max(1) as f64
            })
            .collect();
        let to_a = edges.iter().map(|(a, _, _)| vec![0.0; active[*a].len()]).collect();
        let to_b = edges.iter().map(|(_, b, _)| vec![0.0; active[*b].len()]).collect();
        let chains = build_chains(n, &incidence);
        Ok(Trws { active, unary, edges, incidence, gamma, to_a, to_b, chains })
    }

    fn labels(&self, i: usize) -> usize {
        self.active[i].len()
    }

    fn incoming(&self, inc: &Incidence) -> &[f64] {
        if inc.is_a {
            &self.to_a[inc.edge]
        } else {
            &self.to_b[inc.edge]
        }
    }

    /// Pairwise cost with `xi` labeling node `i` on the incidence's edge.
    fn table(&self, inc: &Incidence, xi: usize, xo: usize) -> f64 {
        let (_, b, t) = &self.edges[inc.edge];
        let lb = self.active[*b].len();
        if inc.is_a {
            t[xi * lb + xo]
        } else {
            t[xo * lb + xi]
        }
    }

    /// Unary plus every incoming message.
    fn reparam_unary(&self, i: usize) -> Vec<f64> {
        let mut theta = self.unary[i].clone();
        for inc in &self.incidence[i] {
            for (t, m) in theta.iter_mut().zip(self.incoming(inc)) {
                *t += m;
            }
        }
        theta
    }

    fn pass(&mut self, forward: bool) {
        let n = self.unary.len();
        for step in 0..n {
            let i = if forward { step } else { n - 1 - step };
            let theta = self.reparam_unary(i);
            let g = self.gamma[i];
            for k in 0..self.incidence[i].len() {
                let inc = &self.incidence[i][k];
                if (inc.other > i) != forward {
                    continue;
                }
                let into_i = self.incoming(inc);
                let h: Vec<f64> = theta.iter().zip(into_i).map(|(t, m)| g * t - m).collect();
                let lo = self.labels(inc.other);
                let mut msg = vec![f64::INFINITY; lo];
                for (xi, &hv) in h.iter().enumerate() {
                    if !hv.is_finite() {
                        continue;
                    }
                    for (xo, out) in msg.iter_mut().enumerate() {
                        let v = hv + self.table(inc, xi, xo);
                        if v < *out {
                            *out = v;
                        }
                    }
                }
                let min = msg.iter().copied().fold(f64::INFINITY, f64::min);
                for m in &mut msg {
                    *m -= min;
                }
                let (edge, is_a) = (inc.edge, inc.is_a);
                if is_a {
                    self.to_b[edge] = msg;
                } else {
                    self.to_a[edge] = msg;
                }
            }
        }
    }

    /// Sum over monotonic chains of the chain minimum, with each node's
    /// reparametrized unary split evenly over the chains through it.
    fn lower_bound(&self) -> f64 {
        let theta: Vec<Vec<f64>> = (0..self.unary.len()).map(|i| self.reparam_unary(i)).collect();
        let mut total = 0.0;
        for chain in &self.chains {
            let first = chain.nodes[0];
            let mut f: Vec<f64> = theta[first].iter().map(|t| self.gamma[first] * t).collect();
            for (k, &e) in chain.edges.iter().enumerate() {
                let (cur, next) = (chain.nodes[k], chain.nodes[k + 1]);
                let (a, _, t) = &self.edges[e];
                let lb = self.labels(self.edges[e].1);
                let cur_is_a = *a == cur;
                let mut g = vec![f64::INFINITY; self.labels(next)];
                for (xn, out) in g.iter_mut().enumerate() {
                    let mut best = f64::INFINITY;
                    for (xc, &fv) in f.iter().enumerate() {
                        if !fv.is_finite() {
                            continue;
                        }
                        let (la, lbi) = if cur_is_a { (xc, xn) } else { (xn, xc) };
                        let pair = t[la * lb + lbi] - self.to_b[e][lbi] - self.to_a[e][la];
                        best = best.min(fv + pair);
                    }
                    *out = best + self.gamma[next] * theta[next][xn];
                }
                f = g;
            }
            total += f.iter().copied().fold(f64::INFINITY, f64::min);
        }
        total
    }

    /// Labels (compressed) chosen in node order, conditioning on earlier choices.
    fn decode(&self) -> Vec<usize> {
        let n = self.unary.len();
        let mut x = vec![0usize; n];
        for i in 0..n {
            let mut cost = self.unary[i].clone();
            for inc in &self.incidence[i] {
                if inc.other < i {
                    for (xi, c) in cost.iter_mut().enumerate() {
                        *c += self.table(inc, xi, x[inc.other]);
                    }
                } else {
                    for (c, m) in cost.iter_mut().zip(self.incoming(inc)) {
                        *c += m;
                    }
                }
            }
            let mut best = 0;
            for (l, &c) in cost.iter().enumerate() {
                if c < cost[best] {
                    best = l;
                }
            }
            x[i] = best;
        }
        x
    }

    fn expand(&self, compressed: &[usize]) -> Vec<usize> {
        compressed.iter().enumerate().map(|(i, &l)| self.active[i][l]).collect()
    }
}

/// Decomposes the graph into chains that follow increasing node order. Every
/// edge lies in exactly one chain and node `i` lies in
/// `max(#lower neighbors, #higher neighbors, 1)` chains.
fn build_chains(n: usize, incidence: &[Vec<Incidence>]) -> Vec<Chain> {
    let mut chains: Vec<Chain> = Vec::new();
    let mut chain_of_edge: Vec<Option<usize>> = vec![None; incidence.iter().map(|v| v.len()).sum::<usize>() / 2];
    for i in 0..n {
        let mut inc_in: Vec<&Incidence> = incidence[i].iter().filter(|inc| inc.other < i).collect();
        let mut inc_out: Vec<&Incidence> = incidence[i].iter().filter(|inc| inc.other > i).collect();
        inc_in.sort_by_key(|inc| (inc.other, inc.edge));
        inc_out.sort_by_key(|inc| (inc.other, inc.edge));
        if inc_in.is_empty() && inc_out.is_empty() {
            chains.push(Chain { nodes: vec![i], edges: Vec::new() });
            continue;
        }
        for k in 0..inc_in.len().max(inc_out.len()) {
            let chain = match inc_in.get(k) {
                Some(inc) => chain_of_edge[inc.edge].expect("incoming edge already assigned"),
                None => {
                    chains.push(Chain { nodes: vec![i], edges: Vec::new() });
                    chains.len() - 1
                }
            };
            if let Some(out) = inc_out.get(k) {
                chains[chain].edges.push(out.edge);
                chains[chain].nodes.push(out.other);
                chain_of_edge[out.edge] = Some(chain);
            }
        }
    }
    chains
}

/// Weights and thresholds of the vessel correspondence energy.
#[derive(Debug, Clone, PartialEq)]
pub struct VcoParams {
    /// Regularization weight on the displacement-smoothness term.
    pub lambda: f64,
    /// Truncation of the unary (descriptor-distance) term.
    pub t_phi: f64,
    /// Truncation of the displacement difference, in pixels.
    pub t_psi: f64,
    /// Unary cost of the dummy label.
    pub dummy_cost: f64,
    pub use_dummy: bool,
    /// Candidate labels per node, excluding the dummy.
    pub n_p: usize,
}

impl Default for VcoParams {
    fn default() -> Self {
        VcoParams { lambda: 0.05, t_phi: 1.0, t_psi: 10.0, dummy_cost: 0.8, use_dummy: true, n_p: 25 }
    }
}

impl VcoParams {
    /// Index of the dummy label when enabled.
    pub fn dummy_label(&self) -> Option<usize> {
        self.use_dummy.then_some(self.n_p)
    }

    pub fn label_count(&self) -> usize {
        self.n_p + self.use_dummy as usize
    }

    /// Pairwise cost on an edge with a dummy-labeled end: half the ceiling.
    pub fn dummy_pairwise(&self) -> f64 {
        0.5 * self.lambda * self.t_psi
    }
}

/// Truncated appearance cost.
pub fn unary_cost(desc_dist: f64, t_phi: f64) -> f64 {
    desc_dist.min(t_phi)
}

/// Truncated displacement-difference cost, scaled by `lambda`.
pub fn pairwise_cost(disp_i: Pixel, disp_j: Pixel, lambda: f64, t_psi: f64) -> f64 {
    lambda * (disp_i - disp_j).norm().min(t_psi)
}

/// One node per graph point (graph index order), one pairwise term per
/// graph edge. Label `l < N_c(i)` is the `l`-th candidate, labels up to
/// `n_p` are forbidden, and label `n_p` is the dummy when enabled.
pub fn build_problem(graph: &VesselGraph, cands: &CandidateSet, params: &VcoParams) -> Result<MrfProblem> {
    if cands.lists.len() != graph.len() {
        return Err(Error::CandidateMismatch { points: graph.len(), lists: cands.lists.len() });
    }
    if let Some(l) = cands.lists.iter().find(|l| l.len() > params.n_p) {
        return Err(Error::InvalidParameter(format!("{} candidates exceed n_p = {}", l.len(), params.n_p)));
    }
    let labels = params.label_count();
    let dummy = params.dummy_label();
    let unaries: Vec<Vec<f64>> = cands
        .lists
        .iter()
        .map(|list| {
            (0..labels)
                .map(|l| {
                    if Some(l) == dummy {
                        params.dummy_cost
                    } else if l < list.len() {
                        unary_cost(list[l].distance, params.t_phi)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let mut edges = Vec::with_capacity(graph.edges().len());
    for (ia, ib) in graph.edge_indices() {
        let (pa, pb) = (graph.points()[ia].pos, graph.points()[ib].pos);
        let (ca, cb) = (&cands.lists[ia], &cands.lists[ib]);
        let mut costs = Vec::with_capacity(labels * labels);
        for la in 0..labels {
            for lb in 0..labels {
                let c = if Some(la) == dummy || Some(lb) == dummy {
                    params.dummy_pairwise()
                } else if la < ca.len() && lb < cb.len() {
                    pairwise_cost(pa - ca[la].pos, pb - cb[lb].pos, params.lambda, params.t_psi)
                } else {
                    0.0
                };
                costs.push(c);
            }
        }
        edges.push(PairwiseTerm { a: ia, b: ib, costs });
    }
    MrfProblem::new(unaries, edges)
}

/// A source point kept by the labeling, with its chosen destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPoint {
    pub id: u32,
    pub source: Pixel,
    pub target: Pixel,
    pub label: usize,
    pub distance: f64,
}

/// Drops dummy-labeled nodes and maps the rest to their chosen candidates.
pub fn apply_labeling(graph: &VesselGraph, cands: &CandidateSet, labeling: &Labeling, params: &VcoParams) -> Vec<MatchedPoint> {
    graph
        .points()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let l = labeling.labels[i];
            if Some(l) == params.dummy_label() {
                return None;
            }
            let m = cands.lists[i].get(l)?;
            Some(MatchedPoint { id: p.id, source: p.pos, target: m.pos, label: l, distance: m.distance })
        })
        .collect()
}
