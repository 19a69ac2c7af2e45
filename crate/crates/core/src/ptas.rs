//! The (1+ε) local scheme for minimum k-spanners: a sequential ball-growing
//! pass, a Linial-Saks network decomposition of `G^r` run on the simulator,
//! and the color-phased distributed composition.
//!
//! Ball optima `g(v, d)` come from the exact branch-and-bound solver, so
//! everything here is meant for desk-scale instances.

use std::collections::{BTreeMap, VecDeque};

use num::{BigInt, One};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::Ratio;
use crate::graph::{spanner_cost, uncovered_targets, uncoverable_client_edges, EdgeId, EdgeSubset, Graph, GraphBuilder, VertexId};
use crate::oracle::{min_cover_spanner, OracleBudget, OracleError};
use crate::par::{self, Execution};
use crate::sim::{decode, encode, run_on, LocalView, NodeProgram, SimConfig, SimError, Step, Topology};
use crate::star::Variant;

#[derive(Debug, Error)]
pub enum PtasError {
    #[error("epsilon must be a positive rational such as 0.5 or 1/3, got {0:?}")]
    Epsilon(String),
    #[error("stretch must be at least 1")]
    Stretch,
    #[error("variant {} does not match the graph", .0.name())]
    Variant(Variant),
    #[error("radius {radius} at vertex {vertex} exceeds the bound {bound}")]
    RadiusBound { vertex: VertexId, radius: usize, bound: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("decomposition did not finish within {0} rounds")]
    RoundLimit(usize),
    #[error("simulation error: {0}")]
    Sim(String),
}

/// Parses `0.25`, `3`, or `1/3` into an exact positive ratio.
pub fn parse_ratio(s: &str) -> Result<Ratio, PtasError> {
    let bad = || PtasError::Epsilon(s.to_string());
    let t = s.trim();
    let r = if let Some((a, b)) = t.split_once('/') {
        Ratio::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    } else {
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if frac.len() > 18 || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Ratio::new(int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?, den)
    };
    if r.den == 0 || r.num == 0 {
        return Err(bad());
    }
    Ok(r.reduced())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasParams {
    pub k: usize,
    pub epsilon: Ratio,
    pub variant: Variant,
    pub budget: OracleBudget,
}

impl PtasParams {
    pub fn new(k: usize, epsilon: Ratio, variant: Variant) -> Self {
        PtasParams { k, epsilon, variant, budget: OracleBudget::default() }
    }

    /// `b <= (1 + ε) a` in exact arithmetic.
    fn within(&self, a: u64, b: u64) -> bool {
        let (p, q) = (self.epsilon.num as u128, self.epsilon.den as u128);
        b as u128 * q <= a as u128 * (p + q)
    }
}

/// Smallest `L` with `(1 + ε)^L >= n^2`.
pub fn growth_steps(n: usize, epsilon: Ratio) -> usize {
    let target = BigInt::from(n) * BigInt::from(n);
    let (p, q) = (BigInt::from(epsilon.num), BigInt::from(epsilon.den));
    let (mut up, mut down) = (BigInt::one(), BigInt::one());
    let mut steps = 0;
    while up < &target * &down {
        up *= &p + &q;
        down *= &q;
        steps += 1;
    }
    steps
}

/// Power-graph radius `2k L + 4k + 1`, larger than `r_i + 4k` for every
/// radius the ball-growing search can reach.
pub fn power_radius(n: usize, k: usize, epsilon: Ratio) -> usize {
    2 * k * growth_steps(n, epsilon) + 4 * k + 1
}

/// Undirected hop distances from a set of sources, explored to depth `d`.
fn ball(g: &Graph, sources: &[VertexId], d: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(x) = queue.pop_front() {
        if dist[x] >= d {
            continue;
        }
        for &y in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn inside(g: &Graph, dist: &[usize], d: usize, e: EdgeId) -> bool {
    let edge = g.edge(e);
    dist[edge.u] <= d && dist[edge.v] <= d
}

/// Edges that must be spanned: every edge, or the coverable client edges.
pub fn initial_targets(g: &Graph, k: usize, variant: Variant) -> EdgeSubset {
    if variant == Variant::ClientServer {
        let lost = uncoverable_client_edges(g, k);
        EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| g.edge(e).client && lost.binary_search(&e).is_err()))
    } else {
        g.full_subset()
    }
}

fn edge_cost(g: &Graph, variant: Variant, e: EdgeId) -> u64 {
    if variant == Variant::Weighted {
        g.weight(e)
    } else {
        1
    }
}

/// `g(v, d)`: optimal cost of spanning the uncovered edges of `B_d(v)`,
/// with a witness drawn from `B_{d+k}(v)`.
pub fn ball_spanner_size(
    g: &Graph,
    v: VertexId,
    d: usize,
    k: usize,
    variant: Variant,
    uncovered: &EdgeSubset,
    budget: OracleBudget,
) -> Result<(u64, EdgeSubset), PtasError> {
    if k < 1 {
        return Err(PtasError::Stretch);
    }
    let dist = ball(g, &[v], d + k);
    let targets: Vec<EdgeId> = uncovered.iter().filter(|&e| inside(g, &dist, d, e)).collect();
    if targets.is_empty() {
        return Ok((0, EdgeSubset::new(g.m())));
    }
    let cs = variant == Variant::ClientServer;
    let candidates = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| inside(g, &dist, d + k, e) && (!cs || g.edge(e).server)));
    Ok(min_cover_spanner(g, k, &targets, &candidates, |e| edge_cost(g, variant, e), budget)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasStep {
    pub vertex: VertexId,
    /// Chosen radius `r_i`.
    pub radius: usize,
    pub g_r: u64,
    pub g_r2k: u64,
    /// Uncovered edges of `B_{r_i}(v_i)` before the step.
    pub region: Vec<EdgeId>,
    /// Edges newly added to the spanner.
    pub added: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasRun {
    pub h: EdgeSubset,
    pub cost: u64,
    pub steps: Vec<PtasStep>,
    /// `2k L`, the largest radius the search may reach.
    pub radius_bound: usize,
}

/// One ball-growing step at `v`, updating `h` and the uncovered set.
fn step_at(
    g: &Graph,
    p: &PtasParams,
    bound: usize,
    v: VertexId,
    h: &mut EdgeSubset,
    uncovered: &mut EdgeSubset,
) -> Result<PtasStep, PtasError> {
    let k = p.k;
    let mut memo: BTreeMap<usize, (u64, EdgeSubset)> = BTreeMap::new();
    let mut at = |d: usize| -> Result<(u64, EdgeSubset), PtasError> {
        if let Some(x) = memo.get(&d) {
            return Ok(x.clone());
        }
        let x = ball_spanner_size(g, v, d, k, p.variant, uncovered, p.budget)?;
        memo.insert(d, x.clone());
        Ok(x)
    };
    let mut r = 0;
    loop {
        let (a, _) = at(r)?;
        let (b, witness) = at(r + 2 * k)?;
        if p.within(a, b) {
            let dist = ball(g, &[v], r);
            let region: Vec<EdgeId> = uncovered.iter().filter(|&e| inside(g, &dist, r, e)).collect();
            let added: Vec<EdgeId> = witness.iter().filter(|&e| !h.contains(e)).collect();
            h.union_with(&witness);
            let still = uncovered_targets(g, h, k, &uncovered.to_vec(), Execution::Sequential).expect("stretch checked");
            *uncovered = EdgeSubset::from_ids(g.m(), still);
            return Ok(PtasStep { vertex: v, radius: r, g_r: a, g_r2k: b, region, added });
        }
        r += 1;
        if r > bound {
            return Err(PtasError::RadiusBound { vertex: v, radius: r, bound });
        }
    }
}

fn check_params(g: &Graph, p: &PtasParams) -> Result<(), PtasError> {
    if p.k < 1 {
        return Err(PtasError::Stretch);
    }
    p.variant.check(g).map_err(|_| PtasError::Variant(p.variant))
}

/// Processes the vertices in `order`, growing each ball until
/// `g(v, r + 2k) <= (1 + ε) g(v, r)`.
pub fn ptas_sequential(g: &Graph, p: &PtasParams, order: &[VertexId]) -> Result<PtasRun, PtasError> {
    check_params(g, p)?;
    let bound = 2 * p.k * growth_steps(g.n(), p.epsilon);
    let mut h = EdgeSubset::new(g.m());
    let mut uncovered = initial_targets(g, p.k, p.variant);
    let mut steps = Vec::with_capacity(order.len());
    for &v in order {
        steps.push(step_at(g, p, bound, v, &mut h, &mut uncovered)?);
    }
    Ok(PtasRun { cost: spanner_cost(g, &h), h, steps, radius_bound: bound })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasReport {
    pub violations: Vec<String>,
}

impl PtasReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks coverage, the per-step cost bound, the radius bound, and that the
/// processed regions lie at distance at least `2k` from each other.
pub fn check_ptas_run(g: &Graph, p: &PtasParams, run: &PtasRun) -> PtasReport {
    let mut rep = PtasReport::default();
    let targets = initial_targets(g, p.k, p.variant).to_vec();
    match uncovered_targets(g, &run.h, p.k, &targets, Execution::Sequential) {
        Ok(left) if left.is_empty() => {}
        Ok(left) => rep.violations.push(format!("edges {left:?} are not spanned")),
        Err(e) => rep.violations.push(e.to_string()),
    }
    for s in &run.steps {
        if s.radius > run.radius_bound {
            rep.violations.push(format!("vertex {} radius {} above {}", s.vertex, s.radius, run.radius_bound));
        }
        if !p.within(s.g_r, s.g_r2k) {
            rep.violations.push(format!("vertex {} stopped with g = {} then {}", s.vertex, s.g_r, s.g_r2k));
        }
        let added: u64 = s.added.iter().map(|&e| edge_cost(g, p.variant, e)).sum();
        if added > s.g_r2k {
            rep.violations.push(format!("vertex {} added cost {added} above g = {}", s.vertex, s.g_r2k));
        }
    }
    let ends = |s: &PtasStep| -> Vec<VertexId> {
        let mut v: Vec<VertexId> = s.region.iter().flat_map(|&e| [g.edge(e).u, g.edge(e).v]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let regions: Vec<Vec<VertexId>> = run.steps.iter().map(ends).collect();
    for (i, a) in regions.iter().enumerate() {
        if a.is_empty() {
            continue;
        }
        let dist = ball(g, a, 2 * p.k);
        for b in regions.iter().skip(i + 1) {
            if let Some(&x) = b.iter().find(|&&x| dist[x] < 2 * p.k) {
                rep.violations.push(format!("regions of steps {i} and a later one meet near vertex {x}"));
            }
        }
    }
    let total: u64 = run.steps.iter().flat_map(|s| s.added.iter()).map(|&e| edge_cost(g, p.variant, e)).sum();
    if total != run.cost && p.variant != Variant::Weighted {
        rep.violations.push(format!("step costs sum to {total}, spanner costs {}", run.cost));
    }
    rep
}

/// `G^r` as a simulator topology.
pub fn power_topology(g: &Graph, r: usize) -> Topology {
    let neighbors = (0..g.n())
        .map(|v| {
            let d = ball(g, &[v], r);
            (0..g.n()).filter(|&u| u != v && d[u] <= r).collect()
        })
        .collect();
    Topology::from_neighbors(neighbors)
}

/// Linial-Saks decomposition. Each phase, every live vertex draws a radius
/// from a geometric distribution truncated at `cap` and floods it; a vertex
/// joins the highest-id center that reaches it and is colored with the
/// phase index when strictly inside that center's radius.
#[derive(Clone, Copy, Debug)]
pub struct LinialSaks {
    pub cap: usize,
}

pub struct LsNode {
    id: VertexId,
    radius: usize,
    /// center -> (radius, distance)
    known: BTreeMap<VertexId, (usize, usize)>,
    fresh: Vec<VertexId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsOutput {
    pub center: VertexId,
    pub color: usize,
}

impl NodeProgram for LinialSaks {
    type State = LsNode;
    type Output = LsOutput;
    type Event = ();

    fn init(&self, view: &LocalView<'_>) -> LsNode {
        LsNode { id: view.id, radius: 0, known: BTreeMap::new(), fresh: Vec::new() }
    }

    fn step(&self, s: &mut LsNode, step: &mut Step<'_, LsOutput, ()>) {
        let len = self.cap + 1;
        let (phase, t) = (step.round() / len, step.round() % len);
        if t == 0 {
            let mut r = 0;
            while r < self.cap && step.rng().gen_bool(0.5) {
                r += 1;
            }
            s.radius = r;
            s.known.clear();
            s.known.insert(s.id, (r, 0));
            s.fresh = vec![s.id];
        }
        for (_, payload) in step.inbox() {
            for (c, r, d) in decode::<Vec<(VertexId, usize, usize)>>(payload) {
                let nd = d + 1;
                if nd <= r && s.known.get(&c).is_none_or(|&(_, old)| nd < old) {
                    s.known.insert(c, (r, nd));
                    s.fresh.push(c);
                }
            }
        }
        if t == self.cap {
            let (&center, &(r, d)) = s.known.iter().next_back().expect("own entry");
            if d < r {
                step.output(LsOutput { center, color: phase });
            }
            return;
        }
        s.fresh.sort_unstable();
        s.fresh.dedup();
        let out: Vec<(VertexId, usize, usize)> = s
            .fresh
            .drain(..)
            .filter_map(|c| s.known.get(&c).filter(|&&(r, d)| d < r).map(|&(r, d)| (c, r, d)))
            .collect();
        if !out.is_empty() {
            step.broadcast(&encode(&out));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub r: usize,
    pub cap: usize,
    /// Cluster index per vertex; clusters are numbered by (color, center).
    pub cluster: Vec<usize>,
    pub center: Vec<VertexId>,
    pub color: Vec<usize>,
    pub colors: usize,
    pub clusters: usize,
    /// Rounds on `G^r`; each costs `r` rounds of the base graph.
    pub power_rounds: usize,
}

/// Radius cap `ceil(log2 n) + 1` of the truncated geometric distribution.
pub fn radius_cap(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize + 1
}

pub fn network_decomposition(g: &Graph, r: usize, seed: u64) -> Result<Decomposition, PtasError> {
    let topo = power_topology(g, r.max(1));
    let cap = radius_cap(g.n());
    let cfg = SimConfig::new(seed, 64 * (cap + 1) * (cap + 1));
    let trace = run_on(&topo, &LinialSaks { cap }, cfg).map_err(|e| match e {
        SimError::RoundLimit { limit, .. } => PtasError::RoundLimit(limit),
        other => PtasError::Sim(other.to_string()),
    })?;
    let mut out: Vec<LsOutput> = trace.outputs.iter().map(|o| o.expect("finished runs assign every vertex")).collect();
    // Phases that colored nobody leave no gap in the palette.
    let mut used: Vec<usize> = out.iter().map(|o| o.color).collect();
    used.sort_unstable();
    used.dedup();
    for o in &mut out {
        o.color = used.binary_search(&o.color).expect("color present");
    }
    let mut keys: Vec<(usize, VertexId)> = out.iter().map(|o| (o.color, o.center)).collect();
    keys.sort_unstable();
    keys.dedup();
    let cluster = out.iter().map(|o| keys.binary_search(&(o.color, o.center)).expect("key present")).collect();
    Ok(Decomposition {
        r: r.max(1),
        cap,
        cluster,
        center: out.iter().map(|o| o.center).collect(),
        color: out.iter().map(|o| o.color).collect(),
        colors: out.iter().map(|o| o.color + 1).max().unwrap_or(0),
        clusters: keys.len(),
        power_rounds: trace.rounds + 1,
    })
}

/// Color-count constant: at most `COLOR_FACTOR * ceil(log2 n)` colors.
pub const COLOR_FACTOR: usize = 4;

/// Checks the decomposition invariants against `G^r`.
pub fn check_decomposition(g: &Graph, d: &Decomposition) -> Vec<String> {
    let mut bad = Vec::new();
    let topo = power_topology(g, d.r);
    for v in 0..g.n() {
        for &u in topo.neighbors(v) {
            if d.cluster[u] != d.cluster[v] && d.color[u] == d.color[v] {
                bad.push(format!("vertices {v} and {u} are adjacent in G^r with color {} in different clusters", d.color[v]));
            }
        }
    }
    let log = (g.n().max(2) as f64).log2().ceil() as usize;
    if d.colors > COLOR_FACTOR * log {
        bad.push(format!("{} colors exceed {} * log n", d.colors, COLOR_FACTOR));
    }
    for c in 0..d.clusters {
        let members: Vec<VertexId> = (0..g.n()).filter(|&v| d.cluster[v] == c).collect();
        for &v in &members {
            let dist = power_distances(&topo, v);
            let far = members.iter().map(|&u| dist[u]).max().unwrap_or(0);
            if far > 2 * d.cap {
                bad.push(format!("cluster {c} has weak diameter {far} above {}", 2 * d.cap));
            }
        }
    }
    bad
}

fn power_distances(topo: &Topology, s: VertexId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; topo.n()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &y in topo.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributedPtas {
    pub run: PtasRun,
    pub decomposition: Decomposition,
    /// Processing order, by (color, id).
    pub order: Vec<VertexId>,
    /// Base-graph rounds: decomposition plus one gather per color phase.
    pub rounds: usize,
}

/// The subgraph induced by the vertices within distance `r` of a cluster,
/// with maps back to host ids.
struct Region {
    graph: Graph,
    vertex: Vec<VertexId>,
    local_vertex: BTreeMap<VertexId, VertexId>,
    edge: Vec<EdgeId>,
}

fn region(g: &Graph, members: &[VertexId], r: usize) -> Region {
    let dist = ball(g, members, r);
    let vertex: Vec<VertexId> = (0..g.n()).filter(|&v| dist[v] <= r).collect();
    let local_vertex: BTreeMap<VertexId, VertexId> = vertex.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut gb = GraphBuilder::with_flags(vertex.len(), g.flags());
    let mut edge = Vec::new();
    for (e, ed) in g.edges().iter().enumerate() {
        if let (Some(&a), Some(&b)) = (local_vertex.get(&ed.u), local_vertex.get(&ed.v)) {
            gb.full_edge(a, b, ed.weight, ed.client, ed.server).expect("subgraph of a simple graph");
            edge.push(e);
        }
    }
    Region { graph: gb.build().expect("subgraph of a simple graph"), vertex, local_vertex, edge }
}

/// Runs the decomposition on `G^r`, then for each color in increasing order
/// lets every cluster of that color simulate the sequential pass over its
/// vertices in id order, seeing only its `r`-neighborhood.
pub fn ptas_distributed(g: &Graph, p: &PtasParams, seed: u64, exec: Execution) -> Result<DistributedPtas, PtasError> {
    check_params(g, p)?;
    let r = power_radius(g.n(), p.k, p.epsilon);
    let dec = network_decomposition(g, r, seed)?;
    let bound = 2 * p.k * growth_steps(g.n(), p.epsilon);
    let mut h = EdgeSubset::new(g.m());
    let mut uncovered = initial_targets(g, p.k, p.variant);
    let mut steps: Vec<PtasStep> = Vec::with_capacity(g.n());
    let mut clusters: Vec<Vec<VertexId>> = vec![Vec::new(); dec.clusters];
    for v in 0..g.n() {
        clusters[dec.cluster[v]].push(v);
    }
    for color in 0..dec.colors {
        let active: Vec<&Vec<VertexId>> = clusters.iter().filter(|c| dec.color[c[0]] == color).collect();
        let results = par::map(exec, &active, |members| -> Result<(Vec<PtasStep>, Vec<EdgeId>, Vec<EdgeId>), PtasError> {
            let reg = region(g, members, r);
            let lift = |ids: &EdgeSubset| EdgeSubset::from_ids(reg.graph.m(), (0..reg.edge.len()).filter(|&i| ids.contains(reg.edge[i])));
            let mut lh = lift(&h);
            let mut lu = lift(&uncovered);
            let mut local_steps = Vec::with_capacity(members.len());
            for &v in members.iter() {
                let mut s = step_at(&reg.graph, p, bound, reg.local_vertex[&v], &mut lh, &mut lu)?;
                s.vertex = v;
                s.region = s.region.iter().map(|&e| reg.edge[e]).collect();
                s.added = s.added.iter().map(|&e| reg.edge[e]).collect();
                local_steps.push(s);
            }
            let added = lh.iter().map(|e| reg.edge[e]).collect();
            let covered = (0..reg.edge.len()).filter(|&i| !lu.contains(i)).map(|i| reg.edge[i]).collect();
            debug_assert_eq!(reg.vertex.len(), reg.graph.n());
            Ok((local_steps, added, covered))
        });
        for res in results {
            let (local_steps, added, covered) = res?;
            for e in added {
                h.insert(e);
            }
            for e in covered {
                uncovered.remove(e);
            }
            steps.extend(local_steps);
        }
    }
    let mut order: Vec<VertexId> = (0..g.n()).collect();
    order.sort_by_key(|&v| (dec.color[v], v));
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    steps.sort_by_key(|s| pos[&s.vertex]);
    let gather = dec.colors * (2 * dec.cap + 1) * r;
    let rounds = dec.power_rounds * r + gather;
    let run = PtasRun { cost: spanner_cost(g, &h), h, steps, radius_bound: bound };
    Ok(DistributedPtas { run, decomposition: dec, order, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::min_spanner_exact;
    use proptest::prelude::*;

    fn unweighted(k: usize, eps: &str) -> PtasParams {
        PtasParams::new(k, parse_ratio(eps).unwrap(), Variant::Unweighted)
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, false, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_edges(4, false, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn parses_exact_ratios() {
        assert_eq!(parse_ratio("0.5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_ratio("1/3").unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_ratio("2").unwrap(), Ratio::new(2, 1));
        assert_eq!(parse_ratio(".25").unwrap(), Ratio::new(1, 4));
        for bad in ["0", "-1", "x", "1/0", ""] {
            assert!(parse_ratio(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn growth_steps_are_exact() {
        assert_eq!(growth_steps(1, Ratio::new(1, 1)), 0);
        // 2^4 = 16 >= 16.
        assert_eq!(growth_steps(4, Ratio::new(1, 1)), 4);
        // 1.5^7 < 25 <= 1.5^8.
        assert_eq!(growth_steps(5, Ratio::new(1, 2)), 8);
        assert_eq!(power_radius(4, 2, Ratio::new(1, 1)), 16 + 8 + 1);
    }

    #[test]
    fn ball_sizes() {
        let tree = Graph::from_edges(5, false, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let all = tree.full_subset();
        assert_eq!(ball_spanner_size(&tree, 1, 1, 2, Variant::Unweighted, &all, OracleBudget::default()).unwrap().0, 3);
        assert_eq!(ball_spanner_size(&tree, 1, 2, 2, Variant::Unweighted, &all, OracleBudget::default()).unwrap().0, 4);
        let g = k4();
        let (size, witness) = ball_spanner_size(&g, 0, 2, 2, Variant::Unweighted, &g.full_subset(), OracleBudget::default()).unwrap();
        assert_eq!(size, 3);
        assert_eq!(witness.len(), 3);
        let none = EdgeSubset::new(g.m());
        assert_eq!(ball_spanner_size(&g, 0, 2, 2, Variant::Unweighted, &none, OracleBudget::default()).unwrap().0, 0);
    }

    #[test]
    fn trees_keep_every_edge() {
        for seed in 0..5 {
            let g = crate::generate::random_connected(12, 0.0, seed);
            let p = unweighted(2, "0.5");
            let run = ptas_sequential(&g, &p, &(0..g.n()).collect::<Vec<_>>()).unwrap();
            assert_eq!(run.h.len(), g.m());
            let d = ptas_distributed(&g, &p, seed, Execution::Sequential).unwrap();
            assert_eq!(d.run.h.len(), g.m());
        }
    }

    #[test]
    fn five_cycle_needs_all_edges() {
        let g = cycle(5);
        let p = unweighted(2, "0.5");
        let run = ptas_sequential(&g, &p, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(run.cost, 5);
        assert!(check_ptas_run(&g, &p, &run).ok());
        for seed in 0..4 {
            assert_eq!(ptas_distributed(&g, &p, seed, Execution::Sequential).unwrap().run.cost, 5);
        }
    }

    #[test]
    fn complete_graph_within_factor_two() {
        let g = k4();
        let p = unweighted(2, "1");
        let run = ptas_sequential(&g, &p, &[0, 1, 2, 3]).unwrap();
        assert!((3..=6).contains(&run.cost));
        assert!(check_ptas_run(&g, &p, &run).ok());
    }

    #[test]
    fn decomposition_small_cases() {
        let single = Graph::from_edges(1, false, &[]).unwrap();
        let d = network_decomposition(&single, 1, 0).unwrap();
        assert_eq!((d.colors, d.clusters), (1, 1));
        let path = Graph::from_edges(10, false, &(0..9).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap();
        for seed in 0..10 {
            let d = network_decomposition(&path, 2, seed).unwrap();
            assert!(check_decomposition(&path, &d).is_empty());
        }
        let g = crate::generate::random_connected(9, 1.0, 0);
        for seed in 0..10 {
            let d = network_decomposition(&g, 1, seed).unwrap();
            assert!(check_decomposition(&g, &d).is_empty());
        }
    }

    #[test]
    fn distributed_matches_oracle_on_small_random_graphs() {
        let g = crate::generate::random_connected(12, 0.35, 7);
        let (opt, _) = min_spanner_exact(&g, 2, Variant::Unweighted, OracleBudget::default()).unwrap();
        let p = unweighted(2, "1");
        for seed in 0..20 {
            let d = ptas_distributed(&g, &p, seed, Execution::Sequential).unwrap();
            assert!(d.run.cost <= 2 * opt, "seed {seed}: {} vs {opt}", d.run.cost);
            assert!(check_ptas_run(&g, &p, &d.run).ok());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn distributed_equals_sequential_in_label_order(n in 2usize..14, p in 0.1f64..0.5, seed in 0u64..500) {
            let g = crate::generate::random_connected(n, p, seed);
            let params = unweighted(2, "0.5");
            let d = ptas_distributed(&g, &params, seed, Execution::Parallel).unwrap();
            let s = ptas_sequential(&g, &params, &d.order).unwrap();
            prop_assert_eq!(&d.run.h, &s.h);
            prop_assert_eq!(&d.run.steps, &s.steps);
            let rep = check_ptas_run(&g, &params, &s);
            prop_assert!(rep.ok(), "{:?}", rep.violations);
        }

        #[test]
        fn decomposition_invariants(n in 1usize..40, p in 0.05f64..0.4, r in 1usize..4, seed in 0u64..1000) {
            let g = crate::generate::random_connected(n, p, seed);
            let d = network_decomposition(&g, r, seed).unwrap();
            let bad = check_decomposition(&g, &d);
            prop_assert!(bad.is_empty(), "{:?}", bad);
        }
    }
}
