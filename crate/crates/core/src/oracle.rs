//! Exact solvers used as ground truth: minimum k-spanners by
//! branch-and-bound over covering paths, minimum vertex cover, minimum
//! dominating set, and brute-force densest subgraphs and stars.
//!
//! Searches run single-threaded in a fixed branching order, so witnesses
//! are reproducible.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::Ratio;
use crate::error::GraphError;
use crate::graph::{EdgeId, EdgeSubset, Graph, VertexId};
use crate::star::{StarProblem, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_edges: usize,
    pub max_vertices: usize,
    pub max_nodes: u64,
    pub time_cap: Option<Duration>,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_edges: 400, max_vertices: 64, max_nodes: 200_000_000, time_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {actual} {what}, budget allows {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },
    #[error("search node budget of {0} exhausted")]
    NodeBudget(u64),
    #[error("time cap of {0:?} exceeded")]
    TimeCap(Duration),
    #[error("edges {0:?} cannot be covered")]
    Infeasible(Vec<EdgeId>),
    #[error("variant {} does not match the graph", .0.name())]
    VariantMismatch(Variant),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

struct Meter {
    budget: OracleBudget,
    nodes: u64,
    start: Instant,
}

impl Meter {
    fn new(budget: OracleBudget) -> Self {
        Meter { budget, nodes: 0, start: Instant::now() }
    }

    fn tick(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(OracleError::NodeBudget(self.budget.max_nodes));
        }
        if self.nodes.is_multiple_of(4096) {
            if let Some(cap) = self.budget.time_cap {
                if self.start.elapsed() > cap {
                    return Err(OracleError::TimeCap(cap));
                }
            }
        }
        Ok(())
    }
}

fn check_size(what: &'static str, actual: usize, limit: usize) -> Result<(), OracleError> {
    if actual > limit {
        Err(OracleError::TooLarge { what, actual, limit })
    } else {
        Ok(())
    }
}

/// Minimum-cost k-spanner of the whole graph.
pub fn min_spanner_exact(g: &Graph, k: usize, variant: Variant, budget: OracleBudget) -> Result<(u64, EdgeSubset), OracleError> {
    variant.check(g).map_err(|_| OracleError::VariantMismatch(variant))?;
    check_size("vertices", g.n(), budget.max_vertices)?;
    check_size("edges", g.m(), budget.max_edges)?;
    let cs = variant == Variant::ClientServer;
    let targets: Vec<EdgeId> = (0..g.m()).filter(|&e| !cs || g.edge(e).client).collect();
    let candidates = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| !cs || g.edge(e).server));
    let weighted = variant == Variant::Weighted;
    min_cover_spanner(g, k, &targets, &candidates, |e| if weighted { g.weight(e) } else { 1 }, budget)
}

/// Minimum-cost subset of `candidates` giving every target a path of
/// length at most `k` (orientation respected).
pub fn min_cover_spanner(
    g: &Graph,
    k: usize,
    targets: &[EdgeId],
    candidates: &EdgeSubset,
    cost: impl Fn(EdgeId) -> u64,
    budget: OracleBudget,
) -> Result<(u64, EdgeSubset), OracleError> {
    if k < 1 {
        return Err(GraphError::InvalidStretch(k).into());
    }
    let mut meter = Meter::new(budget);
    let mut chosen = EdgeSubset::new(g.m());
    for e in candidates.iter() {
        if cost(e) == 0 {
            chosen.insert(e);
        }
    }

    // Variables are the positive-cost candidates that occur on some path.
    let mut var_of = vec![usize::MAX; g.m()];
    let mut var_edge: Vec<EdgeId> = Vec::new();
    let mut var_cost: Vec<u64> = Vec::new();
    let mut target_paths: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut infeasible = Vec::new();
    for &t in targets {
        let edge = g.edge(t);
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut free = false;
        for path in simple_paths(g, candidates, edge.u, edge.v, k, &mut meter)? {
            let mut vars: Vec<usize> = Vec::new();
            for e in path {
                if cost(e) == 0 {
                    continue;
                }
                if var_of[e] == usize::MAX {
                    var_of[e] = var_edge.len();
                    var_edge.push(e);
                    var_cost.push(cost(e));
                }
                vars.push(var_of[e]);
            }
            if vars.is_empty() {
                free = true;
                break;
            }
            vars.sort_unstable();
            paths.push(vars);
        }
        if free {
            continue;
        }
        if paths.is_empty() {
            infeasible.push(t);
            continue;
        }
        // Drop paths that contain another path of the same target.
        paths.sort_unstable_by_key(|p| (p.len(), p.clone()));
        paths.dedup();
        let mut kept: Vec<Vec<usize>> = Vec::new();
        for p in paths {
            if !kept.iter().any(|q| q.iter().all(|x| p.binary_search(x).is_ok())) {
                kept.push(p);
            }
        }
        target_paths.push(kept);
    }
    if !infeasible.is_empty() {
        return Err(OracleError::Infeasible(infeasible));
    }
    check_size("search variables", var_edge.len(), budget.max_edges)?;

    let mut search = CoverSearch {
        costs: var_cost,
        paths: target_paths,
        status: vec![Status::Open; var_edge.len()],
        best_cost: u64::MAX,
        best: Vec::new(),
        stamp: vec![0; var_edge.len()],
        epoch: 0,
    };
    let (ub, greedy) = search.greedy();
    search.best_cost = ub;
    search.best = greedy;
    search.branch(0, &mut meter)?;
    let base: u64 = chosen.iter().map(&cost).sum();
    for (i, &take) in search.best.iter().enumerate() {
        if take {
            chosen.insert(var_edge[i]);
        }
    }
    Ok((base + search.best_cost, chosen))
}

/// All simple paths of length at most `k` from `s` to `t` over `allowed`
/// edges, as edge lists.
fn simple_paths(
    g: &Graph,
    allowed: &EdgeSubset,
    s: VertexId,
    t: VertexId,
    k: usize,
    meter: &mut Meter,
) -> Result<Vec<Vec<EdgeId>>, OracleError> {
    fn walk(
        g: &Graph,
        allowed: &EdgeSubset,
        x: VertexId,
        t: VertexId,
        left: usize,
        on_path: &mut Vec<bool>,
        edges: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
        meter: &mut Meter,
    ) -> Result<(), OracleError> {
        meter.tick()?;
        if x == t {
            out.push(edges.clone());
            return Ok(());
        }
        if left == 0 {
            return Ok(());
        }
        for &(y, e) in g.out_edges(x) {
            if allowed.contains(e) && !on_path[y] {
                on_path[y] = true;
                edges.push(e);
                walk(g, allowed, y, t, left - 1, on_path, edges, out, meter)?;
                edges.pop();
                on_path[y] = false;
            }
        }
        Ok(())
    }
    let mut on_path = vec![false; g.n()];
    on_path[s] = true;
    let mut out = Vec::new();
    walk(g, allowed, s, t, k, &mut on_path, &mut Vec::new(), &mut out, meter)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Open,
    In,
    Out,
}

struct CoverSearch {
    costs: Vec<u64>,
    paths: Vec<Vec<Vec<usize>>>,
    status: Vec<Status>,
    best_cost: u64,
    best: Vec<bool>,
    stamp: Vec<u64>,
    epoch: u64,
}

impl CoverSearch {
    fn alive(&self, p: &[usize]) -> bool {
        p.iter().all(|&x| self.status[x] != Status::Out)
    }

    fn done(&self, p: &[usize]) -> bool {
        p.iter().all(|&x| self.status[x] == Status::In)
    }

    fn open_cost(&self, p: &[usize]) -> u64 {
        p.iter().filter(|&&x| self.status[x] == Status::Open).map(|&x| self.costs[x]).sum()
    }

    fn greedy(&mut self) -> (u64, Vec<bool>) {
        let mut take = vec![false; self.costs.len()];
        for paths in &self.paths {
            if paths.iter().any(|p| p.iter().all(|&x| take[x])) {
                continue;
            }
            let best = paths
                .iter()
                .min_by_key(|p| p.iter().filter(|&&x| !take[x]).map(|&x| self.costs[x]).sum::<u64>())
                .expect("feasible target");
            for &x in best {
                take[x] = true;
            }
        }
        let cost = take.iter().zip(&self.costs).filter(|(t, _)| **t).map(|(_, c)| c).sum();
        (cost, take)
    }

    fn branch(&mut self, cost: u64, meter: &mut Meter) -> Result<(), OracleError> {
        meter.tick()?;
        // Open targets with their cheapest completion, and the target with
        // the fewest live paths.
        let mut open: Vec<(u64, usize)> = Vec::new();
        let mut pick: Option<(usize, usize, u64)> = None;
        for (t, paths) in self.paths.iter().enumerate() {
            if paths.iter().any(|p| self.done(p)) {
                continue;
            }
            let mut live = 0;
            let mut cheapest = u64::MAX;
            for p in paths.iter().filter(|p| self.alive(p)) {
                live += 1;
                cheapest = cheapest.min(self.open_cost(p));
            }
            if live == 0 {
                return Ok(());
            }
            open.push((cheapest, t));
            let better = match pick {
                None => true,
                Some((_, l, c)) => live < l || (live == l && cheapest > c),
            };
            if better {
                pick = Some((t, live, cheapest));
            }
        }
        let Some((target, _, _)) = pick else {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.status.iter().map(|&s| s == Status::In).collect();
            }
            return Ok(());
        };
        if cost + self.lower_bound(&mut open) >= self.best_cost {
            return Ok(());
        }
        // Branch on the open variable shared by most live paths of the target.
        let mut count: Vec<(usize, usize)> = Vec::new();
        for p in self.paths[target].iter().filter(|p| self.alive(p)) {
            for &x in p.iter().filter(|&&x| self.status[x] == Status::Open) {
                match count.iter_mut().find(|(y, _)| *y == x) {
                    Some(entry) => entry.1 += 1,
                    None => count.push((x, 1)),
                }
            }
        }
        let &(x, _) = count
            .iter()
            .max_by_key(|&&(x, c)| (c, std::cmp::Reverse(self.costs[x]), std::cmp::Reverse(x)))
            .expect("an open target has an open variable");
        self.status[x] = Status::In;
        self.branch(cost + self.costs[x], meter)?;
        self.status[x] = Status::Out;
        self.branch(cost, meter)?;
        self.status[x] = Status::Open;
        Ok(())
    }

    /// Sum of cheapest completions over open targets whose live paths use
    /// pairwise disjoint open variables.
    fn lower_bound(&mut self, open: &mut [(u64, usize)]) -> u64 {
        open.sort_unstable_by(|a, b| b.cmp(a));
        self.epoch += 1;
        let mut bound = 0;
        for &(cheapest, t) in open.iter() {
            if cheapest == 0 {
                break;
            }
            let vars: Vec<usize> = self.paths[t]
                .iter()
                .filter(|p| self.alive(p))
                .flat_map(|p| p.iter().copied().filter(|&x| self.status[x] == Status::Open))
                .collect();
            if vars.iter().any(|&x| self.stamp[x] == self.epoch) {
                continue;
            }
            for x in vars {
                self.stamp[x] = self.epoch;
            }
            bound += cheapest;
        }
        bound
    }
}

/// Minimum vertex cover of an undirected graph.
pub fn min_vertex_cover_exact(g: &Graph, budget: OracleBudget) -> Result<(usize, Vec<VertexId>), OracleError> {
    check_size("vertices", g.n(), budget.max_vertices.min(64))?;
    let adj = masks(g);
    let mut meter = Meter::new(budget);
    let mut best = (0..g.n()).fold(0u64, |m, v| if adj[v] != 0 { m | 1 << v } else { m });
    vc_branch(&adj, 0, &mut best, &mut meter)?;
    Ok((best.count_ones() as usize, bits(best)))
}

fn masks(g: &Graph) -> Vec<u64> {
    (0..g.n()).map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u)).collect()
}

fn bits(mask: u64) -> Vec<VertexId> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn vc_branch(adj: &[u64], cover: u64, best: &mut u64, meter: &mut Meter) -> Result<(), OracleError> {
    meter.tick()?;
    // Uncovered degrees and a greedy matching for the lower bound.
    let open = |v: usize| if cover >> v & 1 == 1 { 0 } else { adj[v] & !cover };
    let Some(x) = (0..adj.len()).filter(|&v| open(v) != 0).max_by_key(|&v| (open(v).count_ones(), std::cmp::Reverse(v)))
    else {
        if cover.count_ones() < best.count_ones() {
            *best = cover;
        }
        return Ok(());
    };
    let mut matched = 0u64;
    let mut matching = 0;
    for v in 0..adj.len() {
        if matched >> v & 1 == 1 {
            continue;
        }
        let free = open(v) & !matched;
        if free != 0 {
            let u = free.trailing_zeros();
            matched |= 1 << v | 1 << u;
            matching += 1;
        }
    }
    if cover.count_ones() + matching >= best.count_ones() {
        return Ok(());
    }
    vc_branch(adj, cover | 1 << x, best, meter)?;
    vc_branch(adj, cover | open(x), best, meter)
}

/// Minimum dominating set of an undirected graph.
pub fn min_dominating_set_exact(g: &Graph, budget: OracleBudget) -> Result<(usize, Vec<VertexId>), OracleError> {
    check_size("vertices", g.n(), budget.max_vertices.min(64))?;
    let n = g.n();
    let closed: Vec<u64> = masks(g).into_iter().enumerate().map(|(v, m)| m | 1 << v).collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut meter = Meter::new(budget);
    let mut best = all;
    ds_branch(&closed, all, 0, 0, 0, &mut best, &mut meter)?;
    Ok((best.count_ones() as usize, bits(best)))
}

fn ds_branch(
    closed: &[u64],
    all: u64,
    chosen: u64,
    dominated: u64,
    banned: u64,
    best: &mut u64,
    meter: &mut Meter,
) -> Result<(), OracleError> {
    meter.tick()?;
    let left = all & !dominated;
    if left == 0 {
        if chosen.count_ones() < best.count_ones() {
            *best = chosen;
        }
        return Ok(());
    }
    let gain = |w: usize| (closed[w] & left).count_ones();
    let reach = (0..closed.len()).filter(|&w| banned >> w & 1 == 0).map(gain).max().unwrap_or(0);
    if reach == 0 {
        return Ok(());
    }
    let need = left.count_ones().div_ceil(reach);
    if chosen.count_ones() + need >= best.count_ones() {
        return Ok(());
    }
    // The undominated vertex with the fewest allowed dominators.
    let options = |u: usize| closed[u] & !banned;
    let u = bits(left).into_iter().min_by_key(|&u| (options(u).count_ones(), u)).expect("nonempty");
    let mut choices = bits(options(u));
    choices.sort_by_key(|&w| (std::cmp::Reverse(gain(w)), w));
    let mut banned = banned;
    for w in choices {
        ds_branch(closed, all, chosen | 1 << w, dominated | closed[w], banned, best, meter)?;
        banned |= 1 << w;
    }
    Ok(())
}

/// Densest subgraph by enumeration: maximizes `|E(U)| / c(U)` (unit costs
/// when `weights` is `None`), preferring smaller then lexicographically
/// smaller sets. Zero-cost sets have density zero.
pub fn densest_subgraph_brute(k: usize, pairs: &[(usize, usize)], weights: Option<&[u64]>) -> (Vec<usize>, Ratio) {
    assert!((1..=24).contains(&k), "enumeration limited to 24 vertices");
    let cost = |i: usize| weights.map_or(1, |w| w[i]);
    let mut best: Option<(Vec<usize>, Ratio)> = None;
    for mask in 1u32..(1 << k) {
        let set: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let num = pairs.iter().filter(|&&(a, b)| mask >> a & 1 == 1 && mask >> b & 1 == 1).count() as u64;
        let den = set.iter().map(|&i| cost(i)).sum();
        let r = Ratio::new(num, den);
        let better = match &best {
            None => true,
            Some((bs, br)) => r > *br || (r == *br && (set.len(), &set) < (bs.len(), bs)),
        };
        if better {
            best = Some((set, r));
        }
    }
    best.expect("k >= 1")
}

/// Exact densest star of a local instance by enumeration over slot
/// subsets (all variants, including the exact directed optimum).
pub fn densest_star_brute(p: &StarProblem) -> (Vec<bool>, Ratio) {
    let k = p.slots().len();
    assert!((1..=20).contains(&k), "enumeration limited to 20 slots");
    let mut best: Option<(Vec<bool>, Ratio)> = None;
    for m in 1u32..(1 << k) {
        let mask: Vec<bool> = (0..k).map(|i| m >> i & 1 == 1).collect();
        let r = p.density(&mask);
        let better = best.as_ref().is_none_or(|(bm, br)| {
            r > *br || (r == *br && (m.count_ones() as usize, lex_key(&mask)) < (bm.iter().filter(|&&b| b).count(), lex_key(bm)))
        });
        if better {
            best = Some((mask, r));
        }
    }
    best.expect("k >= 1")
}

fn lex_key(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{verify_spanner, Graph, SpannerMode};
    use proptest::prelude::*;

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        Graph::from_edges(n, false, &e).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, false, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, false, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    /// Unpruned enumeration over all edge subsets.
    fn enumerate_spanner(g: &Graph, k: usize, weighted: bool) -> u64 {
        let m = g.m();
        let mut best = u64::MAX;
        for mask in 0u32..(1 << m) {
            let h = EdgeSubset::from_ids(m, (0..m).filter(|&e| mask >> e & 1 == 1));
            let cost: u64 = h.iter().map(|e| if weighted { g.weight(e) } else { 1 }).sum();
            if cost < best && verify_spanner(g, &h, k, SpannerMode::Plain).unwrap().valid {
                best = cost;
            }
        }
        best
    }

    #[test]
    fn spanner_examples() {
        let b = OracleBudget::default();
        assert_eq!(min_spanner_exact(&complete(4), 2, Variant::Unweighted, b).unwrap().0, 3);
        assert_eq!(min_spanner_exact(&cycle(5), 2, Variant::Unweighted, b).unwrap().0, 5);
        let tri = Graph::from_weighted_edges(3, false, &[(0, 1, 1), (0, 2, 1), (1, 2, 10)]).unwrap();
        assert_eq!(min_spanner_exact(&tri, 2, Variant::Weighted, b).unwrap().0, 2);
        // Frozen values agree with plain enumeration.
        assert_eq!(enumerate_spanner(&complete(4), 2, false), 3);
        assert_eq!(enumerate_spanner(&cycle(5), 2, false), 5);
        assert_eq!(enumerate_spanner(&tri, 2, true), 2);
    }

    #[test]
    fn infeasible_client_edge_reported() {
        let mut b = crate::graph::GraphBuilder::new(3).client_server(true);
        b.full_edge(0, 1, 1, true, false).unwrap();
        b.full_edge(1, 2, 1, false, true).unwrap();
        let g = b.build().unwrap();
        let err = min_spanner_exact(&g, 2, Variant::ClientServer, OracleBudget::default()).unwrap_err();
        assert_eq!(err, OracleError::Infeasible(vec![0]));
    }

    #[test]
    fn budget_is_enforced() {
        let tight = OracleBudget { max_nodes: 5, ..OracleBudget::default() };
        assert!(matches!(
            min_spanner_exact(&complete(6), 2, Variant::Unweighted, tight),
            Err(OracleError::NodeBudget(5))
        ));
        let small = OracleBudget { max_edges: 3, ..OracleBudget::default() };
        assert!(matches!(
            min_spanner_exact(&complete(4), 2, Variant::Unweighted, small),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn vertex_cover_examples() {
        let b = OracleBudget::default();
        assert_eq!(min_vertex_cover_exact(&path(3), b).unwrap(), (1, vec![1]));
        assert_eq!(min_vertex_cover_exact(&cycle(5), b).unwrap().0, 3);
        assert_eq!(min_vertex_cover_exact(&complete(4), b).unwrap().0, 3);
    }

    #[test]
    fn dominating_set_examples() {
        let b = OracleBudget::default();
        let star = Graph::from_edges(5, false, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(min_dominating_set_exact(&star, b).unwrap(), (1, vec![0]));
        assert_eq!(min_dominating_set_exact(&cycle(4), b).unwrap().0, 2);
        assert_eq!(min_dominating_set_exact(&path(7), b).unwrap().0, 3);
    }

    #[test]
    fn densest_brute_examples() {
        assert_eq!(densest_subgraph_brute(3, &[(0, 1), (0, 2), (1, 2)], None), (vec![0, 1, 2], Ratio::new(1, 1)));
        // K4 minus one edge: the full set has 5/4, the triangles 1.
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)];
        assert_eq!(densest_subgraph_brute(4, &pairs, None), (vec![0, 1, 2, 3], Ratio::new(5, 4)));
        assert_eq!(densest_subgraph_brute(3, &[], None), (vec![0], Ratio::ZERO));
    }

    fn small_graph() -> impl Strategy<Value = (Graph, bool)> {
        (2usize..7, proptest::collection::vec((0usize..7, 0usize..7, 0u64..4), 0..12), any::<bool>(), any::<bool>())
            .prop_map(|(n, raw, directed, weighted)| {
                let mut b = crate::graph::GraphBuilder::new(n).directed(directed).weighted(weighted && !directed);
                for (u, v, w) in raw {
                    if u < n && v < n && u != v {
                        let _ = b.weighted_edge(u, v, if weighted && !directed { w } else { 1 });
                    }
                }
                (b.build().unwrap(), weighted && !directed)
            })
            .prop_filter("at most 12 edges", |(g, _)| g.m() <= 12)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn branch_and_bound_matches_enumeration((g, weighted) in small_graph(), k in 1usize..4) {
            let variant = if g.is_directed() { Variant::Directed } else if weighted { Variant::Weighted } else { Variant::Unweighted };
            let (cost, h) = min_spanner_exact(&g, k, variant, OracleBudget::default()).unwrap();
            prop_assert!(verify_spanner(&g, &h, k, SpannerMode::Plain).unwrap().valid);
            let witness_cost: u64 = h.iter().map(|e| if weighted { g.weight(e) } else { 1 }).sum();
            prop_assert_eq!(witness_cost, cost);
            prop_assert_eq!(cost, enumerate_spanner(&g, k, weighted));
        }

        #[test]
        fn cover_and_domination_witnesses(n in 1usize..10, raw in proptest::collection::vec((0usize..10, 0usize..10), 0..25)) {
            let mut b = crate::graph::GraphBuilder::new(n);
            for (u, v) in raw {
                if u < n && v < n && u != v {
                    let _ = b.edge(u, v);
                }
            }
            let g = b.build().unwrap();
            let (size, cover) = min_vertex_cover_exact(&g, OracleBudget::default()).unwrap();
            prop_assert_eq!(size, cover.len());
            prop_assert!(g.edges().iter().all(|e| cover.contains(&e.u) || cover.contains(&e.v)));
            let (dsize, dom) = min_dominating_set_exact(&g, OracleBudget::default()).unwrap();
            prop_assert_eq!(dsize, dom.len());
            prop_assert!((0..n).all(|v| dom.contains(&v) || g.neighbors(v).iter().any(|u| dom.contains(u))));
            // Compare optimal sizes with plain enumeration.
            let mut best_vc = n;
            let mut best_ds = n;
            for mask in 0u32..(1 << n) {
                let inside = |v: usize| mask >> v & 1 == 1;
                let c = mask.count_ones() as usize;
                if g.edges().iter().all(|e| inside(e.u) || inside(e.v)) {
                    best_vc = best_vc.min(c);
                }
                if (0..n).all(|v| inside(v) || g.neighbors(v).iter().any(|&u| inside(u))) {
                    best_ds = best_ds.min(c);
                }
            }
            prop_assert_eq!(size, best_vc);
            prop_assert_eq!(dsize, best_ds);
        }
    }
}
