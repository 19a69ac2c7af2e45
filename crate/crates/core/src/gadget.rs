//! Hardness gadgets: the set-disjointness graph `G(l, b)`, its weighted
//! variants, and the vertex-cover reduction graph `G_S`.
//!
//! Vertex numbering of `G(l, b)` lays out groups in the order X1, Y1, X2,
//! Y2, Y3. X1 holds `x1_1..x1_l` then `x2_1..x2_l`, Y1 likewise, X2 and Y2
//! are row-major in `(i, j)`. Indices in the API are zero-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GraphError;
use crate::graph::{
    spanner_cost, truncated_bfs, verify_spanner, EdgeId, EdgeSubset, Graph, GraphBuilder, GraphFlags, SpannerMode, VertexId,
};

/// Size constant of the disjoint-input spanner bound.
pub const SIZE_CONSTANT: usize = 7;

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("parameters must be positive, got l = {l}, b = {beta}")]
    Parameters { l: usize, beta: usize },
    #[error("input strings need {expected} bits, got {a} and {b}")]
    StringLength { expected: usize, a: usize, b: usize },
    #[error("input strings may only contain 0 and 1")]
    NotBinary,
    #[error("stretch must be at least {min}, got {k}")]
    Stretch { k: usize, min: usize },
    #[error("source graph must be undirected and unweighted")]
    Source,
    #[error("vertex set does not cover edge {0}")]
    NotACover(EdgeId),
    #[error("edge set is not a 2-spanner of the reduction graph, uncovered {0:?}")]
    NotASpanner(Vec<EdgeId>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>, GadgetError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(GadgetError::NotBinary),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn check_strings(l: usize, a: &[bool], b: &[bool]) -> Result<(), GadgetError> {
    if a.len() != l * l || b.len() != l * l {
        return Err(GadgetError::StringLength { expected: l * l, a: a.len(), b: b.len() });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub vertices: Vec<VertexId>,
}

/// Positions of the named vertices of the two-party gadgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub l: usize,
    pub beta: usize,
}

impl Layout {
    pub fn x1(&self, i: usize) -> VertexId {
        i
    }
    pub fn x2(&self, i: usize) -> VertexId {
        self.l + i
    }
    pub fn y1(&self, i: usize) -> VertexId {
        2 * self.l + i
    }
    pub fn y2(&self, i: usize) -> VertexId {
        3 * self.l + i
    }
    /// `x_ij` in X2.
    pub fn x(&self, i: usize, j: usize) -> VertexId {
        4 * self.l + i * self.beta + j
    }
    /// `y_ij` in Y2.
    pub fn y(&self, i: usize, j: usize) -> VertexId {
        4 * self.l + self.l * self.beta + i * self.beta + j
    }
    /// `y3_i` in Y3, or the first path vertex after `y2_i` in the
    /// undirected weighted gadget.
    pub fn y3(&self, i: usize) -> VertexId {
        4 * self.l + 2 * self.l * self.beta + i
    }
    fn groups(&self) -> Vec<Group> {
        let span = |name: &str, lo: usize, hi: usize| Group { name: name.to_string(), vertices: (lo..hi).collect() };
        let (l, lb) = (self.l, self.l * self.beta);
        vec![
            span("X1", 0, 2 * l),
            span("Y1", 2 * l, 4 * l),
            span("X2", 4 * l, 4 * l + lb),
            span("Y2", 4 * l + lb, 4 * l + 2 * lb),
        ]
    }
    fn y1_side(&self, n: usize) -> Vec<bool> {
        (0..n).map(|v| (2 * self.l..4 * self.l).contains(&v)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DisjointnessGadget {
    pub graph: Graph,
    pub layout: Layout,
    pub a: Vec<bool>,
    pub b: Vec<bool>,
    pub groups: Vec<Group>,
    /// Edge ids of the complete bipartite block X2 x Y2.
    pub d: Vec<EdgeId>,
    /// `true` for vertices in Bob's side Y1.
    pub side_b: Vec<bool>,
    pub c: usize,
    /// Spanner size bound for disjoint inputs.
    pub threshold: usize,
}

impl DisjointnessGadget {
    pub fn intersecting(&self) -> Vec<(usize, usize)> {
        intersecting(self.layout.l, &self.a, &self.b)
    }

    pub fn cut_edges(&self) -> usize {
        cut_size(&self.graph, &self.side_b)
    }
}

fn intersecting(l: usize, a: &[bool], b: &[bool]) -> Vec<(usize, usize)> {
    (0..l).flat_map(|i| (0..l).map(move |r| (i, r))).filter(|&(i, r)| a[i * l + r] && b[i * l + r]).collect()
}

fn cut_size(g: &Graph, side: &[bool]) -> usize {
    g.edges().iter().filter(|e| side[e.u] != side[e.v]).count()
}

/// Builds `G(l, b)` for input strings of `l^2` bits each.
pub fn gen_disjointness_gadget(l: usize, beta: usize, a: &[bool], b: &[bool]) -> Result<DisjointnessGadget, GadgetError> {
    if l == 0 || beta == 0 {
        return Err(GadgetError::Parameters { l, beta });
    }
    check_strings(l, a, b)?;
    let lay = Layout { l, beta };
    let n = 2 * l * beta + 5 * l;
    let mut gb = GraphBuilder::new(n).directed(true);
    let mut d = Vec::with_capacity(l * l * beta * beta);
    for i in 0..l {
        gb.edge(lay.x1(i), lay.y1(i))?;
        gb.edge(lay.x2(i), lay.y2(i))?;
        gb.edge(lay.y2(i), lay.y3(i))?;
        for r in 0..l {
            if !a[i * l + r] {
                gb.edge(lay.x1(i), lay.x2(r))?;
            }
            if !b[i * l + r] {
                gb.edge(lay.y1(i), lay.y2(r))?;
            }
        }
        for j in 0..beta {
            gb.edge(lay.x(i, j), lay.x1(i))?;
            gb.edge(lay.y3(i), lay.y(i, j))?;
            for r in 0..l {
                for s in 0..beta {
                    d.push(gb.edge(lay.x(i, j), lay.y(r, s))?);
                }
            }
        }
    }
    let graph = gb.build()?;
    let mut groups = lay.groups();
    groups.push(Group { name: "Y3".to_string(), vertices: (lay.y3(0)..n).collect() });
    let side_b = lay.y1_side(n);
    d.sort_unstable();
    Ok(DisjointnessGadget {
        graph,
        layout: lay,
        a: a.to_vec(),
        b: b.to_vec(),
        groups,
        d,
        side_b,
        c: SIZE_CONSTANT,
        threshold: SIZE_CONSTANT * l * beta.max(l),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub k: usize,
    pub n: usize,
    pub d_edges: usize,
    pub cut_edges: usize,
    pub disjoint: bool,
    pub intersecting_pairs: usize,
    /// Size of `E \ D` when it is a valid k-spanner.
    pub non_d_spanner_size: Option<usize>,
    pub threshold: usize,
    pub forced_edges: usize,
    pub violations: Vec<String>,
}

impl ClaimsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the path claim for every `(x_ij, y_rs)` pair, the non-D spanner
/// bound for disjoint inputs and the forced D edges otherwise.
pub fn verify_gadget_claims(gadget: &DisjointnessGadget, k: usize) -> Result<ClaimsReport, GadgetError> {
    if k < 5 {
        return Err(GadgetError::Stretch { k, min: 5 });
    }
    let g = &gadget.graph;
    let Layout { l, beta } = gadget.layout;
    let mut rep = ClaimsReport {
        k,
        n: g.n(),
        d_edges: gadget.d.len(),
        cut_edges: gadget.cut_edges(),
        threshold: gadget.threshold,
        ..Default::default()
    };
    let mut bad = |m: String| rep.violations.push(m);
    if g.n() != 2 * l * beta + 5 * l {
        bad(format!("vertex count {} differs from 2lb + 5l", g.n()));
    }
    if gadget.d.len() != (l * beta) * (l * beta) {
        bad(format!("D has {} edges, expected (lb)^2", gadget.d.len()));
    }
    if rep.cut_edges != 3 * l {
        bad(format!("cut has {} edges, expected 3l", rep.cut_edges));
    }
    let inter = gadget.intersecting();
    let hit = |i: usize, r: usize| inter.contains(&(i, r));
    let mut non_d = g.full_subset();
    for &e in &gadget.d {
        non_d.remove(e);
    }
    for i in 0..l {
        for j in 0..beta {
            let dist = truncated_bfs(g, &non_d, gadget.layout.x(i, j), g.n());
            for r in 0..l {
                for s in 0..beta {
                    let got = dist[gadget.layout.y(r, s)];
                    if hit(i, r) && got != usize::MAX {
                        bad(format!("x_{i}{j} reaches y_{r}{s} outside D at distance {got}"));
                    }
                    if !hit(i, r) && got != 5 {
                        bad(format!("x_{i}{j} to y_{r}{s} outside D has length {got}, expected 5"));
                    }
                }
            }
        }
    }
    rep.disjoint = inter.is_empty();
    rep.intersecting_pairs = inter.len();
    if rep.disjoint {
        let report = verify_spanner(g, &non_d, k, SpannerMode::Plain)?;
        if report.valid {
            rep.non_d_spanner_size = Some(non_d.len());
            if non_d.len() > gadget.threshold {
                bad(format!("E \\ D has {} edges, bound {}", non_d.len(), gadget.threshold));
            }
        } else {
            bad(format!("E \\ D is not a {k}-spanner, uncovered {:?}", report.uncovered));
        }
    } else {
        let mut forced_at = vec![0usize; l * l];
        for &e in &gadget.d {
            let edge = g.edge(e);
            let mut h = g.full_subset();
            h.remove(e);
            let forced = truncated_bfs(g, &h, edge.u, k)[edge.v] > k;
            let (i, r) = ((edge.u - 4 * l) / beta, (edge.v - 4 * l - l * beta) / beta);
            if forced != hit(i, r) {
                bad(format!("D edge {e} forced = {forced}, index pair ({i}, {r}) intersecting = {}", hit(i, r)));
            }
            if forced {
                forced_at[i * l + r] += 1;
                rep.forced_edges += 1;
            }
        }
        for &(i, r) in &inter {
            if forced_at[i * l + r] < beta * beta {
                bad(format!("pair ({i}, {r}) forces {} edges, expected b^2", forced_at[i * l + r]));
            }
        }
        // Far-from-disjoint inputs force a constant fraction of D.
        if 12 * inter.len() >= l * l && 12 * rep.forced_edges < beta * beta * l * l {
            bad(format!("{} forced edges below b^2 l^2 / 12", rep.forced_edges));
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct WeightedGadget {
    pub graph: Graph,
    pub layout: Layout,
    pub k: usize,
    pub directed: bool,
    pub a: Vec<bool>,
    pub b: Vec<bool>,
    pub groups: Vec<Group>,
    pub d: Vec<EdgeId>,
    pub side_b: Vec<bool>,
}

/// Builds the weighted gadget: `b = 1`, D edges of weight 1, all others 0.
/// The directed form joins `y2_i` to `y_i` by an arc; the undirected form
/// uses a 0-weight path of length `k - 3`.
pub fn gen_weighted_gadget(l: usize, k: usize, directed: bool, a: &[bool], b: &[bool]) -> Result<WeightedGadget, GadgetError> {
    if k < 4 {
        return Err(GadgetError::Stretch { k, min: 4 });
    }
    if l == 0 {
        return Err(GadgetError::Parameters { l, beta: 1 });
    }
    check_strings(l, a, b)?;
    let lay = Layout { l, beta: 1 };
    let inner = if directed { 0 } else { k - 4 };
    let n = 6 * l + l * inner;
    let mut gb = GraphBuilder::with_flags(n, GraphFlags { directed, weighted: true, client_server: false });
    let mut d = Vec::with_capacity(l * l);
    for i in 0..l {
        gb.weighted_edge(lay.x1(i), lay.y1(i), 0)?;
        gb.weighted_edge(lay.x2(i), lay.y2(i), 0)?;
        gb.weighted_edge(lay.x(i, 0), lay.x1(i), 0)?;
        let mut prev = lay.y2(i);
        for t in 0..inner {
            let next = 6 * l + i * inner + t;
            gb.weighted_edge(prev, next, 0)?;
            prev = next;
        }
        gb.weighted_edge(prev, lay.y(i, 0), 0)?;
        for r in 0..l {
            if !a[i * l + r] {
                gb.weighted_edge(lay.x1(i), lay.x2(r), 0)?;
            }
            if !b[i * l + r] {
                gb.weighted_edge(lay.y1(i), lay.y2(r), 0)?;
            }
            d.push(gb.weighted_edge(lay.x(i, 0), lay.y(r, 0), 1)?);
        }
    }
    let graph = gb.build()?;
    let mut groups = lay.groups();
    if inner > 0 {
        groups.push(Group { name: "paths".to_string(), vertices: (6 * l..n).collect() });
    }
    let side_b = lay.y1_side(n);
    Ok(WeightedGadget { graph, layout: lay, k, directed, a: a.to_vec(), b: b.to_vec(), groups, d, side_b })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedReport {
    pub k: usize,
    pub n: usize,
    pub disjoint: bool,
    pub zero_cost_spanner: bool,
    /// `(i, r)` pairs whose D edge has no 0-weight path of length at most k.
    pub blocked: Vec<(usize, usize)>,
    pub violations: Vec<String>,
}

impl WeightedReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that a 0-cost k-spanner exists exactly when the inputs are
/// disjoint, by BFS over the 0-weight edges.
pub fn verify_weighted_gadget(gadget: &WeightedGadget) -> Result<WeightedReport, GadgetError> {
    let g = &gadget.graph;
    let (k, l) = (gadget.k, gadget.layout.l);
    let zero = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| g.weight(e) == 0));
    let mut rep = WeightedReport { k, n: g.n(), ..Default::default() };
    let expected_n = if gadget.directed { 6 * l } else { 6 * l + l * (k - 4) };
    if g.n() != expected_n {
        rep.violations.push(format!("vertex count {}, expected {expected_n}", g.n()));
    }
    for &e in &gadget.d {
        let edge = g.edge(e);
        if truncated_bfs(g, &zero, edge.u, k)[edge.v] > k {
            let i = edge.u - 4 * l;
            let r = edge.v - 5 * l;
            rep.blocked.push((i, r));
        }
    }
    rep.blocked.sort_unstable();
    rep.disjoint = intersecting(l, &gadget.a, &gadget.b).is_empty();
    let report = verify_spanner(g, &zero, k, SpannerMode::Plain)?;
    rep.zero_cost_spanner = report.valid;
    if rep.zero_cost_spanner != rep.disjoint {
        rep.violations.push(format!("0-cost spanner exists = {}, inputs disjoint = {}", rep.zero_cost_spanner, rep.disjoint));
    }
    if rep.blocked != intersecting(l, &gadget.a, &gadget.b) {
        rep.violations.push(format!("blocked pairs {:?} differ from intersecting indices", rep.blocked));
    }
    Ok(rep)
}

/// The reduction graph `G_S`: vertex `v` becomes the triangle
/// `3v, 3v+1, 3v+2` (`v_1, v_2, v_3`), and edge `{v, u}` with `v < u` adds
/// `{v_1, u_1}` and `{v_2, u_2}` of weight 0 and `{v_1, u_2}` of weight 2.
#[derive(Clone, Debug)]
pub struct ReductionGadget {
    pub source: Graph,
    pub graph: Graph,
    /// Edge `{v_1, v_2}` per source vertex.
    pub vertex_edge: Vec<EdgeId>,
    /// Weight-2 edge per source edge.
    pub cross_edge: Vec<EdgeId>,
}

pub fn gen_mvc_reduction(g: &Graph) -> Result<ReductionGadget, GadgetError> {
    if g.is_directed() || g.is_weighted() || g.is_client_server() {
        return Err(GadgetError::Source);
    }
    let mut gb = GraphBuilder::new(3 * g.n()).weighted(true);
    let mut vertex_edge = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        vertex_edge.push(gb.weighted_edge(3 * v, 3 * v + 1, 1)?);
        gb.weighted_edge(3 * v, 3 * v + 2, 0)?;
        gb.weighted_edge(3 * v + 1, 3 * v + 2, 0)?;
    }
    let mut cross_edge = Vec::with_capacity(g.m());
    for e in g.edges() {
        let (v, u) = (e.u.min(e.v), e.u.max(e.v));
        gb.weighted_edge(3 * v, 3 * u, 0)?;
        gb.weighted_edge(3 * v + 1, 3 * u + 1, 0)?;
        cross_edge.push(gb.weighted_edge(3 * v, 3 * u + 1, 2)?);
    }
    Ok(ReductionGadget { source: g.clone(), graph: gb.build()?, vertex_edge, cross_edge })
}

impl ReductionGadget {
    fn zero_edges(&self) -> EdgeSubset {
        let g = &self.graph;
        EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| g.weight(e) == 0))
    }

    /// Spanner `H_C` of cost `|C|` from a vertex cover `C`.
    pub fn cover_to_spanner(&self, cover: &[VertexId]) -> Result<EdgeSubset, GadgetError> {
        let mut inside = vec![false; self.source.n()];
        for &v in cover {
            inside[v] = true;
        }
        if let Some(e) = (0..self.source.m()).find(|&e| !inside[self.source.edge(e).u] && !inside[self.source.edge(e).v]) {
            return Err(GadgetError::NotACover(e));
        }
        let mut h = self.zero_edges();
        for (v, &e) in self.vertex_edge.iter().enumerate() {
            if inside[v] {
                h.insert(e);
            }
        }
        Ok(h)
    }

    /// Canonical form `H'`: all 0-weight edges, the weight-1 edges of `H`,
    /// and each weight-2 edge `{v_1, u_2}` replaced by `{v_1, v_2}` and
    /// `{u_1, u_2}`.
    pub fn canonicalize(&self, h: &EdgeSubset) -> EdgeSubset {
        let mut out = self.zero_edges();
        for e in h.iter() {
            match self.graph.weight(e) {
                1 => {
                    out.insert(e);
                }
                2 => {
                    let edge = self.graph.edge(e);
                    out.insert(self.vertex_edge[edge.u / 3]);
                    out.insert(self.vertex_edge[edge.v / 3]);
                }
                _ => {}
            }
        }
        out
    }

    /// Vertex cover `C_H` with `|C_H| <= w(H)` from a 2-spanner `H`.
    pub fn spanner_to_cover(&self, h: &EdgeSubset) -> Result<Vec<VertexId>, GadgetError> {
        let report = verify_spanner(&self.graph, h, 2, SpannerMode::Plain)?;
        if !report.valid {
            return Err(GadgetError::NotASpanner(report.uncovered));
        }
        let canon = self.canonicalize(h);
        Ok((0..self.source.n()).filter(|&v| canon.contains(self.vertex_edge[v])).collect())
    }

    pub fn cost(&self, h: &EdgeSubset) -> u64 {
        spanner_cost(&self.graph, h)
    }

    /// Minimum-cost 2-spanner restricted to canonical form, by enumerating
    /// vertex subsets. Exponential in the source size.
    pub fn min_canonical_spanner(&self) -> (u64, EdgeSubset) {
        let n = self.source.n();
        assert!(n < 32, "canonical search limited to 31 source vertices");
        let mut best: Option<(u64, EdgeSubset)> = None;
        for mask in 0u32..(1 << n) {
            let size = u64::from(mask.count_ones());
            if best.as_ref().is_some_and(|b| b.0 <= size) {
                continue;
            }
            let cover: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            if let Ok(h) = self.cover_to_spanner(&cover) {
                if verify_spanner(&self.graph, &h, 2, SpannerMode::Plain).is_ok_and(|r| r.valid) {
                    best = Some((size, h));
                }
            }
        }
        best.expect("the full vertex set is a cover")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{min_spanner_exact, min_vertex_cover_exact, OracleBudget};
    use crate::star::Variant;
    use proptest::prelude::*;

    fn zeros(n: usize) -> Vec<bool> {
        vec![false; n]
    }

    #[test]
    fn disjointness_counts() {
        let g = gen_disjointness_gadget(2, 2, &zeros(4), &zeros(4)).unwrap();
        assert_eq!(g.graph.n(), 18);
        assert_eq!(g.d.len(), 16);
        assert_eq!(g.cut_edges(), 6);
        let g = gen_disjointness_gadget(2, 3, &zeros(4), &zeros(4)).unwrap();
        assert_eq!(g.graph.n(), 22);
        assert!(matches!(
            gen_disjointness_gadget(2, 2, &zeros(3), &zeros(4)),
            Err(GadgetError::StringLength { expected: 4, a: 3, b: 4 })
        ));
    }

    #[test]
    fn single_bit_gadget_keeps_its_d_edge_coverable() {
        let g = gen_disjointness_gadget(1, 1, &[true], &[false]).unwrap();
        let lay = g.layout;
        assert!(g.graph.edge_between(lay.y1(0), lay.y2(0)).is_some());
        assert!(g.graph.edge_between(lay.x1(0), lay.x2(0)).is_none());
        let rep = verify_gadget_claims(&g, 5).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert!(rep.disjoint);
    }

    #[test]
    fn disjoint_inputs_give_sparse_spanner() {
        let g = gen_disjointness_gadget(2, 2, &zeros(4), &zeros(4)).unwrap();
        let rep = verify_gadget_claims(&g, 5).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        let size = rep.non_d_spanner_size.unwrap();
        // 2lb + 2l^2 + 3l edges outside D when every optional edge exists.
        assert_eq!(size, 8 + 8 + 6);
        assert!(size <= 28);
    }

    #[test]
    fn one_intersection_forces_its_block() {
        let a = [true, false, false, false];
        let g = gen_disjointness_gadget(2, 2, &a, &a).unwrap();
        let rep = verify_gadget_claims(&g, 5).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.forced_edges, 4);
        let lay = g.layout;
        for j in 0..2 {
            for s in 0..2 {
                let e = g.graph.edge_between(lay.x(0, j), lay.y(0, s)).unwrap();
                let mut h = g.graph.full_subset();
                h.remove(e);
                assert!(truncated_bfs(&g.graph, &h, lay.x(0, j), 5)[lay.y(0, s)] > 5);
            }
        }
    }

    #[test]
    fn full_intersection_forces_all_of_d() {
        let ones = vec![true; 4];
        let g = gen_disjointness_gadget(2, 2, &ones, &ones).unwrap();
        let rep = verify_gadget_claims(&g, 6).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.forced_edges, 16);
    }

    #[test]
    fn weighted_directed_gadget() {
        let w = gen_weighted_gadget(3, 4, true, &zeros(9), &zeros(9)).unwrap();
        assert_eq!(w.graph.n(), 18);
        let rep = verify_weighted_gadget(&w).unwrap();
        assert!(rep.ok() && rep.zero_cost_spanner, "{rep:?}");

        let w = gen_weighted_gadget(1, 4, true, &[true], &[true]).unwrap();
        let rep = verify_weighted_gadget(&w).unwrap();
        assert!(rep.ok() && !rep.zero_cost_spanner);
        assert_eq!(rep.blocked, vec![(0, 0)]);
    }

    #[test]
    fn weighted_undirected_gadget_uses_long_paths() {
        let w = gen_weighted_gadget(2, 6, false, &zeros(4), &zeros(4)).unwrap();
        assert_eq!(w.graph.n(), 12 + 2 * 2);
        let rep = verify_weighted_gadget(&w).unwrap();
        assert!(rep.ok() && rep.zero_cost_spanner, "{rep:?}");
        assert!(gen_weighted_gadget(2, 3, false, &zeros(4), &zeros(4)).is_err());
    }

    #[test]
    fn reduction_shapes() {
        let g = Graph::from_edges(2, false, &[(0, 1)]).unwrap();
        let r = gen_mvc_reduction(&g).unwrap();
        assert_eq!((r.graph.n(), r.graph.m()), (6, 9));
        let p3 = Graph::from_edges(3, false, &[(0, 1), (1, 2)]).unwrap();
        let r = gen_mvc_reduction(&p3).unwrap();
        assert_eq!((r.graph.n(), r.graph.m()), (9, 9 + 6));
        let empty = Graph::from_edges(2, false, &[]).unwrap();
        let r = gen_mvc_reduction(&empty).unwrap();
        assert_eq!((r.graph.n(), r.graph.m()), (6, 6));
        assert!(r.graph.edges().iter().all(|e| e.weight <= 2));
    }

    #[test]
    fn cover_maps_both_ways() {
        let g = Graph::from_edges(2, false, &[(0, 1)]).unwrap();
        let r = gen_mvc_reduction(&g).unwrap();
        let h = r.cover_to_spanner(&[0]).unwrap();
        assert_eq!(r.cost(&h), 1);
        assert!(verify_spanner(&r.graph, &h, 2, SpannerMode::Plain).unwrap().valid);
        assert!(matches!(r.cover_to_spanner(&[]), Err(GadgetError::NotACover(0))));

        let mut with_cross = r.zero_edges();
        with_cross.insert(r.cross_edge[0]);
        assert_eq!(r.cost(&with_cross), 2);
        let canon = r.canonicalize(&with_cross);
        assert!(r.cost(&canon) <= 2);
        assert!(!canon.contains(r.cross_edge[0]));
        assert_eq!(r.spanner_to_cover(&with_cross).unwrap(), vec![0, 1]);
    }

    #[test]
    fn path_round_trip_matches_oracles() {
        let p3 = Graph::from_edges(3, false, &[(0, 1), (1, 2)]).unwrap();
        let r = gen_mvc_reduction(&p3).unwrap();
        let (vc, _) = min_vertex_cover_exact(&p3, OracleBudget::default()).unwrap();
        let (w, h) = min_spanner_exact(&r.graph, 2, Variant::Weighted, OracleBudget::default()).unwrap();
        assert_eq!((vc, w), (1, 1));
        assert_eq!(r.spanner_to_cover(&h).unwrap(), vec![1]);
        assert_eq!(r.min_canonical_spanner().0, 1);
    }

    #[test]
    fn distributed_spanner_of_reduction_maps_to_cover() {
        for seed in 0..6 {
            let g = crate::generate::random_connected(10, 0.3, seed);
            let r = gen_mvc_reduction(&g).unwrap();
            let run = crate::spanner::two_spanner(&r.graph, Variant::Weighted, seed, 100_000).unwrap();
            let cover = r.spanner_to_cover(&run.h).unwrap();
            assert!(cover.len() as u64 <= r.cost(&run.h));
            assert!(r.cover_to_spanner(&cover).is_ok());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reduction_preserves_optimum(n in 1usize..7, p in 0.1f64..0.9, seed in 0u64..500) {
            let g = crate::generate::random_connected(n, p, seed);
            let r = gen_mvc_reduction(&g).unwrap();
            let (vc, cover) = min_vertex_cover_exact(&g, OracleBudget::default()).unwrap();
            let (w, h) = min_spanner_exact(&r.graph, 2, Variant::Weighted, OracleBudget::default()).unwrap();
            prop_assert_eq!(vc as u64, w);
            let back = r.spanner_to_cover(&h).unwrap();
            prop_assert!(back.len() as u64 <= w);
            prop_assert_eq!(r.cost(&r.cover_to_spanner(&cover).unwrap()), vc as u64);
        }

        #[test]
        fn claims_hold_on_random_strings(l in 1usize..4, beta in 1usize..4, bits in proptest::collection::vec(any::<bool>(), 18)) {
            let (a, b) = (&bits[..l * l], &bits[9..9 + l * l]);
            let g = gen_disjointness_gadget(l, beta, a, b).unwrap();
            let rep = verify_gadget_claims(&g, 5).unwrap();
            prop_assert!(rep.ok(), "{:?}", rep.violations);
            for k in 4..7 {
                for directed in [true, false] {
                    let w = gen_weighted_gadget(l, k, directed, a, b).unwrap();
                    let rep = verify_weighted_gadget(&w).unwrap();
                    prop_assert!(rep.ok(), "{:?}", rep.violations);
                }
            }
        }
    }
}
