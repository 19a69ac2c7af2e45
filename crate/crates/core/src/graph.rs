//! Graph representation, edge subsets, the text interchange format and
//! k-spanner verification.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, ParseError};
use crate::par::{self, Execution};

pub type VertexId = usize;
pub type EdgeId = usize;

/// One edge. Undirected edges are stored with `u < v`; directed edges keep
/// their orientation `u -> v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
    pub client: bool,
    pub server: bool,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFlags {
    pub directed: bool,
    pub weighted: bool,
    pub client_server: bool,
}

/// Immutable simple graph. Vertex ids are `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    flags: GraphFlags,
    edges: Vec<Edge>,
    incident: Vec<Vec<(VertexId, EdgeId)>>,
    out_adj: Vec<Vec<(VertexId, EdgeId)>>,
    in_adj: Vec<Vec<(VertexId, EdgeId)>>,
    neighbors: Vec<Vec<VertexId>>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
}

/// Incremental construction with validation.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    flags: GraphFlags,
    edges: Vec<Edge>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        Self::with_flags(n, GraphFlags::default())
    }

    pub fn with_flags(n: usize, flags: GraphFlags) -> Self {
        GraphBuilder { n, flags, edges: Vec::new(), lookup: HashMap::new() }
    }

    pub fn directed(mut self, yes: bool) -> Self {
        self.flags.directed = yes;
        self
    }

    pub fn weighted(mut self, yes: bool) -> Self {
        self.flags.weighted = yes;
        self
    }

    pub fn client_server(mut self, yes: bool) -> Self {
        self.flags.client_server = yes;
        self
    }

    fn key(&self, u: VertexId, v: VertexId) -> (VertexId, VertexId) {
        if self.flags.directed || u < v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Adds an unweighted edge (weight 1, both flags set).
    pub fn edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId, GraphError> {
        self.full_edge(u, v, 1, true, true)
    }

    pub fn weighted_edge(&mut self, u: VertexId, v: VertexId, w: u64) -> Result<EdgeId, GraphError> {
        self.full_edge(u, v, w, true, true)
    }

    pub fn full_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        weight: u64,
        client: bool,
        server: bool,
    ) -> Result<EdgeId, GraphError> {
        if u >= self.n || v >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n: self.n });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.flags.client_server && !client && !server {
            return Err(GraphError::MissingFlags(u, v));
        }
        let key = self.key(u, v);
        if self.lookup.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        let id = self.edges.len();
        self.lookup.insert(key, id);
        self.edges.push(Edge { u: key.0, v: key.1, weight, client, server });
        Ok(id)
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let mut total: u64 = 0;
        for e in &self.edges {
            total = total.checked_add(e.weight).ok_or(GraphError::WeightOverflow)?;
        }
        let n = self.n;
        let mut incident = vec![Vec::new(); n];
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (id, e) in self.edges.iter().enumerate() {
            incident[e.u].push((e.v, id));
            incident[e.v].push((e.u, id));
            out_adj[e.u].push((e.v, id));
            in_adj[e.v].push((e.u, id));
            if !self.flags.directed {
                out_adj[e.v].push((e.u, id));
                in_adj[e.u].push((e.v, id));
            }
        }
        let mut neighbors = Vec::with_capacity(n);
        for list in incident.iter_mut().chain(out_adj.iter_mut()).chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        for list in &incident {
            let mut nb: Vec<VertexId> = list.iter().map(|&(x, _)| x).collect();
            nb.dedup();
            neighbors.push(nb);
        }
        Ok(Graph {
            n,
            flags: self.flags,
            edges: self.edges,
            incident,
            out_adj,
            in_adj,
            neighbors,
            lookup: self.lookup,
        })
    }
}

impl Graph {
    /// Convenience constructor for unweighted graphs from an edge list.
    pub fn from_edges(n: usize, directed: bool, edges: &[(VertexId, VertexId)]) -> Result<Graph, GraphError> {
        let mut b = GraphBuilder::new(n).directed(directed);
        for &(u, v) in edges {
            b.edge(u, v)?;
        }
        b.build()
    }

    /// Weighted undirected/directed graph from `(u, v, w)` triples.
    pub fn from_weighted_edges(
        n: usize,
        directed: bool,
        edges: &[(VertexId, VertexId, u64)],
    ) -> Result<Graph, GraphError> {
        let mut b = GraphBuilder::new(n).directed(directed).weighted(true);
        for &(u, v, w) in edges {
            b.weighted_edge(u, v, w)?;
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn flags(&self) -> GraphFlags {
        self.flags
    }

    pub fn is_directed(&self) -> bool {
        self.flags.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.flags.weighted
    }

    pub fn is_client_server(&self) -> bool {
        self.flags.client_server
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// All incident edges of `v` as `(other endpoint, edge id)`, sorted.
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.incident[v]
    }

    /// Edges usable to leave `v` (out-arcs, or all edges when undirected).
    pub fn out_edges(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.out_adj[v]
    }

    /// Edges usable to enter `v`.
    pub fn in_edges(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.in_adj[v]
    }

    /// Distinct communication neighbors (either direction), sorted.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident[v].len()
    }

    /// Maximum incident edge count.
    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edge id for `u -> v` (directed) or `{u, v}` (undirected).
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let key = if self.flags.directed || u < v { (u, v) } else { (v, u) };
        self.lookup.get(&key).copied()
    }

    pub fn weight(&self, e: EdgeId) -> u64 {
        self.edges[e].weight
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).max().unwrap_or(0)
    }

    /// Ratio of maximum to minimum positive weight as `(max, min)`; `None`
    /// for unweighted graphs or when no positive weight exists.
    pub fn weight_ratio(&self) -> Option<(u64, u64)> {
        if !self.flags.weighted {
            return None;
        }
        let pos = self.edges.iter().map(|e| e.weight).filter(|&w| w > 0);
        let max = pos.clone().max()?;
        let min = pos.min()?;
        Some((max, min))
    }

    pub fn full_subset(&self) -> EdgeSubset {
        EdgeSubset::full(self.m())
    }

    pub fn empty_subset(&self) -> EdgeSubset {
        EdgeSubset::new(self.m())
    }

    /// Connected components of the underlying undirected graph, as a
    /// component index per vertex plus the component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.neighbors[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().1 == 1
    }

    /// Undirected hop distances from `s` (ignores orientation).
    pub fn bfs_distances(&self, s: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.neighbors[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}

/// A subset of the edges of a host graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSubset {
    bits: FixedBitSet,
}

impl EdgeSubset {
    pub fn new(m: usize) -> Self {
        EdgeSubset { bits: FixedBitSet::with_capacity(m) }
    }

    pub fn full(m: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(m);
        bits.insert_range(..);
        EdgeSubset { bits }
    }

    pub fn from_ids(m: usize, ids: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut s = Self::new(m);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Number of edges in the host graph.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.bits.contains(id)
    }

    pub fn insert(&mut self, id: EdgeId) -> bool {
        let was = self.bits.contains(id);
        self.bits.insert(id);
        !was
    }

    pub fn remove(&mut self, id: EdgeId) {
        self.bits.set(id, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.bits.ones()
    }

    pub fn union_with(&mut self, other: &EdgeSubset) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &EdgeSubset) {
        self.bits.difference_with(&other.bits);
    }

    pub fn is_subset(&self, other: &EdgeSubset) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }

    fn check_host(&self, g: &Graph) -> Result<(), GraphError> {
        if self.capacity() != g.m() {
            return Err(GraphError::ForeignSubset { capacity: self.capacity(), m: g.m() });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpannerMode {
    Plain,
    ClientServer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    /// Uncovered edge ids, sorted ascending.
    pub uncovered: Vec<EdgeId>,
}

/// Checks that every edge (every client edge in client-server mode) has an
/// `h`-path of length at most `k` between its endpoints.
pub fn verify_spanner(g: &Graph, h: &EdgeSubset, k: usize, mode: SpannerMode) -> Result<VerificationReport, GraphError> {
    verify_spanner_with(g, h, k, mode, Execution::default())
}

pub fn verify_spanner_with(
    g: &Graph,
    h: &EdgeSubset,
    k: usize,
    mode: SpannerMode,
    exec: Execution,
) -> Result<VerificationReport, GraphError> {
    if mode == SpannerMode::ClientServer {
        h.check_host(g)?;
        if let Some(bad) = h.iter().find(|&e| !g.edge(e).server) {
            return Err(GraphError::NonServerEdge(bad));
        }
    }
    let targets: Vec<EdgeId> = (0..g.m())
        .filter(|&e| mode == SpannerMode::Plain || g.edge(e).client)
        .collect();
    let uncovered = uncovered_targets(g, h, k, &targets, exec)?;
    Ok(VerificationReport { valid: uncovered.is_empty(), uncovered })
}

/// Returns the sorted subset of `targets` lacking an `h`-path of length at
/// most `k`. One truncated BFS is run per distinct source vertex.
pub fn uncovered_targets(
    g: &Graph,
    h: &EdgeSubset,
    k: usize,
    targets: &[EdgeId],
    exec: Execution,
) -> Result<Vec<EdgeId>, GraphError> {
    if k < 1 {
        return Err(GraphError::InvalidStretch(k));
    }
    h.check_host(g)?;
    let mut by_source: HashMap<VertexId, Vec<EdgeId>> = HashMap::new();
    for &e in targets {
        if !h.contains(e) {
            by_source.entry(g.edge(e).u).or_default().push(e);
        }
    }
    let mut sources: Vec<(VertexId, Vec<EdgeId>)> = by_source.into_iter().collect();
    sources.sort_unstable_by_key(|(s, _)| *s);
    let per_source = par::map(exec, &sources, |(s, list)| {
        let dist = truncated_bfs(g, h, *s, k);
        list.iter()
            .copied()
            .filter(|&e| dist[g.edge(e).v] > k)
            .collect::<Vec<_>>()
    });
    let mut out: Vec<EdgeId> = per_source.into_iter().flatten().collect();
    out.sort_unstable();
    Ok(out)
}

/// Hop distances from `s` using only `h` edges (respecting orientation),
/// explored to depth `k`; unreached vertices get `usize::MAX`.
pub fn truncated_bfs(g: &Graph, h: &EdgeSubset, s: VertexId, k: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if dist[x] >= k {
            continue;
        }
        for &(y, e) in g.out_edges(x) {
            if h.contains(e) && dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// `w(h)`, or `|h|` for unweighted graphs.
pub fn spanner_cost(g: &Graph, h: &EdgeSubset) -> u64 {
    if g.is_weighted() {
        h.iter().map(|e| g.weight(e)).sum()
    } else {
        h.len() as u64
    }
}

/// Client edges that no set of server edges can 2-span (or k-span).
pub fn uncoverable_client_edges(g: &Graph, k: usize) -> Vec<EdgeId> {
    let servers = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| g.edge(e).server));
    let targets: Vec<EdgeId> = (0..g.m()).filter(|&e| g.edge(e).client).collect();
    uncovered_targets(g, &servers, k, &targets, Execution::Sequential).unwrap_or_default()
}

/// Parses the text interchange format.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(ParseError::new(0, "missing header"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() < 6 || tok.len() > 7 || tok[0] != "p" || tok[1] != "spanner" {
        return Err(ParseError::new(hline, "malformed header"));
    }
    let num = |s: &str, what: &str| -> Result<usize, ParseError> {
        s.parse::<usize>().map_err(|_| ParseError::new(hline, format!("malformed header: bad {what}")))
    };
    let n = num(tok[2], "vertex count")?;
    let m = num(tok[3], "edge count")?;
    let bit = |s: &str, what: &str| -> Result<bool, ParseError> {
        match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(ParseError::new(hline, format!("malformed header: {what} must be 0 or 1"))),
        }
    };
    let directed = bit(tok[4], "directed flag")?;
    let weighted = bit(tok[5], "weighted flag")?;
    let client_server = match tok.get(6) {
        None => false,
        Some(&"cs") => true,
        Some(other) => return Err(ParseError::new(hline, format!("malformed header: unknown token `{other}`"))),
    };

    let mut b = GraphBuilder::with_flags(n, GraphFlags { directed, weighted, client_server });
    let mut count = 0;
    for (line, body) in lines {
        let tok: Vec<&str> = body.split_whitespace().collect();
        if tok[0] != "e" {
            return Err(ParseError::new(line, format!("expected edge line, found `{}`", tok[0])));
        }
        let vertex = |s: &str| -> Result<usize, ParseError> {
            let id: i64 = s.parse().map_err(|_| ParseError::new(line, format!("bad vertex id `{s}`")))?;
            if id < 0 || id as u64 >= n as u64 {
                return Err(ParseError::new(line, format!("vertex id {id} out of range 0..{n}")));
            }
            Ok(id as usize)
        };
        if tok.len() < 3 {
            return Err(ParseError::new(line, "edge line needs two endpoints"));
        }
        let u = vertex(tok[1])?;
        let v = vertex(tok[2])?;
        let mut rest = &tok[3..];
        let mut weight = 1;
        if weighted {
            let w = rest.first().ok_or(ParseError::new(line, "missing weight"))?;
            if w.starts_with('-') {
                return Err(ParseError::new(line, format!("negative weight `{w}`")));
            }
            weight = w.parse::<u64>().map_err(|_| ParseError::new(line, format!("bad weight `{w}`")))?;
            rest = &rest[1..];
        }
        let (mut client, mut server) = (!client_server, !client_server);
        match rest {
            [] => {
                if client_server {
                    return Err(ParseError::new(line, "client-server edge needs flags"));
                }
            }
            [flags] if client_server => {
                for c in flags.chars() {
                    match c {
                        'c' => client = true,
                        's' => server = true,
                        _ => return Err(ParseError::new(line, format!("unknown flag `{c}`"))),
                    }
                }
            }
            _ => return Err(ParseError::new(line, "trailing tokens on edge line")),
        }
        b.full_edge(u, v, weight, client, server)
            .map_err(|e| ParseError::new(line, e.to_string()))?;
        count += 1;
    }
    if count != m {
        return Err(ParseError::new(hline, format!("header declares {m} edges, found {count}")));
    }
    b.build().map_err(|e| ParseError::new(hline, e.to_string()))
}

/// Serializes a graph in the text interchange format.
pub fn format_graph(g: &Graph) -> String {
    let f = g.flags();
    let mut out = format!(
        "p spanner {} {} {} {}{}\n",
        g.n(),
        g.m(),
        u8::from(f.directed),
        u8::from(f.weighted),
        if f.client_server { " cs" } else { "" }
    );
    for e in g.edges() {
        let _ = write!(out, "e {} {}", e.u, e.v);
        if f.weighted {
            let _ = write!(out, " {}", e.weight);
        }
        if f.client_server {
            out.push(' ');
            if e.client {
                out.push('c');
            }
            if e.server {
                out.push('s');
            }
        }
        out.push('\n');
    }
    out
}
