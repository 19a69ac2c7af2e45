//! The distributed 2-spanner approximation as a node program.
//!
//! After one or two setup rounds (neighbor lists, then the local maximum
//! weight in weighted mode) every iteration takes seven rounds:
//!
//! | phase | sends |
//! |-------|-------|
//! | 0 | new spanner edges at the sender |
//! | 1 | incident edges that became covered |
//! | 2 | exact density |
//! | 3 | maximum density heard so far |
//! | 4 | star and rank (candidates), or termination with the final edges |
//! | 5 | votes of uncovered edges |
//! | 6 | commits of stars that received enough votes |
//!
//! The run also yields a cost certificate built from the nodes' own events;
//! [`certificate_check`] replays the run globally and recomputes everything.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use num::{BigInt, BigRational, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{Ratio, Rounded};
use crate::graph::{uncoverable_client_edges, verify_spanner, EdgeId, EdgeSubset, Graph, SpannerMode, VertexId};
use crate::par::Execution;
use crate::sim::{self, decode, encode, LocalView, NodeProgram, SimConfig, SimError, Step, Trace};
use crate::star::{Orientation, Pair, Slot, StarError, StarProblem, Variant};

pub const PHASES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct EdgeInfo {
    edge: EdgeId,
    /// Tail in directed mode; otherwise the smaller endpoint.
    u: VertexId,
    v: VertexId,
    weight: u64,
    client: bool,
    server: bool,
}

impl EdgeInfo {
    fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
enum Msg {
    Hello(Vec<EdgeInfo>),
    WMax(u64),
    HAdj(Vec<EdgeId>),
    Covered(Vec<EdgeId>),
    Density(Ratio),
    Relay(Ratio),
    Announce { star: Vec<EdgeId>, rank: u64 },
    Terminated(Vec<EdgeId>),
    Vote(Vec<EdgeId>),
    Commit(Vec<EdgeId>),
}

/// Per-iteration record emitted by the nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpannerEvent {
    Density { iteration: usize, rho: Ratio },
    Candidate {
        iteration: usize,
        star: Vec<EdgeId>,
        spanned: Vec<EdgeId>,
        rank: u64,
        rho: Ratio,
        rho_tilde: Rounded,
        kept_previous: bool,
        fallback: bool,
    },
    Terminated { iteration: usize, edges: Vec<EdgeId> },
    Votes { iteration: usize, candidate: VertexId, edges: Vec<EdgeId> },
    StarAdded { iteration: usize, star: Vec<EdgeId>, votes: usize },
}

impl SpannerEvent {
    pub fn iteration(&self) -> usize {
        match self {
            SpannerEvent::Density { iteration, .. }
            | SpannerEvent::Candidate { iteration, .. }
            | SpannerEvent::Terminated { iteration, .. }
            | SpannerEvent::Votes { iteration, .. }
            | SpannerEvent::StarAdded { iteration, .. } => *iteration,
        }
    }
}

pub type SpannerTrace = Trace<Vec<EdgeId>, SpannerEvent>;

/// Whether an edge has to be covered.
fn is_target(variant: Variant, client: bool) -> bool {
    variant != Variant::ClientServer || client
}

/// Whether an edge may enter the spanner.
fn is_eligible(variant: Variant, server: bool) -> bool {
    variant != Variant::ClientServer || server
}

/// The candidacy threshold; termination happens strictly below it.
pub fn threshold(variant: Variant, w_max: u64) -> Ratio {
    match variant {
        Variant::Unweighted | Variant::Directed => Ratio::new(1, 1),
        Variant::Weighted => Ratio::new(1, w_max),
        Variant::ClientServer => Ratio::new(1, 2),
    }
}

#[derive(Default)]
struct HAdjacency {
    out: HashSet<VertexId>,
    inn: HashSet<VertexId>,
}

impl HAdjacency {
    fn meets(a: &HAdjacency, b: &HAdjacency) -> bool {
        // a -> w -> b
        let (small, large) = if a.out.len() <= b.inn.len() { (&a.out, &b.inn) } else { (&b.inn, &a.out) };
        small.iter().any(|w| large.contains(w))
    }
}

struct Candidacy {
    star: Vec<EdgeId>,
    leaves: Vec<VertexId>,
    spanned: usize,
    votes: usize,
}

pub struct SpannerNode {
    id: VertexId,
    n: usize,
    variant: Variant,
    directed: bool,
    mine: Vec<EdgeInfo>,
    neighbors: Vec<VertexId>,
    known: HashMap<EdgeId, EdgeInfo>,
    by_endpoints: HashMap<(VertexId, VertexId), EdgeId>,
    halted: HashSet<VertexId>,
    h: HashMap<VertexId, HAdjacency>,
    my_h: HashSet<EdgeId>,
    pending_h: Vec<EdgeId>,
    covered: HashSet<EdgeId>,
    leaf_edges: Vec<EdgeId>,
    leaf_uncovered: HashSet<EdgeId>,
    dirty: bool,
    problem: Option<StarProblem>,
    w_max: u64,
    rho: Option<Ratio>,
    heard_max: Ratio,
    previous: Option<(Vec<EdgeId>, Rounded)>,
    candidacy: Option<Candidacy>,
    announcements: Vec<(VertexId, u64, HashSet<EdgeId>)>,
}

impl SpannerNode {
    fn key(&self, a: VertexId, b: VertexId) -> (VertexId, VertexId) {
        if self.directed {
            (a, b)
        } else {
            (a.min(b), a.max(b))
        }
    }

    fn learn(&mut self, e: EdgeInfo) {
        self.by_endpoints.insert(self.key(e.u, e.v), e.edge);
        self.known.insert(e.edge, e);
    }

    fn add_h(&mut self, e: EdgeId) {
        if self.my_h.insert(e) {
            self.pending_h.push(e);
            let info = self.known[&e];
            self.record_h(self.id, info);
        }
    }

    fn record_h(&mut self, at: VertexId, e: EdgeInfo) {
        let directed = self.directed;
        let adj = self.h.entry(at).or_default();
        let other = e.other(at);
        if directed {
            if e.u == at {
                adj.out.insert(other);
            } else {
                adj.inn.insert(other);
            }
        } else {
            adj.out.insert(other);
            adj.inn.insert(other);
        }
    }

    /// The agent of an edge votes for it and reports its coverage.
    fn is_agent(&self, e: &EdgeInfo) -> bool {
        e.u == self.id
    }

    fn halt_neighbor(&mut self, t: VertexId) {
        self.halted.insert(t);
        let ids: Vec<EdgeId> = self.mine.iter().filter(|e| e.other(self.id) == t).map(|e| e.edge).collect();
        self.covered.extend(ids);
        let known = &self.known;
        let before = self.leaf_uncovered.len();
        self.leaf_uncovered.retain(|e| {
            let info = known[e];
            info.u != t && info.v != t
        });
        if self.leaf_uncovered.len() != before {
            self.dirty = true;
        }
    }

    fn absorb_hello(&mut self, from: VertexId, edges: Vec<EdgeInfo>) {
        for e in edges {
            self.learn(e);
            let other = e.other(from);
            if other != self.id
                && self.neighbors.binary_search(&other).is_ok()
                && is_target(self.variant, e.client)
                && !self.leaf_uncovered.contains(&e.edge)
            {
                self.leaf_edges.push(e.edge);
                self.leaf_uncovered.insert(e.edge);
            }
            if self.variant == Variant::Weighted {
                self.w_max = self.w_max.max(e.weight);
            }
        }
        self.dirty = true;
    }

    fn refresh_coverage(&mut self) -> Vec<EdgeId> {
        let mut fresh = Vec::new();
        let empty = HAdjacency::default();
        for e in &self.mine {
            if self.covered.contains(&e.edge) || !is_target(self.variant, e.client) {
                continue;
            }
            let hit = self.my_h.contains(&e.edge)
                || HAdjacency::meets(self.h.get(&e.u).unwrap_or(&empty), self.h.get(&e.v).unwrap_or(&empty));
            if hit {
                fresh.push(e.edge);
            }
        }
        self.covered.extend(fresh.iter().copied());
        fresh.retain(|e| self.is_agent(&self.known[e]));
        fresh
    }

    fn build_problem(&self) -> StarProblem {
        let mut slots = Vec::new();
        let mut index: HashMap<(VertexId, Orientation), usize> = HashMap::new();
        for e in &self.mine {
            if !is_eligible(self.variant, e.server) {
                continue;
            }
            let leaf = e.other(self.id);
            let orientation = match (self.directed, e.u == self.id) {
                (false, _) => Orientation::Undirected,
                (true, true) => Orientation::Out,
                (true, false) => Orientation::In,
            };
            let cost = if self.variant == Variant::Weighted { e.weight } else { 1 };
            index.insert((leaf, orientation), slots.len());
            slots.push(Slot { edge: e.edge, leaf, cost, orientation });
        }
        let (oa, ob) = if self.directed {
            (Orientation::In, Orientation::Out)
        } else {
            (Orientation::Undirected, Orientation::Undirected)
        };
        let mut pairs = Vec::new();
        for &e in &self.leaf_edges {
            if !self.leaf_uncovered.contains(&e) {
                continue;
            }
            let info = self.known[&e];
            if let (Some(&a), Some(&b)) = (index.get(&(info.u, oa)), index.get(&(info.v, ob))) {
                pairs.push(Pair { a, b, edge: e });
            }
        }
        StarProblem::new(self.variant, self.id, slots, pairs)
    }

    fn density(&mut self) -> Ratio {
        if self.dirty || self.problem.is_none() {
            let p = self.build_problem();
            let fresh = p.densest(&p.full_mask()).map(|m| p.density(&m)).unwrap_or(Ratio::ZERO);
            // The directed estimate may rise between iterations; keep the
            // running minimum.
            let rho = match self.rho {
                Some(prev) if self.directed => prev.min(fresh),
                _ => fresh,
            };
            self.rho = Some(rho);
            self.problem = Some(p);
            self.dirty = false;
        }
        self.rho.expect("density computed")
    }

    fn terminate(&mut self, step: &mut Step<'_, Vec<EdgeId>, SpannerEvent>, iteration: usize) {
        let mut added = Vec::new();
        for e in self.mine.clone() {
            if is_target(self.variant, e.client)
                && !self.covered.contains(&e.edge)
                && is_eligible(self.variant, e.server)
                && !self.my_h.contains(&e.edge)
            {
                added.push(e.edge);
                self.add_h(e.edge);
            }
        }
        added.sort_unstable();
        step.event(SpannerEvent::Terminated { iteration, edges: added.clone() });
        step.broadcast(&encode(&Msg::Terminated(added)));
        let mut out: Vec<EdgeId> = self.my_h.iter().copied().collect();
        out.sort_unstable();
        step.output(out);
    }

    fn become_candidate(&mut self, step: &mut Step<'_, Vec<EdgeId>, SpannerEvent>, iteration: usize, rho_tilde: Rounded) {
        let p = self.problem.as_ref().expect("density computed before candidacy");
        let prev_mask = match &self.previous {
            Some((star, r)) if *r == rho_tilde => Some(p.mask_of(star).expect("previous star uses own edges")),
            _ => None,
        };
        let kept = prev_mask.as_ref().is_some_and(|m| p.density(m).at_least(rho_tilde, self.variant.threshold_shift()));
        let (mask, fallback) = match p.choose(prev_mask.as_deref(), rho_tilde) {
            Ok(m) => (m, false),
            Err(StarError::FallbackReached(_)) => (p.choose(None, rho_tilde).expect("fresh star meets threshold"), true),
            Err(e) => panic!("star choice failed at vertex {}: {e}", self.id),
        };
        let star = p.star_of(&mask).edges;
        let spanned = p.spanned(&mask);
        let rho = p.density(&mask);
        let rank = step.rng().gen_range(1..=(self.n as u64).saturating_pow(4).max(1));
        let mut leaves: Vec<VertexId> = star.iter().map(|e| self.known[e].other(self.id)).collect();
        leaves.sort_unstable();
        leaves.dedup();
        let msg = encode(&Msg::Announce { star: star.clone(), rank });
        for &x in &leaves {
            step.send(x, msg.clone());
        }
        step.event(SpannerEvent::Candidate {
            iteration,
            star: star.clone(),
            spanned: spanned.clone(),
            rank,
            rho,
            rho_tilde,
            kept_previous: kept,
            fallback,
        });
        self.previous = Some((star.clone(), rho_tilde));
        self.candidacy = Some(Candidacy { star, leaves, spanned: spanned.len(), votes: 0 });
    }

    fn vote(&mut self, step: &mut Step<'_, Vec<EdgeId>, SpannerEvent>, iteration: usize, just_halted: &HashSet<VertexId>) {
        let mut ballots: HashMap<VertexId, Vec<EdgeId>> = HashMap::new();
        if !self.announcements.is_empty() {
            for e in &self.mine {
                if !self.is_agent(e) || !is_target(self.variant, e.client) || self.covered.contains(&e.edge) {
                    continue;
                }
                let b = e.other(self.id);
                if just_halted.contains(&b) {
                    continue;
                }
                let mut best: Option<(u64, VertexId)> = None;
                for (c, rank, star) in &self.announcements {
                    let first = self.by_endpoints.get(&self.key(self.id, *c));
                    let second = self.by_endpoints.get(&self.key(*c, b));
                    let spans = matches!((first, second), (Some(x), Some(y)) if star.contains(x) && star.contains(y));
                    if spans && best.is_none_or(|bst| (*rank, *c) < bst) {
                        best = Some((*rank, *c));
                    }
                }
                if let Some((_, c)) = best {
                    ballots.entry(c).or_default().push(e.edge);
                }
            }
        }
        let mut order: Vec<VertexId> = ballots.keys().copied().collect();
        order.sort_unstable();
        for c in order {
            let edges = ballots.remove(&c).expect("ballot exists");
            step.send(c, encode(&Msg::Vote(edges.clone())));
            step.event(SpannerEvent::Votes { iteration, candidate: c, edges });
        }
        self.announcements.clear();
    }
}

/// The node program.
#[derive(Clone, Copy, Debug)]
pub struct TwoSpanner {
    pub variant: Variant,
    pub directed: bool,
}

impl TwoSpanner {
    pub fn setup_rounds(&self) -> usize {
        if self.variant == Variant::Weighted {
            2
        } else {
            1
        }
    }
}

impl NodeProgram for TwoSpanner {
    type State = SpannerNode;
    type Output = Vec<EdgeId>;
    type Event = SpannerEvent;

    fn init(&self, view: &LocalView<'_>) -> SpannerNode {
        let mine: Vec<EdgeInfo> = view
            .incident
            .iter()
            .map(|ie| {
                let (u, v) = match ie.orientation {
                    Orientation::In => (ie.other, view.id),
                    Orientation::Out => (view.id, ie.other),
                    Orientation::Undirected => (view.id.min(ie.other), view.id.max(ie.other)),
                };
                EdgeInfo { edge: ie.edge, u, v, weight: ie.weight, client: ie.client, server: ie.server }
            })
            .collect();
        let mut node = SpannerNode {
            id: view.id,
            n: view.n,
            variant: self.variant,
            directed: self.directed,
            mine: mine.clone(),
            neighbors: view.neighbors.to_vec(),
            known: HashMap::new(),
            by_endpoints: HashMap::new(),
            halted: HashSet::new(),
            h: HashMap::new(),
            my_h: HashSet::new(),
            pending_h: Vec::new(),
            covered: HashSet::new(),
            leaf_edges: Vec::new(),
            leaf_uncovered: HashSet::new(),
            dirty: true,
            problem: None,
            w_max: 0,
            rho: None,
            heard_max: Ratio::ZERO,
            previous: None,
            candidacy: None,
            announcements: Vec::new(),
        };
        for e in &mine {
            node.learn(*e);
            if self.variant == Variant::Weighted {
                node.w_max = node.w_max.max(e.weight);
                // Weight-0 edges enter the spanner up front.
                if e.weight == 0 {
                    node.add_h(e.edge);
                }
            }
        }
        node
    }

    fn step(&self, s: &mut SpannerNode, step: &mut Step<'_, Vec<EdgeId>, SpannerEvent>) {
        let round = step.round();
        if round == 0 {
            step.broadcast(&encode(&Msg::Hello(s.mine.clone())));
            return;
        }
        let mut just_halted = HashSet::new();
        for (from, payload) in step.inbox() {
            let from = *from;
            match decode::<Msg>(payload) {
                Msg::Hello(edges) => s.absorb_hello(from, edges),
                Msg::WMax(w) => s.w_max = s.w_max.max(w),
                Msg::HAdj(edges) => {
                    for e in edges {
                        let info = s.known[&e];
                        s.record_h(from, info);
                    }
                }
                Msg::Covered(edges) => {
                    for e in edges {
                        if s.leaf_uncovered.remove(&e) {
                            s.dirty = true;
                        }
                    }
                }
                Msg::Density(r) | Msg::Relay(r) => s.heard_max = s.heard_max.max(r),
                Msg::Announce { star, rank } => s.announcements.push((from, rank, star.into_iter().collect())),
                Msg::Terminated(edges) => {
                    for &e in &edges {
                        let info = s.known[&e];
                        if info.u == s.id || info.v == s.id {
                            s.add_h(e);
                        }
                    }
                    just_halted.insert(from);
                    s.halt_neighbor(from);
                }
                Msg::Vote(edges) => {
                    if let Some(c) = s.candidacy.as_mut() {
                        c.votes += edges.len();
                    }
                }
                Msg::Commit(edges) => {
                    for e in edges {
                        let info = s.known[&e];
                        if info.u == s.id || info.v == s.id {
                            s.add_h(e);
                        }
                    }
                }
            }
        }
        let setup = self.setup_rounds();
        if round < setup {
            // Second setup round in weighted mode.
            step.broadcast(&encode(&Msg::WMax(s.w_max)));
            return;
        }
        let iteration = (round - setup) / PHASES;
        match (round - setup) % PHASES {
            0 => {
                if !s.pending_h.is_empty() {
                    let mut delta = std::mem::take(&mut s.pending_h);
                    delta.sort_unstable();
                    step.broadcast(&encode(&Msg::HAdj(delta)));
                }
            }
            1 => {
                let fresh = s.refresh_coverage();
                if !fresh.is_empty() {
                    step.broadcast(&encode(&Msg::Covered(fresh)));
                }
            }
            2 => {
                let rho = s.density();
                step.event(SpannerEvent::Density { iteration, rho });
                s.heard_max = rho;
                step.broadcast(&encode(&Msg::Density(rho)));
            }
            3 => step.broadcast(&encode(&Msg::Relay(s.heard_max))),
            4 => {
                let rho = s.rho.expect("density computed in phase 2");
                let thr = threshold(self.variant, s.w_max);
                let top = s.heard_max;
                s.heard_max = Ratio::ZERO;
                if top.is_zero() || top < thr {
                    s.terminate(step, iteration);
                } else if rho.rounded() == top.rounded() && !rho.is_zero() && rho >= thr {
                    s.become_candidate(step, iteration, rho.rounded());
                } else {
                    s.previous = None;
                }
            }
            5 => s.vote(step, iteration, &just_halted),
            _ => {
                if let Some(c) = s.candidacy.take() {
                    let added = 8 * c.votes >= c.spanned;
                    if added {
                        for &e in &c.star {
                            s.add_h(e);
                        }
                        let msg = encode(&Msg::Commit(c.star.clone()));
                        for &x in &c.leaves {
                            step.send(x, msg.clone());
                        }
                        step.event(SpannerEvent::StarAdded { iteration, star: c.star, votes: c.votes });
                    }
                }
            }
        }
    }
}

/// Per-iteration summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub rho_max: Rounded,
    pub phi: u64,
    pub candidates: usize,
    pub stars_added: usize,
    pub terminated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostCertificate {
    /// `cost(e)` per edge id.
    pub cost: Vec<Ratio>,
    /// Weight-0 edges added up front.
    pub h0: Vec<EdgeId>,
    /// Edges of added stars.
    pub h1: Vec<EdgeId>,
    /// Edges added at termination.
    pub h2: Vec<EdgeId>,
    pub iterations: Vec<IterationStats>,
}

impl CostCertificate {
    pub fn total(&self) -> BigRational {
        self.cost.iter().fold(BigRational::zero(), |acc, c| acc + c.to_big())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpannerResult {
    pub variant: Variant,
    pub h: EdgeSubset,
    pub iterations: usize,
    pub certificate: CostCertificate,
    /// Client edges no server 2-path can cover; excluded from the obligation.
    pub uncoverable: Vec<EdgeId>,
    pub components: usize,
    pub trace: SpannerTrace,
}

#[derive(Debug, Error)]
pub enum SpannerError {
    #[error(transparent)]
    Variant(#[from] StarError),
    #[error("round limit {limit} reached with {live} vertices still running")]
    RoundLimit { limit: usize, live: usize, partial: Box<SpannerTrace> },
    #[error("simulation error: {0}")]
    Sim(String),
}

#[derive(Clone, Copy, Debug)]
pub struct SpannerConfig {
    pub variant: Variant,
    pub seed: u64,
    pub max_rounds: usize,
    pub exec: Execution,
    pub record_payloads: bool,
}

impl SpannerConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        SpannerConfig { variant, seed, max_rounds: 100_000, exec: Execution::default(), record_payloads: false }
    }
}

pub fn two_spanner(g: &Graph, variant: Variant, seed: u64, max_rounds: usize) -> Result<SpannerResult, SpannerError> {
    two_spanner_with(g, &SpannerConfig { max_rounds, ..SpannerConfig::new(variant, seed) })
}

pub fn two_spanner_with(g: &Graph, cfg: &SpannerConfig) -> Result<SpannerResult, SpannerError> {
    cfg.variant.check(g)?;
    let program = TwoSpanner { variant: cfg.variant, directed: g.is_directed() };
    let sim_cfg = SimConfig { seed: cfg.seed, max_rounds: cfg.max_rounds, exec: cfg.exec, record_payloads: cfg.record_payloads };
    let trace = sim::run(g, &program, sim_cfg).map_err(|e| match e {
        SimError::RoundLimit { limit, live, partial } => SpannerError::RoundLimit { limit, live, partial },
        other => SpannerError::Sim(other.to_string()),
    })?;
    let mut h = g.empty_subset();
    for out in trace.outputs.iter().flatten() {
        for &e in out {
            h.insert(e);
        }
    }
    let certificate = build_certificate(g, cfg.variant, &trace);
    let iterations = certificate.iterations.len();
    let uncoverable = if cfg.variant == Variant::ClientServer { uncoverable_client_edges(g, 2) } else { Vec::new() };
    Ok(SpannerResult { variant: cfg.variant, h, iterations, certificate, uncoverable, components: g.components().1, trace })
}

/// The certificate as the nodes report it.
fn build_certificate(g: &Graph, variant: Variant, trace: &SpannerTrace) -> CostCertificate {
    let mut cost = vec![Ratio::ZERO; g.m()];
    let h0: Vec<EdgeId> =
        if variant == Variant::Weighted { (0..g.m()).filter(|&e| g.weight(e) == 0).collect() } else { Vec::new() };
    let mut h1 = HashSet::new();
    let mut h2 = Vec::new();
    let last = trace.events.iter().map(|e| e.event.iteration()).max().map_or(0, |i| i + 1);
    let mut stats: Vec<IterationStats> = (0..last)
        .map(|iteration| IterationStats {
            iteration,
            rho_max: Rounded::Zero,
            phi: 0,
            candidates: 0,
            stars_added: 0,
            terminated: 0,
        })
        .collect();
    let mut cand_rho: HashMap<(usize, VertexId), (Ratio, Rounded, usize)> = HashMap::new();
    let mut added: HashSet<(usize, VertexId)> = HashSet::new();
    for rec in &trace.events {
        match &rec.event {
            SpannerEvent::Density { iteration, rho } => {
                let s = &mut stats[*iteration];
                s.rho_max = s.rho_max.max(rho.rounded());
            }
            SpannerEvent::Candidate { iteration, rho, rho_tilde, spanned, .. } => {
                stats[*iteration].candidates += 1;
                cand_rho.insert((*iteration, rec.node), (*rho, *rho_tilde, spanned.len()));
            }
            SpannerEvent::StarAdded { iteration, star, .. } => {
                stats[*iteration].stars_added += 1;
                added.insert((*iteration, rec.node));
                h1.extend(star.iter().copied());
            }
            SpannerEvent::Terminated { iteration, edges } => {
                stats[*iteration].terminated += 1;
                for &e in edges {
                    cost[e] = Ratio::new(if variant == Variant::Weighted { g.weight(e) } else { 1 }, 1);
                    h2.push(e);
                }
            }
            SpannerEvent::Votes { .. } => {}
        }
    }
    for rec in &trace.events {
        if let SpannerEvent::Votes { iteration, candidate, edges } = &rec.event {
            if added.contains(&(*iteration, *candidate)) {
                let (rho, _, _) = cand_rho[&(*iteration, *candidate)];
                for &e in edges {
                    cost[e] = Ratio::new(rho.den, rho.num);
                }
            }
        }
    }
    for (&(it, _), &(_, rt, c)) in &cand_rho {
        if rt == stats[it].rho_max {
            stats[it].phi += c as u64;
        }
    }
    let mut h1: Vec<EdgeId> = h1.into_iter().collect();
    h1.sort_unstable();
    h2.sort_unstable();
    h2.dedup();
    CostCertificate { cost, h0, h1, h2, iterations: stats }
}

/// Outcome of the independent replay.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub violations: Vec<String>,
    /// `cost(H)` (size, or weight in weighted mode).
    pub spanner_cost: u64,
    /// `Σ cost(e)` as an exact `num/den` string.
    pub total_cost: String,
    pub stars_added: usize,
    pub candidates: usize,
    pub fallbacks: usize,
    /// Distinct values taken by the maximum rounded density.
    pub rho_max_values: usize,
    /// `(φ, φ')` over consecutive iterations with unchanged `ρ_max`.
    pub phi_pairs: Vec<(u64, u64)>,
}

impl CertificateReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Coverage {
    out: Vec<FixedBitSet>,
    inn: Vec<FixedBitSet>,
}

impl Coverage {
    fn new(n: usize) -> Self {
        Coverage { out: vec![FixedBitSet::with_capacity(n); n], inn: vec![FixedBitSet::with_capacity(n); n] }
    }

    fn add(&mut self, g: &Graph, e: EdgeId) {
        let edge = g.edge(e);
        self.out[edge.u].insert(edge.v);
        self.inn[edge.v].insert(edge.u);
        if !g.is_directed() {
            self.out[edge.v].insert(edge.u);
            self.inn[edge.u].insert(edge.v);
        }
    }

    fn covers(&self, g: &Graph, h: &EdgeSubset, e: EdgeId) -> bool {
        let edge = g.edge(e);
        h.contains(e) || !self.out[edge.u].is_disjoint(&self.inn[edge.v])
    }
}

fn local_w_max(g: &Graph, v: VertexId) -> u64 {
    let dist = g.bfs_distances(v);
    g.edges()
        .iter()
        .filter(|e| dist[e.u] <= 2 || dist[e.v] <= 2)
        .map(|e| e.weight)
        .max()
        .unwrap_or(0)
}

/// Replays a run from the graph alone and checks the certificate, the star
/// choice laws, the voting rule and the potential function.
pub fn certificate_check(g: &Graph, result: &SpannerResult) -> CertificateReport {
    let variant = result.variant;
    let mut report = CertificateReport::default();
    let mut bad = |msg: String| report.violations.push(msg);
    let n = g.n();
    let m = g.m();
    let directed = g.is_directed();
    let shift = variant.threshold_shift();
    let targets: Vec<EdgeId> = (0..m).filter(|&e| is_target(variant, g.edge(e).client)).collect();
    let dist2: Vec<Vec<VertexId>> = (0..n)
        .map(|v| {
            let d = g.bfs_distances(v);
            (0..n).filter(|&u| d[u] <= 2).collect()
        })
        .collect();
    let thresholds: Vec<Ratio> = (0..n)
        .map(|v| threshold(variant, if variant == Variant::Weighted { local_w_max(g, v) } else { 0 }))
        .collect();

    // Events grouped by iteration.
    let iterations = result.certificate.iterations.len();
    let mut densities: Vec<HashMap<VertexId, Ratio>> = vec![HashMap::new(); iterations];
    let mut candidates: Vec<Vec<(VertexId, &SpannerEvent)>> = vec![Vec::new(); iterations];
    let mut terminated: Vec<HashMap<VertexId, Vec<EdgeId>>> = vec![HashMap::new(); iterations];
    let mut votes: Vec<HashMap<EdgeId, Vec<VertexId>>> = vec![HashMap::new(); iterations];
    let mut added: Vec<HashMap<VertexId, (Vec<EdgeId>, usize)>> = vec![HashMap::new(); iterations];
    for rec in &result.trace.events {
        let it = rec.event.iteration();
        match &rec.event {
            SpannerEvent::Density { rho, .. } => {
                densities[it].insert(rec.node, *rho);
            }
            SpannerEvent::Candidate { .. } => candidates[it].push((rec.node, &rec.event)),
            SpannerEvent::Terminated { edges, .. } => {
                terminated[it].insert(rec.node, edges.clone());
            }
            SpannerEvent::Votes { candidate, edges, .. } => {
                for &e in edges {
                    votes[it].entry(e).or_default().push(*candidate);
                }
            }
            SpannerEvent::StarAdded { star, votes: v, .. } => {
                added[it].insert(rec.node, (star.clone(), *v));
            }
        }
    }

    let mut h = g.empty_subset();
    let mut cov = Coverage::new(n);
    if variant == Variant::Weighted {
        for e in 0..m {
            if g.weight(e) == 0 {
                h.insert(e);
                cov.add(g, e);
            }
        }
    }
    let mut live = vec![true; n];
    let mut est: Vec<Option<Ratio>> = vec![None; n];
    let mut prev_star: Vec<Option<(Vec<EdgeId>, Rounded)>> = vec![None; n];
    let mut cost = vec![BigRational::zero(); m];
    let mut rho_series: Vec<(Rounded, u64)> = Vec::new();

    for it in 0..iterations {
        let uncovered = EdgeSubset::from_ids(m, targets.iter().copied().filter(|&e| !cov.covers(g, &h, e)));
        // Densities of live vertices.
        let mut rho = vec![Ratio::ZERO; n];
        for v in (0..n).filter(|&v| live[v]) {
            let r = match StarProblem::from_graph(g, v, &uncovered, variant) {
                Ok(p) => p.densest(&p.full_mask()).map(|mk| p.density(&mk)).unwrap_or(Ratio::ZERO),
                Err(e) => {
                    bad(format!("iteration {it}: star problem at {v}: {e}"));
                    Ratio::ZERO
                }
            };
            let r = match est[v] {
                Some(prev) if directed => prev.min(r),
                _ => r,
            };
            est[v] = Some(r);
            rho[v] = r;
            match densities[it].get(&v) {
                Some(&logged) if logged == r => {}
                Some(&logged) => bad(format!("iteration {it}: vertex {v} reported density {logged}, replay gives {r}")),
                None => bad(format!("iteration {it}: live vertex {v} reported no density")),
            }
        }
        for &v in densities[it].keys() {
            if !live[v] {
                bad(format!("iteration {it}: halted vertex {v} reported a density"));
            }
        }
        let top: Vec<Ratio> = (0..n).map(|v| dist2[v].iter().map(|&u| rho[u]).max().unwrap_or(Ratio::ZERO)).collect();

        // Terminations.
        for v in (0..n).filter(|&v| live[v]) {
            let should = top[v].is_zero() || top[v] < thresholds[v];
            match (should, terminated[it].get(&v)) {
                (true, Some(edges)) => {
                    let mut expect: Vec<EdgeId> = g
                        .incident(v)
                        .iter()
                        .map(|&(_, e)| e)
                        .filter(|&e| uncovered.contains(e) && is_eligible(variant, g.edge(e).server) && !h.contains(e))
                        .collect();
                    expect.sort_unstable();
                    expect.dedup();
                    if &expect != edges {
                        bad(format!("iteration {it}: vertex {v} terminated with {edges:?}, expected {expect:?}"));
                    }
                }
                (true, None) => bad(format!("iteration {it}: vertex {v} should have terminated")),
                (false, Some(_)) => bad(format!("iteration {it}: vertex {v} terminated early")),
                (false, None) => {}
            }
        }
        for &v in terminated[it].keys() {
            if !live[v] {
                bad(format!("iteration {it}: halted vertex {v} terminated again"));
            }
        }

        // Candidates.
        let rho_max = (0..n).filter(|&v| live[v]).map(|v| rho[v].rounded()).max().unwrap_or(Rounded::Zero);
        let mut phi = 0u64;
        let mut stars: HashMap<VertexId, (HashSet<EdgeId>, u64)> = HashMap::new();
        let mut spanned_of: HashMap<VertexId, (usize, Ratio)> = HashMap::new();
        let logged: HashSet<VertexId> = candidates[it].iter().map(|(v, _)| *v).collect();
        for v in (0..n).filter(|&v| live[v] && !terminated[it].contains_key(&v)) {
            let should = rho[v].rounded() == top[v].rounded() && !rho[v].is_zero() && rho[v] >= thresholds[v];
            if should != logged.contains(&v) {
                bad(format!("iteration {it}: vertex {v} candidacy {} disagrees with replay", logged.contains(&v)));
            }
            if !should {
                prev_star[v] = None;
            }
        }
        for &(v, ev) in &candidates[it] {
            let SpannerEvent::Candidate { star, spanned, rank, rho: logged_rho, rho_tilde, fallback, .. } = ev else {
                unreachable!()
            };
            report.candidates += 1;
            if *fallback {
                report.fallbacks += 1;
                bad(format!("iteration {it}: vertex {v} hit the star-choice fallback"));
            }
            if *rho_tilde != rho[v].rounded() {
                bad(format!("iteration {it}: vertex {v} candidate at {rho_tilde}, replay {}", rho[v].rounded()));
            }
            for &u in &dist2[v] {
                if live[u] && rho[u].rounded() > *rho_tilde {
                    bad(format!("iteration {it}: candidate {v} is not a 2-hop maximum ({u} is denser)"));
                }
            }
            let p = match StarProblem::from_graph(g, v, &uncovered, variant) {
                Ok(p) => p,
                Err(e) => {
                    bad(format!("iteration {it}: {e}"));
                    continue;
                }
            };
            let mask = match p.mask_of(star) {
                Ok(mk) if !star.is_empty() => mk,
                _ => {
                    bad(format!("iteration {it}: candidate {v} announced an invalid star"));
                    continue;
                }
            };
            let r = p.density(&mask);
            if r != *logged_rho {
                bad(format!("iteration {it}: candidate {v} star density {logged_rho}, replay {r}"));
            }
            if &p.spanned(&mask) != spanned {
                bad(format!("iteration {it}: candidate {v} spanned set differs from replay"));
            }
            if !r.at_least(*rho_tilde, shift) {
                bad(format!("iteration {it}: candidate {v} star density {r} below threshold of {rho_tilde}"));
            }
            if let Some((prev, pr)) = &prev_star[v] {
                if pr == rho_tilde && !star.iter().all(|e| prev.binary_search(e).is_ok()) {
                    bad(format!("iteration {it}: candidate {v} left its previous star at unchanged density"));
                }
            }
            prev_star[v] = Some((star.clone(), *rho_tilde));
            if *rho_tilde == rho_max {
                phi += spanned.len() as u64;
            }
            stars.insert(v, (star.iter().copied().collect(), *rank));
            spanned_of.insert(v, (spanned.len(), r));
        }

        // Votes.
        let halting: HashSet<VertexId> = terminated[it].keys().copied().collect();
        let mut tally: HashMap<VertexId, usize> = HashMap::new();
        for e in uncovered.iter() {
            let edge = g.edge(e);
            let mut expect: Option<(u64, VertexId)> = None;
            if !halting.contains(&edge.u) && !halting.contains(&edge.v) {
                for &(c, a) in g.out_edges(edge.u) {
                    let Some((star, rank)) = stars.get(&c) else { continue };
                    let b = g.out_edges(c).iter().find(|&&(y, _)| y == edge.v).map(|&(_, x)| x);
                    if let Some(b) = b {
                        if star.contains(&a) && star.contains(&b) && expect.is_none_or(|bst| (*rank, c) < bst) {
                            expect = Some((*rank, c));
                        }
                    }
                }
            }
            let got = votes[it].get(&e).cloned().unwrap_or_default();
            match expect {
                Some((_, c)) => {
                    if got != vec![c] {
                        bad(format!("iteration {it}: edge {e} voted {got:?}, expected [{c}]"));
                    }
                    *tally.entry(c).or_default() += 1;
                }
                None => {
                    if !got.is_empty() {
                        bad(format!("iteration {it}: edge {e} voted {got:?} without a spanning candidate"));
                    }
                }
            }
        }
        for e in votes[it].keys() {
            if !uncovered.contains(*e) {
                bad(format!("iteration {it}: covered edge {e} voted"));
            }
        }

        // Commits and costs.
        for (&v, &(c_len, r)) in &spanned_of {
            let t = tally.get(&v).copied().unwrap_or(0);
            let should = 8 * t >= c_len;
            match (should, added[it].get(&v)) {
                (true, Some((star, logged_votes))) => {
                    if *logged_votes != t {
                        bad(format!("iteration {it}: star at {v} counted {logged_votes} votes, replay {t}"));
                    }
                    report.stars_added += 1;
                    let unit = BigRational::new(BigInt::from(r.den), BigInt::from(r.num));
                    for (e, voters) in &votes[it] {
                        if voters.contains(&v) {
                            cost[*e] = unit.clone();
                        }
                    }
                    for &e in star {
                        h.insert(e);
                        cov.add(g, e);
                    }
                }
                (true, None) => bad(format!("iteration {it}: star at {v} had {t} of {c_len} votes but was not added")),
                (false, Some(_)) => bad(format!("iteration {it}: star at {v} added with {t} of {c_len} votes")),
                (false, None) => {}
            }
        }
        for &v in added[it].keys() {
            if !spanned_of.contains_key(&v) {
                bad(format!("iteration {it}: vertex {v} added a star without candidacy"));
            }
        }
        for (&v, edges) in &terminated[it] {
            for &e in edges {
                cost[e] = BigRational::from_integer(BigInt::from(if variant == Variant::Weighted { g.weight(e) } else { 1 }));
                h.insert(e);
                cov.add(g, e);
            }
            live[v] = false;
        }
        rho_series.push((rho_max, phi));
    }

    if live.iter().any(|&l| l) {
        bad("replay ends with live vertices".to_string());
    }

    // Spanner, certificate and the cost inequality.
    if h != result.h {
        bad("replayed spanner differs from the node outputs".to_string());
    }
    match verify_spanner(g, &result.h, 2, if variant == Variant::ClientServer { SpannerMode::ClientServer } else { SpannerMode::Plain }) {
        Ok(rep) => {
            if rep.uncovered != result.uncoverable {
                bad(format!("uncovered edges {:?}, expected {:?}", rep.uncovered, result.uncoverable));
            }
        }
        Err(e) => bad(format!("verification failed: {e}")),
    }
    for (e, c) in cost.iter().enumerate() {
        if *c != result.certificate.cost[e].to_big() {
            bad(format!("cost of edge {e} is {}, replay gives {c}", result.certificate.cost[e]));
        }
    }
    let total = cost.iter().fold(BigRational::zero(), |a, c| a + c);
    let spanner_cost: u64 =
        if variant == Variant::Weighted { result.h.iter().map(|e| g.weight(e)).sum() } else { result.h.len() as u64 };
    if BigRational::from_integer(BigInt::from(spanner_cost)) > total.clone() * BigRational::from_integer(BigInt::from(8)) {
        bad(format!("cost(H) = {spanner_cost} exceeds 8 * {total}"));
    }

    // Potential function and the maximum rounded density.
    let mut values: Vec<Rounded> = rho_series.iter().map(|&(r, _)| r).collect();
    for (i, w) in rho_series.windows(2).enumerate() {
        let ((r0, p0), (r1, p1)) = (w[0], w[1]);
        if r1 > r0 {
            bad(format!("iteration {}: maximum rounded density rose from {r0} to {r1}", i + 1));
        }
        if r1 == r0 {
            if p1 > p0 {
                bad(format!("iteration {}: potential rose from {p0} to {p1} at unchanged density", i + 1));
            }
            if p0 > 0 {
                report.phi_pairs.push((p0, p1));
            }
        }
    }
    for (i, s) in result.certificate.iterations.iter().enumerate() {
        if let Some(&(r, p)) = rho_series.get(i) {
            if s.rho_max != r || s.phi != p {
                bad(format!("iteration {i}: certificate series ({}, {}) differs from replay ({r}, {p})", s.rho_max, s.phi));
            }
        }
    }
    values.dedup();
    values.retain(|r| *r != Rounded::Zero);
    report.rho_max_values = values.len();
    if variant == Variant::Unweighted {
        let bound = (2.0 * ((g.max_degree() + 1) as f64).log2()).ceil() as usize + 2;
        if values.len() > bound {
            bad(format!("maximum rounded density took {} values, bound {bound}", values.len()));
        }
    }
    report.spanner_cost = spanner_cost;
    report.total_cost = crate::density::big_to_string(&total);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::oracle::{min_spanner_exact, OracleBudget};

    fn run(g: &Graph, variant: Variant, seed: u64) -> SpannerResult {
        let r = two_spanner(g, variant, seed, 10_000).unwrap();
        let check = certificate_check(g, &r);
        assert!(check.ok(), "{:?}", check.violations);
        r
    }

    #[test]
    fn tree_keeps_every_edge() {
        let g = Graph::from_edges(6, false, &[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]).unwrap();
        let r = run(&g, Variant::Unweighted, 1);
        assert_eq!(r.h, g.full_subset());
        assert_eq!(r.iterations, 1);
        assert!(r.certificate.cost.iter().all(|c| *c == Ratio::new(1, 1)));
        assert_eq!(certificate_check(&g, &r).total_cost, "5/1");
    }

    #[test]
    fn k4_lowest_rank_star_collects_all_its_votes() {
        let g = Graph::from_edges(4, false, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let (opt, _) = min_spanner_exact(&g, 2, Variant::Unweighted, OracleBudget::default()).unwrap();
        assert_eq!(opt, 3);
        for seed in 0..10 {
            let r = run(&g, Variant::Unweighted, seed);
            // Every vertex is a candidate with its full star at density 1.
            let mut ranked: Vec<(u64, VertexId)> = r
                .trace
                .events
                .iter()
                .filter_map(|e| match &e.event {
                    SpannerEvent::Candidate { rank, star, .. } if star.len() == 3 => Some((*rank, e.node)),
                    _ => None,
                })
                .collect();
            assert_eq!(ranked.len(), 4);
            ranked.sort_unstable();
            let first = ranked[0].1;
            let votes = r.trace.events.iter().find_map(|e| match &e.event {
                SpannerEvent::StarAdded { votes, .. } if e.node == first => Some(*votes),
                _ => None,
            });
            assert_eq!(votes, Some(3));
            // All six edges vote at density 1, and later stars also clear
            // the |C_v|/8 bar, so the spanner ends up larger than optimal.
            assert_eq!(certificate_check(&g, &r).total_cost, "6/1");
            assert!(r.h.len() >= opt as usize);
        }
    }

    #[test]
    fn weighted_triangle_avoids_heavy_edge() {
        let g = Graph::from_weighted_edges(3, false, &[(0, 1, 1), (0, 2, 1), (1, 2, 10)]).unwrap();
        let r = run(&g, Variant::Weighted, 7);
        assert_eq!(r.h.to_vec(), vec![0, 1]);
        assert_eq!(spanner_cost_of(&g, &r), 2);
    }

    fn spanner_cost_of(g: &Graph, r: &SpannerResult) -> u64 {
        r.h.iter().map(|e| g.weight(e)).sum()
    }

    #[test]
    fn weight_zero_edges_start_in_the_spanner() {
        let g = Graph::from_weighted_edges(4, false, &[(0, 1, 0), (0, 2, 0), (1, 2, 5), (2, 3, 2)]).unwrap();
        let r = run(&g, Variant::Weighted, 3);
        assert!(r.h.contains(0) && r.h.contains(1) && !r.h.contains(2) && r.h.contains(3));
        assert_eq!(r.certificate.h0, vec![0, 1]);
    }

    #[test]
    fn directed_triangle_and_cycle() {
        let g = Graph::from_edges(3, true, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = run(&g, Variant::Directed, 5);
        assert!(r.h.len() <= 3);
        let c = Graph::from_edges(4, true, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(run(&c, Variant::Directed, 5).h.len(), 4);
    }

    #[test]
    fn client_server_reports_uncoverable_edges() {
        let mut b = GraphBuilder::new(4).client_server(true);
        b.full_edge(0, 1, 1, false, true).unwrap();
        b.full_edge(0, 2, 1, false, true).unwrap();
        b.full_edge(1, 2, 1, true, false).unwrap();
        b.full_edge(2, 3, 1, true, false).unwrap();
        let g = b.build().unwrap();
        let r = run(&g, Variant::ClientServer, 9);
        assert_eq!(r.uncoverable, vec![3]);
        assert_eq!(r.h.to_vec(), vec![0, 1]);
    }

    #[test]
    fn runs_are_reproducible_across_execution_modes() {
        let g = crate::generate::random_connected(30, 0.3, 11);
        let mut cfg = SpannerConfig::new(Variant::Unweighted, 4);
        cfg.record_payloads = true;
        let a = two_spanner_with(&g, &cfg).unwrap();
        cfg.exec = Execution::Sequential;
        let b = two_spanner_with(&g, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn random_graphs_pass_the_replay() {
        for seed in 0..12 {
            let g = crate::generate::random_connected(25, [0.1, 0.3, 0.6][seed as usize % 3], seed);
            run(&g, Variant::Unweighted, seed);
        }
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let g = Graph::from_edges(2, false, &[(0, 1)]).unwrap();
        assert!(matches!(two_spanner(&g, Variant::Directed, 0, 100), Err(SpannerError::Variant(_))));
    }
}
