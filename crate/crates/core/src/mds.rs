//! Distributed minimum dominating set with the same voting scheme as the
//! 2-spanner algorithm. Densities are counts of uncovered vertices in the
//! closed neighborhood, so every message is a few bytes.
//!
//! | phase | sends |
//! |-------|-------|
//! | 0 | "I became covered" |
//! | 1 | rounded density |
//! | 2 | maximum rounded density heard |
//! | 3 | candidacy with a rank |
//! | 4 | votes of uncovered vertices |
//! | 5 | joins to the dominating set |

use std::collections::{HashMap, HashSet};

use num::{BigInt, BigRational, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{big_to_string, Ratio, Rounded};
use crate::graph::{Graph, VertexId};
use crate::par::Execution;
use crate::sim::{self, decode, encode, LocalView, NodeProgram, SimConfig, SimError, Step, Trace};

pub const PHASES: usize = 6;

#[derive(Debug, Serialize, Deserialize)]
enum Msg {
    Covered,
    Density(Rounded),
    Relay(Rounded),
    Candidate(u64),
    Vote,
    Join,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MdsEvent {
    Density { iteration: usize, rho: u64 },
    Candidate { iteration: usize, rank: u64, covers: Vec<VertexId> },
    Vote { iteration: usize, candidate: VertexId },
    Joined { iteration: usize, votes: usize },
}

impl MdsEvent {
    pub fn iteration(&self) -> usize {
        match self {
            MdsEvent::Density { iteration, .. }
            | MdsEvent::Candidate { iteration, .. }
            | MdsEvent::Vote { iteration, .. }
            | MdsEvent::Joined { iteration, .. } => *iteration,
        }
    }
}

pub type MdsTrace = Trace<bool, MdsEvent>;

pub struct MdsNode {
    id: VertexId,
    n: usize,
    covered: bool,
    announced: bool,
    /// Uncovered members of the closed neighborhood.
    uncovered: HashSet<VertexId>,
    rho: Rounded,
    heard: Rounded,
    candidate: Option<(u64, usize)>,
    offers: Vec<(u64, VertexId)>,
    votes: usize,
    joined: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MdsProgram;

impl NodeProgram for MdsProgram {
    type State = MdsNode;
    type Output = bool;
    type Event = MdsEvent;

    fn init(&self, view: &LocalView<'_>) -> MdsNode {
        let mut uncovered: HashSet<VertexId> = view.neighbors.iter().copied().collect();
        uncovered.insert(view.id);
        MdsNode {
            id: view.id,
            n: view.n,
            covered: false,
            announced: false,
            uncovered,
            rho: Rounded::Zero,
            heard: Rounded::Zero,
            candidate: None,
            offers: Vec::new(),
            votes: 0,
            joined: false,
        }
    }

    fn step(&self, s: &mut MdsNode, step: &mut Step<'_, bool, MdsEvent>) {
        for (from, payload) in step.inbox() {
            match decode::<Msg>(payload) {
                Msg::Covered => {
                    s.uncovered.remove(from);
                }
                Msg::Density(r) | Msg::Relay(r) => s.heard = s.heard.max(r),
                Msg::Candidate(rank) => s.offers.push((rank, *from)),
                Msg::Vote => s.votes += 1,
                Msg::Join => s.covered = true,
            }
        }
        let iteration = step.round() / PHASES;
        match step.round() % PHASES {
            0 => {
                if s.covered && !s.announced {
                    s.announced = true;
                    s.uncovered.remove(&s.id);
                    step.broadcast(&encode(&Msg::Covered));
                }
            }
            1 => {
                s.rho = Rounded::Zero;
                s.heard = Rounded::Zero;
                if s.uncovered.is_empty() {
                    return;
                }
                let rho = s.uncovered.len() as u64;
                s.rho = Ratio::new(rho, 1).rounded();
                s.heard = s.rho;
                step.event(MdsEvent::Density { iteration, rho });
                step.broadcast(&encode(&Msg::Density(s.rho)));
            }
            2 => {
                // Fully covered nodes keep relaying until their neighborhood is quiet.
                if s.uncovered.is_empty() && s.heard == Rounded::Zero {
                    step.output(s.joined);
                    return;
                }
                step.broadcast(&encode(&Msg::Relay(s.heard)));
            }
            3 => {
                if !s.uncovered.is_empty() && s.rho >= s.heard {
                    let rank = step.rng().gen_range(1..=(s.n as u64).saturating_pow(4).max(1));
                    let mut covers: Vec<VertexId> = s.uncovered.iter().copied().collect();
                    covers.sort_unstable();
                    s.candidate = Some((rank, covers.len()));
                    s.offers.push((rank, s.id));
                    step.event(MdsEvent::Candidate { iteration, rank, covers });
                    step.broadcast(&encode(&Msg::Candidate(rank)));
                }
                s.heard = Rounded::Zero;
            }
            4 => {
                if !s.covered {
                    if let Some(&(_, c)) = s.offers.iter().min() {
                        step.event(MdsEvent::Vote { iteration, candidate: c });
                        if c == s.id {
                            s.votes += 1;
                        } else {
                            step.send(c, encode(&Msg::Vote));
                        }
                    }
                }
                s.offers.clear();
            }
            _ => {
                if let Some((_, size)) = s.candidate.take() {
                    if 8 * s.votes >= size {
                        s.joined = true;
                        s.covered = true;
                        step.event(MdsEvent::Joined { iteration, votes: s.votes });
                        step.broadcast(&encode(&Msg::Join));
                    }
                }
                s.votes = 0;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsCertificate {
    /// `cost(v)` per vertex.
    pub cost: Vec<Ratio>,
    /// Per iteration: maximum rounded density and the potential.
    pub rho_max: Vec<Rounded>,
    pub phi: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MdsResult {
    /// Sorted dominating set.
    pub dominating: Vec<VertexId>,
    pub iterations: usize,
    pub certificate: MdsCertificate,
    pub trace: MdsTrace,
}

#[derive(Debug, Error)]
pub enum MdsError {
    #[error("dominating set needs an undirected graph")]
    Directed,
    #[error("round limit {limit} reached with {live} vertices still running")]
    RoundLimit { limit: usize, live: usize, partial: Box<MdsTrace> },
    #[error("simulation error: {0}")]
    Sim(String),
}

pub fn mds(g: &Graph, seed: u64, max_rounds: usize) -> Result<MdsResult, MdsError> {
    mds_with(g, seed, max_rounds, Execution::default())
}

pub fn mds_with(g: &Graph, seed: u64, max_rounds: usize, exec: Execution) -> Result<MdsResult, MdsError> {
    if g.is_directed() {
        return Err(MdsError::Directed);
    }
    let cfg = SimConfig { seed, max_rounds, exec, record_payloads: false };
    let trace = sim::run(g, &MdsProgram, cfg).map_err(|e| match e {
        SimError::RoundLimit { limit, live, partial } => MdsError::RoundLimit { limit, live, partial },
        other => MdsError::Sim(other.to_string()),
    })?;
    let dominating: Vec<VertexId> = (0..g.n()).filter(|&v| trace.outputs[v] == Some(true)).collect();
    let iterations = trace.events.iter().map(|e| e.event.iteration() + 1).max().unwrap_or(0);
    let mut cost = vec![Ratio::ZERO; g.n()];
    let mut size: HashMap<(usize, VertexId), u64> = HashMap::new();
    let mut joined: HashSet<(usize, VertexId)> = HashSet::new();
    let mut rho_max = vec![Rounded::Zero; iterations];
    let mut phi = vec![0u64; iterations];
    for rec in &trace.events {
        match &rec.event {
            MdsEvent::Density { iteration, rho } => {
                rho_max[*iteration] = rho_max[*iteration].max(Ratio::new(*rho, 1).rounded());
            }
            MdsEvent::Candidate { iteration, covers, .. } => {
                size.insert((*iteration, rec.node), covers.len() as u64);
            }
            MdsEvent::Joined { iteration, .. } => {
                joined.insert((*iteration, rec.node));
            }
            MdsEvent::Vote { .. } => {}
        }
    }
    for (&(it, _), &c) in &size {
        if Ratio::new(c, 1).rounded() == rho_max[it] {
            phi[it] += c;
        }
    }
    for rec in &trace.events {
        if let MdsEvent::Vote { iteration, candidate } = rec.event {
            if joined.contains(&(iteration, candidate)) {
                cost[rec.node] = Ratio::new(1, size[&(iteration, candidate)]);
            }
        }
    }
    Ok(MdsResult { dominating, iterations, certificate: MdsCertificate { cost, rho_max, phi }, trace })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MdsReport {
    pub violations: Vec<String>,
    pub size: usize,
    pub total_cost: String,
    pub rho_max_values: usize,
    pub phi_pairs: Vec<(u64, u64)>,
}

impl MdsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays a run from the graph and checks domination, the voting rule and
/// `|D| <= 8 Σ cost(v)` in exact arithmetic.
pub fn mds_check(g: &Graph, result: &MdsResult) -> MdsReport {
    let mut report = MdsReport::default();
    let mut bad = |m: String| report.violations.push(m);
    let n = g.n();
    let closed: Vec<Vec<VertexId>> = (0..n)
        .map(|v| {
            let mut c = g.neighbors(v).to_vec();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    let dist2: Vec<Vec<VertexId>> = (0..n)
        .map(|v| {
            let d = g.bfs_distances(v);
            (0..n).filter(|&u| d[u] <= 2).collect()
        })
        .collect();
    let mut by_iter: Vec<Vec<(VertexId, &MdsEvent)>> = vec![Vec::new(); result.iterations];
    for rec in &result.trace.events {
        by_iter[rec.event.iteration()].push((rec.node, &rec.event));
    }
    let mut covered = vec![false; n];
    let mut in_d = vec![false; n];
    let mut cost = vec![BigRational::zero(); n];
    let mut series: Vec<(Rounded, u64)> = Vec::new();
    for (it, events) in by_iter.iter().enumerate() {
        let dens: Vec<u64> = (0..n).map(|v| closed[v].iter().filter(|&&u| !covered[u]).count() as u64).collect();
        let rounded: Vec<Rounded> = dens.iter().map(|&d| Ratio::new(d, 1).rounded()).collect();
        let mut logged: HashMap<VertexId, u64> = HashMap::new();
        let mut cands: HashMap<VertexId, (u64, Vec<VertexId>)> = HashMap::new();
        let mut votes: HashMap<VertexId, VertexId> = HashMap::new();
        let mut joins: HashMap<VertexId, usize> = HashMap::new();
        for &(v, ev) in events {
            match ev {
                MdsEvent::Density { rho, .. } => {
                    logged.insert(v, *rho);
                }
                MdsEvent::Candidate { rank, covers, .. } => {
                    cands.insert(v, (*rank, covers.clone()));
                }
                MdsEvent::Vote { candidate, .. } => {
                    if votes.insert(v, *candidate).is_some() {
                        bad(format!("iteration {it}: vertex {v} voted twice"));
                    }
                }
                MdsEvent::Joined { votes: k, .. } => {
                    joins.insert(v, *k);
                }
            }
        }
        for v in 0..n {
            let expect = (dens[v] > 0).then_some(dens[v]);
            if logged.get(&v).copied() != expect {
                bad(format!("iteration {it}: vertex {v} density {:?}, replay {expect:?}", logged.get(&v)));
            }
            let top = dist2[v].iter().map(|&u| rounded[u]).max().unwrap_or(Rounded::Zero);
            let should = dens[v] > 0 && rounded[v] >= top;
            if should != cands.contains_key(&v) {
                bad(format!("iteration {it}: vertex {v} candidacy disagrees with replay"));
            }
            if let Some((_, covers)) = cands.get(&v) {
                let expect: Vec<VertexId> = closed[v].iter().copied().filter(|&u| !covered[u]).collect();
                if *covers != expect {
                    bad(format!("iteration {it}: candidate {v} covers {covers:?}, replay {expect:?}"));
                }
            }
        }
        let mut tally: HashMap<VertexId, usize> = HashMap::new();
        for v in (0..n).filter(|&v| !covered[v]) {
            let best = closed[v].iter().filter_map(|c| cands.get(c).map(|(r, _)| (*r, *c))).min();
            match (best, votes.get(&v)) {
                (Some((_, c)), Some(&got)) if got == c => *tally.entry(c).or_default() += 1,
                (None, None) => {}
                (b, got) => bad(format!("iteration {it}: vertex {v} voted {got:?}, expected {:?}", b.map(|x| x.1))),
            }
        }
        for v in votes.keys() {
            if covered[*v] {
                bad(format!("iteration {it}: covered vertex {v} voted"));
            }
        }
        let rho_max = rounded.iter().copied().max().unwrap_or(Rounded::Zero);
        let mut phi = 0u64;
        for (&c, (_, covers)) in &cands {
            let size = covers.len();
            if rounded[c] == rho_max {
                phi += size as u64;
            }
            let t = tally.get(&c).copied().unwrap_or(0);
            match (8 * t >= size, joins.get(&c)) {
                (true, Some(&k)) => {
                    if k != t {
                        bad(format!("iteration {it}: {c} counted {k} votes, replay {t}"));
                    }
                    for (&u, &cc) in &votes {
                        if cc == c {
                            cost[u] = BigRational::new(BigInt::from(1), BigInt::from(size as u64));
                        }
                    }
                    in_d[c] = true;
                }
                (true, None) => bad(format!("iteration {it}: {c} had {t} of {size} votes but did not join")),
                (false, Some(_)) => bad(format!("iteration {it}: {c} joined with {t} of {size} votes")),
                (false, None) => {}
            }
        }
        for &c in joins.keys() {
            if !cands.contains_key(&c) {
                bad(format!("iteration {it}: {c} joined without candidacy"));
            }
        }
        for v in 0..n {
            if in_d[v] {
                for &u in &closed[v] {
                    covered[u] = true;
                }
            }
        }
        series.push((rho_max, phi));
    }
    let dominating: Vec<VertexId> = (0..n).filter(|&v| in_d[v]).collect();
    if dominating != result.dominating {
        bad("replayed dominating set differs from the outputs".to_string());
    }
    for v in 0..n {
        if !closed[v].iter().any(|&u| in_d[u]) {
            bad(format!("vertex {v} is not dominated"));
        }
        if cost[v] != result.certificate.cost[v].to_big() {
            bad(format!("cost of vertex {v} differs from replay"));
        }
    }
    let total = cost.iter().fold(BigRational::zero(), |a, c| a + c);
    if BigRational::from_integer(BigInt::from(dominating.len())) > total.clone() * BigRational::from_integer(BigInt::from(8)) {
        bad(format!("|D| = {} exceeds 8 * {total}", dominating.len()));
    }
    let mut values: Vec<Rounded> = series.iter().map(|s| s.0).collect();
    for w in series.windows(2) {
        if w[1].0 > w[0].0 {
            bad(format!("maximum rounded density rose from {} to {}", w[0].0, w[1].0));
        }
        if w[1].0 == w[0].0 {
            if w[1].1 > w[0].1 {
                bad(format!("potential rose from {} to {}", w[0].1, w[1].1));
            }
            if w[0].1 > 0 {
                report.phi_pairs.push((w[0].1, w[1].1));
            }
        }
    }
    if series.iter().map(|s| s.0).collect::<Vec<_>>() != result.certificate.rho_max
        || series.iter().map(|s| s.1).collect::<Vec<_>>() != result.certificate.phi
    {
        bad("certificate series differ from replay".to_string());
    }
    values.dedup();
    values.retain(|r| *r != Rounded::Zero);
    let bound = ((g.max_degree() + 1) as f64).log2().ceil() as usize + 1;
    if values.len() > bound {
        bad(format!("maximum rounded density took {} values, bound {bound}", values.len()));
    }
    report.rho_max_values = values.len();
    report.size = dominating.len();
    report.total_cost = big_to_string(&total);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{min_dominating_set_exact, OracleBudget};
    use crate::sim::audit;

    fn run(g: &Graph, seed: u64) -> MdsResult {
        let r = mds(g, seed, 10_000).unwrap();
        let rep = mds_check(g, &r);
        assert!(rep.ok(), "{:?}", rep.violations);
        r
    }

    #[test]
    fn star_picks_its_center() {
        let g = Graph::from_edges(5, false, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        for seed in 0..5 {
            let r = run(&g, seed);
            assert_eq!(r.dominating, vec![0]);
            let joined = r.trace.events.iter().find_map(|e| match e.event {
                MdsEvent::Joined { votes, .. } => Some(votes),
                _ => None,
            });
            assert_eq!(joined, Some(5));
        }
    }

    #[test]
    fn single_edge_takes_lower_ranked_endpoint() {
        let g = Graph::from_edges(2, false, &[(0, 1)]).unwrap();
        for seed in 0..10 {
            let r = run(&g, seed);
            assert_eq!(r.dominating.len(), 1);
            let ranks: Vec<(u64, VertexId)> = r
                .trace
                .events
                .iter()
                .filter_map(|e| match e.event {
                    MdsEvent::Candidate { rank, .. } => Some((rank, e.node)),
                    _ => None,
                })
                .collect();
            assert_eq!(ranks.len(), 2);
            assert_eq!(r.dominating[0], ranks.iter().min().unwrap().1);
        }
    }

    #[test]
    fn four_cycle_against_oracle() {
        let g = Graph::from_edges(4, false, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let (opt, _) = min_dominating_set_exact(&g, OracleBudget::default()).unwrap();
        assert_eq!(opt, 2);
        for seed in 0..10 {
            let r = run(&g, seed);
            assert!(r.dominating.len() >= opt);
        }
    }

    #[test]
    fn messages_fit_congest_budget() {
        let g = crate::generate::random_connected(80, 0.1, 2);
        let r = run(&g, 2);
        let a = audit(&r.trace, &g, None).unwrap();
        assert!(a.max_message_bits <= 16 * (80f64.log2().ceil() as u64));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn replay_accepts_random_runs(n in 1usize..40, p in 0.02f64..0.6, seed in 0u64..1000) {
            let g = crate::generate::random_connected(n, p, seed);
            let r = mds(&g, seed, 100_000).unwrap();
            let rep = mds_check(&g, &r);
            proptest::prop_assert!(rep.ok(), "{:?}", rep.violations);
        }
    }
}
