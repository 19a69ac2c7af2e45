//! Deterministic round-synchronous message passing.
//!
//! Every live node steps once per round with the messages its neighbors
//! sent in the previous round. Node steps may run in parallel; their
//! effects are merged in node-id order, so traces do not depend on the
//! thread count. Each node draws randomness from its own ChaCha stream
//! keyed by `(seed, node id)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};
use crate::par::{self, Execution};
use crate::star::Orientation;

/// What a node knows about one incident edge at start-up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentEdge {
    pub edge: EdgeId,
    pub other: VertexId,
    pub weight: u64,
    pub client: bool,
    pub server: bool,
    pub orientation: Orientation,
}

/// The communication network: bidirectional links between neighbors, plus
/// each node's knowledge of its incident input edges.
#[derive(Clone, Debug)]
pub struct Topology {
    neighbors: Vec<Vec<VertexId>>,
    incident: Vec<Vec<IncidentEdge>>,
}

impl Topology {
    pub fn from_graph(g: &Graph) -> Self {
        let incident = (0..g.n())
            .map(|v| {
                g.incident(v)
                    .iter()
                    .map(|&(x, e)| {
                        let edge = g.edge(e);
                        let orientation = if !g.is_directed() {
                            Orientation::Undirected
                        } else if edge.u == v {
                            Orientation::Out
                        } else {
                            Orientation::In
                        };
                        IncidentEdge { edge: e, other: x, weight: edge.weight, client: edge.client, server: edge.server, orientation }
                    })
                    .collect()
            })
            .collect();
        Topology { neighbors: (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect(), incident }
    }

    /// A bare network given by sorted, symmetric neighbor lists.
    pub fn from_neighbors(neighbors: Vec<Vec<VertexId>>) -> Self {
        let incident = vec![Vec::new(); neighbors.len()];
        Topology { neighbors, incident }
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v]
    }

    pub fn is_link(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn view(&self, v: VertexId) -> LocalView<'_> {
        LocalView { id: v, n: self.n(), neighbors: &self.neighbors[v], incident: &self.incident[v] }
    }
}

/// Start-up knowledge of a node.
#[derive(Clone, Copy, Debug)]
pub struct LocalView<'a> {
    pub id: VertexId,
    /// Number of nodes (a polynomial bound would do).
    pub n: usize,
    pub neighbors: &'a [VertexId],
    pub incident: &'a [IncidentEdge],
}

/// Per-round interface handed to a node.
pub struct Step<'a, O, E> {
    round: usize,
    id: VertexId,
    neighbors: &'a [VertexId],
    inbox: &'a [(VertexId, Vec<u8>)],
    rng: &'a mut ChaCha8Rng,
    outbox: Vec<(VertexId, Vec<u8>)>,
    output: Option<O>,
    events: Vec<E>,
}

impl<'a, O, E> Step<'a, O, E> {
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn id(&self) -> VertexId {
        self.id
    }

    pub fn neighbors(&self) -> &'a [VertexId] {
        self.neighbors
    }

    /// Messages sent to this node last round, ordered by sender id.
    pub fn inbox(&self) -> &'a [(VertexId, Vec<u8>)] {
        self.inbox
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    pub fn send(&mut self, to: VertexId, payload: Vec<u8>) {
        self.outbox.push((to, payload));
    }

    pub fn broadcast(&mut self, payload: &[u8]) {
        for &u in self.neighbors {
            self.outbox.push((u, payload.to_vec()));
        }
    }

    /// Final output; the node halts after this round.
    pub fn output(&mut self, out: O) {
        self.output = Some(out);
    }

    pub fn event(&mut self, e: E) {
        self.events.push(e);
    }
}

pub trait NodeProgram: Sync {
    type State: Send;
    type Output: Clone + Send + Serialize;
    type Event: Clone + Send + Serialize;

    fn init(&self, view: &LocalView<'_>) -> Self::State;

    fn step(&self, state: &mut Self::State, step: &mut Step<'_, Self::Output, Self::Event>);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub max_rounds: usize,
    pub exec: Execution,
    pub record_payloads: bool,
}

impl SimConfig {
    pub fn new(seed: u64, max_rounds: usize) -> Self {
        SimConfig { seed, max_rounds, exec: Execution::default(), record_payloads: false }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_payloads(mut self, yes: bool) -> Self {
        self.record_payloads = yes;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    /// Round in which the message was sent; it is delivered one round later.
    pub round: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub bits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord<E> {
    pub round: usize,
    pub node: VertexId,
    pub event: E,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace<O, E> {
    pub seed: u64,
    pub n: usize,
    /// Index of the last executed round (round 0 has an empty inbox).
    pub rounds: usize,
    pub messages: Vec<MessageRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payloads: Option<Vec<Vec<u8>>>,
    pub events: Vec<EventRecord<E>>,
    pub outputs: Vec<Option<O>>,
    pub output_rounds: Vec<Option<usize>>,
    /// SHA-256 over every message (round, endpoints, payload) and output.
    pub digest: String,
}

#[derive(Debug, Error)]
pub enum SimError<O, E> {
    #[error("round limit {limit} reached with {live} nodes still running")]
    RoundLimit { limit: usize, live: usize, partial: Box<Trace<O, E>> },
    #[error("node {from} sent a message to non-neighbor {to} in round {round}")]
    NonIncident { round: usize, from: VertexId, to: VertexId },
    #[error("max_rounds must be at least 1")]
    ZeroRoundLimit,
}

struct NodeSlot<S> {
    state: S,
    rng: ChaCha8Rng,
    live: bool,
}

struct StepResult<O, E> {
    outbox: Vec<(VertexId, Vec<u8>)>,
    output: Option<O>,
    events: Vec<E>,
}

/// Runs `program` on the network of `g`.
pub fn run<P: NodeProgram>(g: &Graph, program: &P, config: SimConfig) -> Result<Trace<P::Output, P::Event>, SimError<P::Output, P::Event>> {
    run_on(&Topology::from_graph(g), program, config)
}

pub fn run_on<P: NodeProgram>(
    topo: &Topology,
    program: &P,
    config: SimConfig,
) -> Result<Trace<P::Output, P::Event>, SimError<P::Output, P::Event>> {
    if config.max_rounds < 1 {
        return Err(SimError::ZeroRoundLimit);
    }
    let n = topo.n();
    let mut nodes: Vec<NodeSlot<P::State>> = (0..n)
        .map(|v| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(v as u64);
            NodeSlot { state: program.init(&topo.view(v)), rng, live: true }
        })
        .collect();
    let mut trace = Trace {
        seed: config.seed,
        n,
        rounds: 0,
        messages: Vec::new(),
        payloads: config.record_payloads.then(Vec::new),
        events: Vec::new(),
        outputs: vec![None; n],
        output_rounds: vec![None; n],
        digest: String::new(),
    };
    let mut hasher = Sha256::new();
    let mut inboxes: Vec<Vec<(VertexId, Vec<u8>)>> = vec![Vec::new(); n];
    let mut live = n;
    let mut round = 0;
    while live > 0 {
        if round > config.max_rounds {
            trace.rounds = round - 1;
            trace.digest = finish(hasher, &trace.outputs);
            return Err(SimError::RoundLimit { limit: config.max_rounds, live, partial: Box::new(trace) });
        }
        let inbox_ref = &inboxes;
        let results: Vec<Option<StepResult<P::Output, P::Event>>> = par::map_mut(config.exec, &mut nodes, |v, slot| {
            if !slot.live {
                return None;
            }
            let mut step = Step {
                round,
                id: v,
                neighbors: topo.neighbors(v),
                inbox: &inbox_ref[v],
                rng: &mut slot.rng,
                outbox: Vec::new(),
                output: None,
                events: Vec::new(),
            };
            program.step(&mut slot.state, &mut step);
            Some(StepResult { outbox: step.outbox, output: step.output, events: step.events })
        });
        let mut next: Vec<Vec<(VertexId, Vec<u8>)>> = vec![Vec::new(); n];
        for (v, result) in results.into_iter().enumerate() {
            let Some(result) = result else { continue };
            let mut outbox = result.outbox;
            outbox.sort_by_key(|(to, _)| *to);
            for (to, payload) in outbox {
                if !topo.is_link(v, to) {
                    return Err(SimError::NonIncident { round, from: v, to });
                }
                hasher.update((round as u64).to_le_bytes());
                hasher.update((v as u64).to_le_bytes());
                hasher.update((to as u64).to_le_bytes());
                hasher.update((payload.len() as u64).to_le_bytes());
                hasher.update(&payload);
                trace.messages.push(MessageRecord { round, from: v, to, bits: 8 * payload.len() as u64 });
                if let Some(p) = trace.payloads.as_mut() {
                    p.push(payload.clone());
                }
                next[to].push((v, payload));
            }
            for event in result.events {
                trace.events.push(EventRecord { round, node: v, event });
            }
            if let Some(out) = result.output {
                trace.outputs[v] = Some(out);
                trace.output_rounds[v] = Some(round);
                nodes[v].live = false;
                live -= 1;
            }
        }
        // Messages to halted nodes are recorded but never delivered.
        for (v, inbox) in next.iter_mut().enumerate() {
            if !nodes[v].live {
                inbox.clear();
            }
        }
        inboxes = next;
        trace.rounds = round;
        round += 1;
    }
    trace.digest = finish(hasher, &trace.outputs);
    Ok(trace)
}

fn finish<O: Serialize>(mut hasher: Sha256, outputs: &[Option<O>]) -> String {
    hasher.update(serde_json::to_vec(outputs).unwrap_or_default());
    hex::encode(hasher.finalize())
}

/// Compact message encoding shared by the node programs.
pub fn encode<T: Serialize>(msg: &T) -> Vec<u8> {
    postcard::to_allocvec(msg).expect("in-memory encoding cannot fail")
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> T {
    postcard::from_bytes(bytes).expect("messages are produced by the same program")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutReport {
    pub bits: u64,
    pub messages: u64,
    pub edges: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rounds: usize,
    pub messages: u64,
    pub max_message_bits: u64,
    pub total_bits: u64,
    pub cut: Option<CutReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("partition has {got} entries for {n} vertices")]
    PartitionSize { got: usize, n: usize },
}

/// Bit accounting over a trace. `side_b[v]` marks membership in `V_B`; the
/// cut edge count is taken over the edges of `g`.
pub fn audit<O, E>(trace: &Trace<O, E>, g: &Graph, side_b: Option<&[bool]>) -> Result<AuditReport, AuditError> {
    let cut = match side_b {
        None => None,
        Some(side) => {
            if side.len() != trace.n || side.len() != g.n() {
                return Err(AuditError::PartitionSize { got: side.len(), n: g.n() });
            }
            let crossing = trace.messages.iter().filter(|m| side[m.from] != side[m.to]);
            let (bits, messages) = crossing.fold((0, 0), |(b, c), m| (b + m.bits, c + 1));
            let edges = g.edges().iter().filter(|e| side[e.u] != side[e.v]).count();
            Some(CutReport { bits, messages, edges })
        }
    };
    Ok(AuditReport {
        rounds: trace.rounds,
        messages: trace.messages.len() as u64,
        max_message_bits: trace.messages.iter().map(|m| m.bits).max().unwrap_or(0),
        total_bits: trace.messages.iter().map(|m| m.bits).sum(),
        cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    struct Silent;

    impl NodeProgram for Silent {
        type State = ();
        type Output = u8;
        type Event = ();
        fn init(&self, _: &LocalView<'_>) {}
        fn step(&self, _: &mut (), step: &mut Step<'_, u8, ()>) {
            step.output(1);
        }
    }

    /// Floods known ids until every id is known, sending each id once.
    struct Flood;

    struct FloodState {
        known: Vec<bool>,
        fresh: Vec<usize>,
    }

    impl NodeProgram for Flood {
        type State = FloodState;
        type Output = Vec<usize>;
        type Event = ();
        fn init(&self, view: &LocalView<'_>) -> FloodState {
            let mut known = vec![false; view.n];
            known[view.id] = true;
            FloodState { known, fresh: vec![view.id] }
        }
        fn step(&self, s: &mut FloodState, step: &mut Step<'_, Vec<usize>, ()>) {
            for (_, payload) in step.inbox() {
                for id in decode::<Vec<usize>>(payload) {
                    if !s.known[id] {
                        s.known[id] = true;
                        s.fresh.push(id);
                    }
                }
            }
            if !s.fresh.is_empty() {
                let msg = encode(&std::mem::take(&mut s.fresh));
                step.broadcast(&msg);
            }
            if s.known.iter().all(|&k| k) {
                step.output((0..s.known.len()).collect());
            }
        }
    }

    struct Noisy;

    impl NodeProgram for Noisy {
        type State = u32;
        type Output = u64;
        type Event = u64;
        fn init(&self, _: &LocalView<'_>) -> u32 {
            0
        }
        fn step(&self, s: &mut u32, step: &mut Step<'_, u64, u64>) {
            let x: u64 = step.rng().gen();
            step.event(x);
            step.broadcast(&x.to_le_bytes());
            *s += 1;
            if *s == 4 {
                step.output(x);
            }
        }
    }

    struct Rogue;

    impl NodeProgram for Rogue {
        type State = ();
        type Output = ();
        type Event = ();
        fn init(&self, _: &LocalView<'_>) {}
        fn step(&self, _: &mut (), step: &mut Step<'_, (), ()>) {
            if step.id() == 0 {
                step.send(2, vec![1]);
            }
        }
    }

    fn path3() -> Graph {
        Graph::from_edges(3, false, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn immediate_output_has_no_message_rounds() {
        let t = run(&path3(), &Silent, SimConfig::new(1, 5)).unwrap();
        assert_eq!(t.rounds, 0);
        assert!(t.messages.is_empty());
        assert!(t.outputs.iter().all(|o| *o == Some(1)));
        let a = audit(&t, &path3(), None).unwrap();
        assert_eq!((a.total_bits, a.max_message_bits, a.messages), (0, 0, 0));
    }

    #[test]
    fn flooding_a_path_takes_two_rounds() {
        let t = run(&path3(), &Flood, SimConfig::new(1, 10)).unwrap();
        assert_eq!(t.rounds, 2);
        assert_eq!(t.output_rounds, vec![Some(2), Some(1), Some(2)]);
        // Every payload carries at most one id byte per fresh id, and no
        // message repeats an id: ids fit in ceil(log2 3) = 2 bits each.
        assert!(t.messages.iter().all(|m| m.bits <= 8 * 3));
    }

    #[test]
    fn round_limit_reports_partial_trace() {
        let err = run(&path3(), &Flood, SimConfig::new(1, 1)).unwrap_err();
        match err {
            SimError::RoundLimit { live, partial, .. } => {
                assert_eq!(live, 2);
                assert_eq!(partial.rounds, 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_neighbor_message_is_rejected() {
        let err = run(&path3(), &Rogue, SimConfig::new(1, 3)).unwrap_err();
        assert!(matches!(err, SimError::NonIncident { round: 0, from: 0, to: 2 }));
    }

    #[test]
    fn identical_runs_and_thread_counts_agree() {
        let g = Graph::from_edges(5, false, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let cfg = SimConfig::new(42, 10).with_payloads(true);
        let a = run(&g, &Noisy, cfg).unwrap();
        let b = run(&g, &Noisy, cfg.with_exec(Execution::Sequential)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run(&g, &Noisy, SimConfig::new(43, 10)).unwrap();
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn delivered_messages_were_sent_on_links() {
        let g = Graph::from_edges(4, false, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = run(&g, &Noisy, SimConfig::new(3, 10)).unwrap();
        for m in &t.messages {
            assert!(g.neighbors(m.from).contains(&m.to));
        }
        // Each live node broadcasts once per round for four rounds.
        assert_eq!(t.messages.len(), 4 * 2 * g.m());
    }

    #[test]
    fn audit_rejects_bad_partition() {
        let t = run(&path3(), &Silent, SimConfig::new(1, 5)).unwrap();
        assert!(audit(&t, &path3(), Some(&[true, false])).is_err());
        let a = audit(&t, &path3(), Some(&[true, false, false])).unwrap();
        assert_eq!(a.cut, Some(CutReport { bits: 0, messages: 0, edges: 1 }));
    }
}
