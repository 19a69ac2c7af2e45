//! Exact node-weighted densest subgraph by parametric min-cut.
//!
//! Maximizes `|E(U)| / c(U)` over nonempty `U`. Dinkelbach iteration drives
//! the parameter to the optimum; ties are then broken towards the smallest
//! set and, among those, the lexicographically smallest index list.

use crate::density::Ratio;
use crate::flow::{Cap, FlowNetwork};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseSet {
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    pub num: u64,
    pub den: u64,
}

impl DenseSet {
    pub fn density(&self) -> Ratio {
        Ratio::new(self.num, self.den)
    }
}

/// Densest subgraph among `allowed` nodes. Pairs joining two zero-cost nodes
/// are ignored: any set they would make dense has zero cost, and zero-cost
/// sets have density zero by definition. Returns `None` when nothing is
/// allowed.
pub fn densest_subgraph(costs: &[u64], pairs: &[(usize, usize)], allowed: &[bool]) -> Option<DenseSet> {
    let active: Vec<usize> = (0..costs.len()).filter(|&i| allowed[i]).collect();
    let first = *active.first()?;
    let mut local = vec![usize::MAX; costs.len()];
    for (li, &i) in active.iter().enumerate() {
        local[i] = li;
    }
    let k = active.len();
    let lcost: Vec<u64> = active.iter().map(|&i| costs[i]).collect();
    let lpairs: Vec<(usize, usize)> = pairs
        .iter()
        .filter(|&&(a, b)| allowed[a] && allowed[b] && (costs[a] > 0 || costs[b] > 0))
        .map(|&(a, b)| (local[a], local[b]))
        .collect();
    if lpairs.is_empty() {
        return Some(DenseSet { nodes: vec![first], num: 0, den: costs[first] });
    }
    let mut deg = vec![0u64; k];
    for &(a, b) in &lpairs {
        deg[a] += 1;
        deg[b] += 1;
    }
    let max_deg = *deg.iter().max().unwrap_or(&0) as Cap;

    let eval = |set: &[bool]| -> (u64, u64) {
        let num = lpairs.iter().filter(|&&(a, b)| set[a] && set[b]).count() as u64;
        let den = (0..k).filter(|&i| set[i]).map(|i| lcost[i]).sum();
        (num, den)
    };

    // Network for lambda = p/q: s = k, t = k + 1.
    let build = |p: u64, q: u64| -> FlowNetwork {
        let (p, q) = (p as Cap, q as Cap);
        let big = q * max_deg;
        let mut net = FlowNetwork::new(k + 2);
        for i in 0..k {
            net.add_edge(k, i, big, 0);
            net.add_edge(i, k + 1, big + 2 * p * lcost[i] as Cap - q * deg[i] as Cap, 0);
        }
        for &(a, b) in &lpairs {
            net.add_edge(a, b, q, q);
        }
        net
    };

    let all = vec![true; k];
    let (mut p, mut q) = eval(&all);
    let base = loop {
        let mut net = build(p, q);
        let bound = k as Cap * q as Cap * max_deg;
        let flow = net.max_flow(k, k + 1);
        if flow == bound {
            break net;
        }
        let side = net.source_side(k);
        let (np, nq) = eval(&side[..k]);
        debug_assert!(Ratio::new(np, nq) > Ratio::new(p, q));
        p = np;
        q = nq;
    };

    // Every densest set lies inside the maximal maximizer: the nodes that
    // cannot reach the sink in the residual network. At the optimum the
    // smallest densest set containing such a node `x` is exactly the set of
    // nodes residual-reachable from `x`, and the smallest densest sets are
    // among these.
    let reach_sink = base.sink_side(k + 1);
    let mut best: Option<Vec<usize>> = None;
    for x in 0..k {
        if reach_sink[x] || lcost[x] == 0 {
            continue;
        }
        let side = base.reachable_from(x);
        let set: Vec<usize> = (0..k).filter(|&i| side[i]).collect();
        let better = match &best {
            None => true,
            Some(b) => (set.len(), &set) < (b.len(), b),
        };
        if better {
            best = Some(set);
        }
    }
    let set = best.expect("an optimal set contains a positive-cost node");
    let mut mask = vec![false; k];
    set.iter().for_each(|&i| mask[i] = true);
    let (num, den) = eval(&mask);
    Some(DenseSet { nodes: set.into_iter().map(|i| active[i]).collect(), num, den })
}
