//! Seeded random graph families and exhaustive small-graph enumeration.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphBuilder, GraphFlags, VertexId};

/// Undirected edge list of `G(n, p)` with its components joined by random
/// edges, in a canonical order.
fn connected_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for &(u, v) in &pairs {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let mut comps: Vec<Vec<VertexId>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(v);
    }
    for i in 1..comps.len() {
        let a = *comps[rng.gen_range(0..i)].choose(rng).expect("nonempty component");
        let b = *comps[i].choose(rng).expect("nonempty component");
        pairs.push((a.min(b), a.max(b)));
    }
    pairs.sort_unstable();
    pairs
}

/// Connected undirected graph from `G(n, p)`.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Graph::from_edges(n, false, &connected_pairs(n, p, &mut rng)).expect("generated edges are simple")
}

/// Connected graph with integer weights drawn from `0..=w_max`.
pub fn random_weighted(n: usize, p: f64, w_max: u64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = connected_pairs(n, p, &mut rng);
    let edges: Vec<(VertexId, VertexId, u64)> = pairs.into_iter().map(|(u, v)| (u, v, rng.gen_range(0..=w_max))).collect();
    Graph::from_weighted_edges(n, false, &edges).expect("generated edges are simple")
}

/// Directed graph whose underlying graph is connected: each connected pair
/// gets one arc, the reverse arc, or both.
pub fn random_directed(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for (u, v) in connected_pairs(n, p, &mut rng) {
        match rng.gen_range(0..3) {
            0 => arcs.push((u, v)),
            1 => arcs.push((v, u)),
            _ => {
                arcs.push((u, v));
                arcs.push((v, u));
            }
        }
    }
    Graph::from_edges(n, true, &arcs).expect("generated arcs are simple")
}

/// Connected client-server graph: every edge is a client, a server or both.
pub fn random_client_server(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = connected_pairs(n, p, &mut rng);
    let mut b = GraphBuilder::with_flags(n, GraphFlags { directed: false, weighted: false, client_server: true });
    for (u, v) in pairs {
        let (client, server) = match rng.gen_range(0..3) {
            0 => (true, false),
            1 => (false, true),
            _ => (true, true),
        };
        b.full_edge(u, v, 1, client, server).expect("generated edges are simple");
    }
    b.build().expect("generated edges are simple")
}

/// Bit index of the pair `u < v` in an upper-triangle encoding.
fn pair_bit(u: usize, v: usize) -> u32 {
    (v * (v - 1) / 2 + u) as u32
}

fn encode_adj(adj: &[u32], order: &[usize]) -> u64 {
    // order[i] = original vertex placed at position i.
    let n = order.len();
    let mut code = 0u64;
    for j in 1..n {
        for i in 0..j {
            if adj[order[i]] >> order[j] & 1 == 1 {
                code |= 1 << pair_bit(i, j);
            }
        }
    }
    code
}

/// Stable vertex colors from iterated degree refinement.
fn refine(adj: &[u32]) -> Vec<usize> {
    let n = adj.len();
    let mut color = vec![0usize; n];
    loop {
        let mut sig: Vec<(usize, Vec<usize>, usize)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&u| adj[v] >> u & 1 == 1).map(|u| color[u]).collect();
                nb.sort_unstable();
                (color[v], nb, v)
            })
            .collect();
        sig.sort();
        let mut next = vec![0usize; n];
        let mut c = 0;
        for i in 0..n {
            if i > 0 && (sig[i].0 != sig[i - 1].0 || sig[i].1 != sig[i - 1].1) {
                c += 1;
            }
            next[sig[i].2] = c;
        }
        let classes = |col: &[usize]| col.iter().collect::<HashSet<_>>().len();
        if classes(&next) == classes(&color) {
            return next;
        }
        color = next;
    }
}

/// Canonical code: the smallest encoding over orderings that list color
/// classes in order and permute freely within each class.
fn canonical(adj: &[u32]) -> u64 {
    let n = adj.len();
    let color = refine(adj);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let k = color.iter().max().map_or(0, |c| c + 1);
    for c in 0..k {
        classes.push((0..n).filter(|&v| color[v] == c).collect());
    }
    let mut best = u64::MAX;
    let mut order = Vec::with_capacity(n);
    fn rec(classes: &mut [Vec<usize>], ci: usize, order: &mut Vec<usize>, adj: &[u32], best: &mut u64) {
        if ci == classes.len() {
            *best = (*best).min(encode_adj(adj, order));
            return;
        }
        let len = classes[ci].len();
        permute(classes, ci, 0, len, order, adj, best);
    }
    fn permute(
        classes: &mut [Vec<usize>],
        ci: usize,
        i: usize,
        len: usize,
        order: &mut Vec<usize>,
        adj: &[u32],
        best: &mut u64,
    ) {
        if i == len {
            let start = order.len();
            order.extend(classes[ci].iter().copied());
            rec(classes, ci + 1, order, adj, best);
            order.truncate(start);
            return;
        }
        for j in i..len {
            classes[ci].swap(i, j);
            permute(classes, ci, i + 1, len, order, adj, best);
            classes[ci].swap(i, j);
        }
    }
    rec(&mut classes, 0, &mut order, adj, &mut best);
    best
}

fn decode_code(n: usize, code: u64) -> Vec<(VertexId, VertexId)> {
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if code >> pair_bit(u, v) & 1 == 1 {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// All graphs on `n` vertices up to isomorphism, as sorted canonical codes.
fn all_codes(n: usize) -> Vec<u64> {
    assert!(n <= 8, "enumeration limited to 8 vertices");
    let mut codes = vec![0u64];
    for size in 1..n {
        let mut next: HashSet<u64> = HashSet::new();
        for &code in &codes {
            let mut adj = vec![0u32; size + 1];
            for (u, v) in decode_code(size, code) {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
            for mask in 0u32..(1 << size) {
                let mut grown = adj.clone();
                grown[size] = mask;
                for (u, row) in grown.iter_mut().enumerate().take(size) {
                    if mask >> u & 1 == 1 {
                        *row |= 1 << size;
                    }
                }
                next.insert(canonical(&grown));
            }
        }
        codes = next.into_iter().collect();
        codes.sort_unstable();
    }
    codes
}

/// All graphs on `n` vertices, one per isomorphism class.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    all_codes(n)
        .into_iter()
        .map(|c| Graph::from_edges(n, false, &decode_code(n, c)).expect("decoded edges are simple"))
        .collect()
}

/// Connected graphs on `n` vertices, one per isomorphism class.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    all_graphs(n).into_iter().filter(|g| g.is_connected()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts_match_known_sequence() {
        // Connected graphs up to isomorphism: 1, 1, 2, 6, 21, 112.
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
        assert_eq!(all_graphs(5).len(), 34);
    }

    #[test]
    fn random_families_are_connected_and_reproducible() {
        for seed in 0..20 {
            let g = random_connected(30, 0.05, seed);
            assert!(g.is_connected());
            assert_eq!(crate::graph::format_graph(&g), crate::graph::format_graph(&random_connected(30, 0.05, seed)));
            assert!(random_weighted(20, 0.1, 5, seed).is_connected());
            assert!(random_directed(20, 0.1, seed).is_connected());
            let cs = random_client_server(20, 0.2, seed);
            assert!(cs.is_connected() && cs.is_client_server());
        }
    }
}
