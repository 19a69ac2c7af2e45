//! Dinic max-flow over `i128` capacities, with residual reuse so that a
//! network can be extended and re-augmented after an initial solve.

use std::collections::VecDeque;

pub type Cap = i128;
pub const INF: Cap = Cap::MAX / 4;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<Cap>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u -> v` with capacity `c` and reverse capacity `rc`.
    pub fn add_edge(&mut self, u: usize, v: usize, c: Cap, rc: Cap) {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(rc);
        self.adj[v].push(id + 1);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &id in &self.adj[x] {
                let y = self.to[id];
                if self.cap[id] > 0 && self.level[y] < 0 {
                    self.level[y] = self.level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, x: usize, t: usize, limit: Cap) -> Cap {
        if x == t {
            return limit;
        }
        while self.iter[x] < self.adj[x].len() {
            let id = self.adj[x][self.iter[x]];
            let y = self.to[id];
            if self.cap[id] > 0 && self.level[y] == self.level[x] + 1 {
                let pushed = self.dfs(y, t, limit.min(self.cap[id]));
                if pushed > 0 {
                    self.cap[id] -= pushed;
                    self.cap[id ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[x] += 1;
        }
        0
    }

    /// Augments until no `s`-`t` path remains; returns the additional flow.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Cap {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, INF);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual graph: the inclusion-minimal
    /// source side among all minimum cuts.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        self.reachable_from(s)
    }

    /// Nodes reachable from `x` through positive residual capacity.
    pub fn reachable_from(&self, x: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(x) = queue.pop_front() {
            for &id in &self.adj[x] {
                let y = self.to[id];
                if self.cap[id] > 0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Nodes that can still reach `t` in the residual graph. Every other
    /// node lies on the source side of the inclusion-maximal minimum cut.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(x) = queue.pop_front() {
            for &id in &self.adj[x] {
                // `id` is x -> y; its partner `id ^ 1` is y -> x.
                let y = self.to[id];
                if self.cap[id ^ 1] > 0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS example, max flow 23.
        let mut f = FlowNetwork::new(6);
        for (u, v, c) in [(0, 1, 16), (0, 2, 13), (1, 3, 12), (2, 1, 4), (2, 4, 14), (3, 2, 9), (3, 5, 20), (4, 3, 7), (4, 5, 4)] {
            f.add_edge(u, v, c, 0);
        }
        assert_eq!(f.max_flow(0, 5), 23);
        let side = f.source_side(0);
        assert!(side[0] && !side[5]);
    }

    #[test]
    fn reaugment_after_extension() {
        let mut f = FlowNetwork::new(3);
        f.add_edge(0, 1, 2, 0);
        f.add_edge(1, 2, 5, 0);
        assert_eq!(f.max_flow(0, 2), 2);
        f.add_edge(0, 1, 10, 0);
        assert_eq!(f.max_flow(0, 2), 3);
    }
}
