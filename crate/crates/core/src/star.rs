//! Stars, their densities, the densest-star computation and the star
//! choice procedure used by the distributed 2-spanner algorithm.
//!
//! All work happens on a [`StarProblem`]: the incident edges ("slots") of a
//! center together with the still-uncovered edges that pairs of slots would
//! 2-span. The node program builds it from what it has learned; the free
//! functions at the bottom build it from a whole [`Graph`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densest::densest_subgraph;
use crate::density::{Ratio, Rounded};
use crate::graph::{EdgeId, EdgeSubset, Graph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Unweighted,
    Weighted,
    Directed,
    ClientServer,
}

impl Variant {
    /// The variant implied by the graph's flags.
    pub fn for_graph(g: &Graph) -> Variant {
        if g.is_directed() {
            Variant::Directed
        } else if g.is_client_server() {
            Variant::ClientServer
        } else if g.is_weighted() {
            Variant::Weighted
        } else {
            Variant::Unweighted
        }
    }

    pub fn check(self, g: &Graph) -> Result<(), StarError> {
        let ok = match self {
            Variant::Directed => g.is_directed(),
            Variant::Unweighted => !g.is_directed(),
            Variant::Weighted => !g.is_directed() && g.is_weighted(),
            Variant::ClientServer => !g.is_directed() && g.is_client_server(),
        };
        if ok {
            Ok(())
        } else {
            Err(StarError::VariantMismatch(self))
        }
    }

    /// Exponent shift of the growth threshold relative to the rounded
    /// density: `/4`, or `/8` with the directed approximation.
    pub fn threshold_shift(self) -> i32 {
        if self == Variant::Directed {
            -3
        } else {
            -2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Unweighted => "unweighted",
            Variant::Weighted => "weighted",
            Variant::Directed => "directed",
            Variant::ClientServer => "client-server",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StarError {
    #[error("empty star")]
    EmptyStar,
    #[error("edge {edge} is not an eligible edge at center {center}")]
    NotIncident { center: VertexId, edge: EdgeId },
    #[error("vertex {0} has no eligible incident edge")]
    Isolated(VertexId),
    #[error("variant {} does not match the graph", .0.name())]
    VariantMismatch(Variant),
    #[error("star choice at vertex {0} found no dense star inside the previous one")]
    FallbackReached(VertexId),
    #[error("chosen star at vertex {0} is below the density threshold")]
    BelowThreshold(VertexId),
}

/// How a slot edge is oriented relative to the center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Undirected,
    /// leaf -> center
    In,
    /// center -> leaf
    Out,
}

/// One incident edge of the center that a star may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub edge: EdgeId,
    pub leaf: VertexId,
    pub cost: u64,
    pub orientation: Orientation,
}

/// An uncovered edge that becomes 2-spanned once both slots are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: usize,
    pub b: usize,
    pub edge: EdgeId,
}

/// A center together with a nonempty set of its incident edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Star {
    pub center: VertexId,
    /// Sorted edge ids.
    pub edges: Vec<EdgeId>,
}

impl Star {
    pub fn new(center: VertexId, mut edges: Vec<EdgeId>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Star { center, edges }
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, g: &Graph) -> u64 {
        self.edges.iter().map(|&e| g.weight(e)).sum()
    }

    /// Distinct leaves, sorted.
    pub fn leaves(&self, g: &Graph) -> Vec<VertexId> {
        let mut l: Vec<VertexId> = self.edges.iter().map(|&e| g.edge(e).other(self.center)).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    pub fn is_subset_of(&self, other: &Star) -> bool {
        self.edges.iter().all(|e| other.edges.binary_search(e).is_ok())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityValue {
    /// `C_S`, sorted.
    pub spanned: Vec<EdgeId>,
    pub num: u64,
    pub den: u64,
    pub rho: Ratio,
    pub rho_tilde: Rounded,
}

/// Local densest-star instance around one center.
#[derive(Clone, Debug)]
pub struct StarProblem {
    variant: Variant,
    center: VertexId,
    slots: Vec<Slot>,
    pairs: Vec<Pair>,
    /// Per slot: (other slot, pair index) for every pair it belongs to.
    incidence: Vec<Vec<(usize, usize)>>,
}

impl StarProblem {
    /// Slots are reordered by (leaf, orientation, edge); pair endpoints are
    /// given as indices into the input slot list. In weighted mode pairs of
    /// two zero-cost slots are dropped: weight-0 edges belong to the spanner
    /// from the start, so such pairs are always covered already.
    pub fn new(variant: Variant, center: VertexId, slots: Vec<Slot>, pairs: Vec<Pair>) -> Self {
        let free = |i: usize| variant == Variant::Weighted && slots[i].cost == 0;
        let pairs: Vec<Pair> = pairs.into_iter().filter(|p| !(free(p.a) && free(p.b))).collect();
        let mut order: Vec<usize> = (0..slots.len()).collect();
        order.sort_unstable_by_key(|&i| (slots[i].leaf, slots[i].orientation, slots[i].edge));
        let mut rank = vec![0; slots.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let slots: Vec<Slot> = order.iter().map(|&i| slots[i]).collect();
        let mut pairs: Vec<Pair> = pairs
            .into_iter()
            .map(|p| Pair { a: rank[p.a], b: rank[p.b], edge: p.edge })
            .collect();
        pairs.sort_unstable_by_key(|p| p.edge);
        let mut incidence = vec![Vec::new(); slots.len()];
        for (i, p) in pairs.iter().enumerate() {
            incidence[p.a].push((p.b, i));
            incidence[p.b].push((p.a, i));
        }
        StarProblem { variant, center, slots, pairs, incidence }
    }

    /// Builds the instance at `v` from the whole graph, with `uncovered` as
    /// the reference set `H`.
    pub fn from_graph(g: &Graph, v: VertexId, uncovered: &EdgeSubset, variant: Variant) -> Result<Self, StarError> {
        variant.check(g)?;
        let mut slots = Vec::new();
        let mut by_leaf: HashMap<VertexId, [Option<usize>; 2]> = HashMap::new();
        for &(x, e) in g.incident(v) {
            let edge = g.edge(e);
            if variant == Variant::ClientServer && !edge.server {
                continue;
            }
            let orientation = match variant {
                Variant::Directed if edge.u == v => Orientation::Out,
                Variant::Directed => Orientation::In,
                _ => Orientation::Undirected,
            };
            let cost = if variant == Variant::Weighted { edge.weight } else { 1 };
            let entry = by_leaf.entry(x).or_default();
            entry[usize::from(orientation == Orientation::Out)] = Some(slots.len());
            slots.push(Slot { edge: e, leaf: x, cost, orientation });
        }
        let mut leaves: Vec<VertexId> = by_leaf.keys().copied().collect();
        leaves.sort_unstable();
        let mut pairs = Vec::new();
        for &a in &leaves {
            for &(b, e) in g.out_edges(a) {
                if b == v || !uncovered.contains(e) {
                    continue;
                }
                let Some(bs) = by_leaf.get(&b) else { continue };
                let asl = &by_leaf[&a];
                match variant {
                    Variant::Directed => {
                        // arc a -> b is spanned through a -> v -> b.
                        if let (Some(sa), Some(sb)) = (asl[0], bs[1]) {
                            pairs.push(Pair { a: sa, b: sb, edge: e });
                        }
                    }
                    _ => {
                        if a > b || (variant == Variant::ClientServer && !g.edge(e).client) {
                            continue;
                        }
                        if let (Some(sa), Some(sb)) = (asl[0], bs[0]) {
                            pairs.push(Pair { a: sa, b: sb, edge: e });
                        }
                    }
                }
            }
        }
        Ok(StarProblem::new(variant, v, slots, pairs))
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn center(&self) -> VertexId {
        self.center
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn full_mask(&self) -> Vec<bool> {
        vec![true; self.slots.len()]
    }

    /// Mask of the slots carrying the given edges.
    pub fn mask_of(&self, edges: &[EdgeId]) -> Result<Vec<bool>, StarError> {
        let mut mask = vec![false; self.slots.len()];
        for &e in edges {
            let i = self
                .slots
                .iter()
                .position(|s| s.edge == e)
                .ok_or(StarError::NotIncident { center: self.center, edge: e })?;
            mask[i] = true;
        }
        Ok(mask)
    }

    pub fn star_of(&self, mask: &[bool]) -> Star {
        Star::new(self.center, self.slots.iter().zip(mask).filter(|(_, &m)| m).map(|(s, _)| s.edge).collect())
    }

    fn cost_of(&self, i: usize) -> u64 {
        if self.variant == Variant::Weighted {
            self.slots[i].cost
        } else {
            1
        }
    }

    /// Exact density of the slot set.
    pub fn density(&self, mask: &[bool]) -> Ratio {
        let num = self.pairs.iter().filter(|p| mask[p.a] && mask[p.b]).count() as u64;
        let den = (0..self.slots.len()).filter(|&i| mask[i]).map(|i| self.cost_of(i)).sum();
        Ratio::new(num, den)
    }

    /// Edges 2-spanned by the slot set, sorted.
    pub fn spanned(&self, mask: &[bool]) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.pairs.iter().filter(|p| mask[p.a] && mask[p.b]).map(|p| p.edge).collect();
        out.sort_unstable();
        out
    }

    pub fn value(&self, mask: &[bool]) -> Result<DensityValue, StarError> {
        if !mask.iter().any(|&m| m) {
            return Err(StarError::EmptyStar);
        }
        let spanned = self.spanned(mask);
        let den = (0..self.slots.len()).filter(|&i| mask[i]).map(|i| self.cost_of(i)).sum();
        let rho = Ratio::new(spanned.len() as u64, den);
        Ok(DensityValue { num: spanned.len() as u64, den, rho, rho_tilde: rho.rounded(), spanned })
    }

    /// Densest star within `pool`: exact for the undirected variants, the
    /// 2-approximation through the undirected collapse for directed mode.
    pub fn densest(&self, pool: &[bool]) -> Option<Vec<bool>> {
        if self.variant == Variant::Directed {
            return self.directed_estimate(pool);
        }
        let costs: Vec<u64> = (0..self.slots.len()).map(|i| self.cost_of(i)).collect();
        let pairs: Vec<(usize, usize)> = self.pairs.iter().map(|p| (p.a, p.b)).collect();
        let best = densest_subgraph(&costs, &pairs, pool)?;
        let mut mask = vec![false; self.slots.len()];
        best.nodes.iter().for_each(|&i| mask[i] = true);
        Some(mask)
    }

    /// Collapses pool slots to leaves (unit cost each), joins two leaves if
    /// some arc between them is spannable inside the pool, solves the
    /// undirected problem and materializes every pool slot of the chosen
    /// leaves.
    fn directed_estimate(&self, pool: &[bool]) -> Option<Vec<bool>> {
        let mut leaves: Vec<VertexId> = (0..self.slots.len()).filter(|&i| pool[i]).map(|i| self.slots[i].leaf).collect();
        leaves.dedup();
        if leaves.is_empty() {
            return None;
        }
        let index = |leaf: VertexId| leaves.binary_search(&leaf).expect("pool leaf");
        let mut lpairs: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .filter(|p| pool[p.a] && pool[p.b])
            .map(|p| {
                let (x, y) = (index(self.slots[p.a].leaf), index(self.slots[p.b].leaf));
                (x.min(y), x.max(y))
            })
            .collect();
        lpairs.sort_unstable();
        lpairs.dedup();
        let best = densest_subgraph(&vec![1; leaves.len()], &lpairs, &vec![true; leaves.len()])?;
        let chosen: Vec<VertexId> = best.nodes.iter().map(|&i| leaves[i]).collect();
        Some(
            (0..self.slots.len())
                .map(|i| pool[i] && chosen.binary_search(&self.slots[i].leaf).is_ok())
                .collect(),
        )
    }

    /// Undirected density of the collapsed problem for a leaf set. Used by
    /// the directed sandwich checks.
    pub fn collapsed_density(&self, leaves: &[VertexId]) -> Ratio {
        let mut lp: Vec<(VertexId, VertexId)> = self
            .pairs
            .iter()
            .map(|p| (self.slots[p.a].leaf, self.slots[p.b].leaf))
            .filter(|(x, y)| leaves.binary_search(x).is_ok() && leaves.binary_search(y).is_ok())
            .map(|(x, y)| (x.min(y), x.max(y)))
            .collect();
        lp.sort_unstable();
        lp.dedup();
        Ratio::new(lp.len() as u64, leaves.len() as u64)
    }

    /// The star choice procedure. `prev` is the previous iteration's star
    /// when the rounded density is unchanged since then.
    pub fn choose(&self, prev: Option<&[bool]>, rho_now: Rounded) -> Result<Vec<bool>, StarError> {
        let shift = self.variant.threshold_shift();
        let meets = |mask: &[bool]| self.density(mask).at_least(rho_now, shift);
        let (pool, start) = match prev {
            Some(prev) => {
                if prev.iter().any(|&m| m) && meets(prev) {
                    return Ok(prev.to_vec());
                }
                let start = self.densest(prev).ok_or(StarError::FallbackReached(self.center))?;
                if !meets(&start) {
                    return Err(StarError::FallbackReached(self.center));
                }
                (prev.to_vec(), start)
            }
            None => {
                let pool = self.full_mask();
                let start = self.densest(&pool).ok_or(StarError::Isolated(self.center))?;
                (pool, start)
            }
        };
        let chosen = self.grow(&pool, start, rho_now);
        if !meets(&chosen) {
            return Err(StarError::BelowThreshold(self.center));
        }
        Ok(chosen)
    }

    /// Adds single slots (largest gain, then smallest leaf) or disjoint
    /// dense stars while the density stays at or above the threshold.
    fn grow(&self, pool: &[bool], mut set: Vec<bool>, rho_now: Rounded) -> Vec<bool> {
        let shift = self.variant.threshold_shift();
        let k = self.slots.len();
        let mut gain = vec![0u64; k];
        let mut num = 0u64;
        let mut den = 0u64;
        let add = |i: usize, set: &mut Vec<bool>, gain: &mut Vec<u64>, num: &mut u64, den: &mut u64| {
            *num += gain[i];
            *den += self.cost_of(i);
            set[i] = true;
            for &(j, _) in &self.incidence[i] {
                gain[j] += 1;
            }
        };
        let start: Vec<usize> = (0..k).filter(|&i| set[i]).collect();
        set.iter_mut().for_each(|m| *m = false);
        for i in start {
            add(i, &mut set, &mut gain, &mut num, &mut den);
        }
        loop {
            let mut best: Option<usize> = None;
            for i in 0..k {
                if !pool[i] || set[i] {
                    continue;
                }
                if !Ratio::new(num + gain[i], den + self.cost_of(i)).at_least(rho_now, shift) {
                    continue;
                }
                // Slots are ordered by leaf, so the first maximum has the
                // smallest leaf.
                if best.is_none_or(|b| gain[i] > gain[b]) {
                    best = Some(i);
                }
            }
            if let Some(i) = best {
                add(i, &mut set, &mut gain, &mut num, &mut den);
                continue;
            }
            let rest: Vec<bool> = (0..k).map(|i| pool[i] && !set[i]).collect();
            if !rest.iter().any(|&r| r) {
                break;
            }
            match self.densest(&rest) {
                Some(other) if self.density(&other).at_least(rho_now, shift) => {
                    for (i, _) in other.iter().enumerate().take(k).filter(|(_, &on)| on) {
                        add(i, &mut set, &mut gain, &mut num, &mut den);
                    }
                }
                _ => break,
            }
        }
        set
    }
}

/// Density of `star` with respect to `uncovered`.
pub fn density_of(g: &Graph, star: &Star, uncovered: &EdgeSubset, variant: Variant) -> Result<DensityValue, StarError> {
    if star.edges.is_empty() {
        return Err(StarError::EmptyStar);
    }
    let p = StarProblem::from_graph(g, star.center, uncovered, variant)?;
    let mask = p.mask_of(&star.edges)?;
    p.value(&mask)
}

/// Densest star at `v`, optionally restricted to the edges of `pool`.
pub fn densest_star(
    g: &Graph,
    v: VertexId,
    uncovered: &EdgeSubset,
    pool: Option<&[EdgeId]>,
    variant: Variant,
) -> Result<(Star, DensityValue), StarError> {
    let p = StarProblem::from_graph(g, v, uncovered, variant)?;
    let pool_mask = match pool {
        Some(edges) => p.mask_of(edges)?,
        None => p.full_mask(),
    };
    let mask = p.densest(&pool_mask).ok_or(StarError::Isolated(v))?;
    Ok((p.star_of(&mask), p.value(&mask)?))
}

/// The star choice procedure on a whole graph. `prev` carries the previous
/// star and its rounded density; it is only used when that rounded density
/// equals `rho_now`.
pub fn choose_star(
    g: &Graph,
    v: VertexId,
    uncovered: &EdgeSubset,
    prev: Option<(&Star, Rounded)>,
    rho_now: Rounded,
    variant: Variant,
) -> Result<Star, StarError> {
    let p = StarProblem::from_graph(g, v, uncovered, variant)?;
    let prev_mask = match prev {
        Some((star, r)) if r == rho_now => Some(p.mask_of(&star.edges)?),
        _ => None,
    };
    let mask = p.choose(prev_mask.as_deref(), rho_now)?;
    Ok(p.star_of(&mask))
}

/// Directed 2-approximate densest star and its true directed density.
pub fn directed_density_estimate(g: &Graph, v: VertexId, uncovered: &EdgeSubset) -> Result<(Star, Ratio), StarError> {
    let p = StarProblem::from_graph(g, v, uncovered, Variant::Directed)?;
    let mask = p.densest(&p.full_mask()).ok_or(StarError::Isolated(v))?;
    Ok((p.star_of(&mask), p.density(&mask)))
}

/// `ρ(v, H)` as the algorithm sees it: exact for undirected variants, the
/// directed estimate otherwise. Zero for vertices without eligible edges.
pub fn vertex_density(g: &Graph, v: VertexId, uncovered: &EdgeSubset, variant: Variant) -> Result<Ratio, StarError> {
    let p = StarProblem::from_graph(g, v, uncovered, variant)?;
    Ok(p.densest(&p.full_mask()).map(|m| p.density(&m)).unwrap_or(Ratio::ZERO))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::oracle::densest_star_brute;
    use proptest::prelude::*;

    fn undirected(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, false, edges).unwrap()
    }

    fn k4() -> Graph {
        undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    fn star_at(g: &Graph, v: VertexId, leaves: &[VertexId]) -> Star {
        Star::new(v, leaves.iter().map(|&x| g.edge_between(v, x).unwrap()).collect())
    }

    #[test]
    fn two_leaf_star_density() {
        // v = 0, a = 1, b = 2.
        let g = undirected(3, &[(0, 1), (0, 2), (1, 2)]);
        let d = density_of(&g, &star_at(&g, 0, &[1, 2]), &g.full_subset(), Variant::Unweighted).unwrap();
        assert_eq!(d.rho, Ratio::new(1, 2));
        assert_eq!(d.rho_tilde, Rounded::Pow(0));
        assert_eq!(d.spanned, vec![g.edge_between(1, 2).unwrap()]);
    }

    #[test]
    fn weighted_star_density() {
        let g = Graph::from_weighted_edges(3, false, &[(0, 1, 1), (0, 2, 3), (1, 2, 1)]).unwrap();
        let d = density_of(&g, &star_at(&g, 0, &[1, 2]), &g.full_subset(), Variant::Weighted).unwrap();
        assert_eq!(d.rho, Ratio::new(1, 4));
        assert_eq!(d.rho_tilde, Rounded::Pow(-1));
    }

    #[test]
    fn empty_and_foreign_stars_are_rejected() {
        let g = k4();
        let empty = Star::new(0, vec![]);
        assert_eq!(density_of(&g, &empty, &g.full_subset(), Variant::Unweighted), Err(StarError::EmptyStar));
        let foreign = Star::new(0, vec![g.edge_between(1, 2).unwrap()]);
        assert!(matches!(
            density_of(&g, &foreign, &g.full_subset(), Variant::Unweighted),
            Err(StarError::NotIncident { .. })
        ));
        assert_eq!(density_of(&g, &empty, &g.full_subset(), Variant::Directed), Err(StarError::EmptyStar));
        let dense = star_at(&g, 0, &[1]);
        assert_eq!(
            density_of(&g, &dense, &g.full_subset(), Variant::Directed),
            Err(StarError::VariantMismatch(Variant::Directed))
        );
    }

    #[test]
    fn k4_full_star_is_densest() {
        let g = k4();
        let (s, d) = densest_star(&g, 0, &g.full_subset(), None, Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1, 2, 3]));
        assert_eq!(d.rho, Ratio::new(1, 1));
    }

    #[test]
    fn triangle_among_four_leaves() {
        let g = undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (2, 3)]);
        let (s, d) = densest_star(&g, 0, &g.full_subset(), None, Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1, 2, 3]));
        assert_eq!(d.rho, Ratio::new(1, 1));
    }

    #[test]
    fn no_spannable_edges_gives_lowest_leaf() {
        let g = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        let (s, d) = densest_star(&g, 0, &g.full_subset(), None, Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1]));
        assert!(d.rho.is_zero());
    }

    #[test]
    fn pool_restricts_the_search() {
        let g = k4();
        let pool = [g.edge_between(0, 2).unwrap(), g.edge_between(0, 3).unwrap()];
        let (s, d) = densest_star(&g, 0, &g.full_subset(), Some(&pool), Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[2, 3]));
        assert_eq!(d.rho, Ratio::new(1, 2));
    }

    #[test]
    fn choose_fresh_takes_full_k4_star() {
        let g = k4();
        let s = choose_star(&g, 0, &g.full_subset(), None, Rounded::Pow(1), Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1, 2, 3]));
    }

    #[test]
    fn choose_keeps_previous_star_while_dense_enough() {
        let g = k4();
        let prev = star_at(&g, 0, &[1, 2, 3]);
        let mut h = g.full_subset();
        h.remove(g.edge_between(1, 2).unwrap());
        // Density 2/3 against threshold 2/4.
        let s = choose_star(&g, 0, &h, Some((&prev, Rounded::Pow(1))), Rounded::Pow(1), Variant::Unweighted).unwrap();
        assert_eq!(s, prev);
    }

    #[test]
    fn choose_rebuilds_inside_previous_star() {
        let g = k4();
        let prev = star_at(&g, 0, &[1, 2, 3]);
        let h = EdgeSubset::from_ids(g.m(), [g.edge_between(1, 2).unwrap()]);
        let s = choose_star(&g, 0, &h, Some((&prev, Rounded::Pow(1))), Rounded::Pow(1), Variant::Unweighted).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1, 2]));
        assert!(s.is_subset_of(&prev));
    }

    #[test]
    fn choose_reports_fallback() {
        let g = k4();
        let prev = star_at(&g, 0, &[1, 2]);
        let h = EdgeSubset::from_ids(g.m(), [g.edge_between(2, 3).unwrap()]);
        let err = choose_star(&g, 0, &h, Some((&prev, Rounded::Pow(1))), Rounded::Pow(1), Variant::Unweighted);
        assert_eq!(err, Err(StarError::FallbackReached(0)));
    }

    #[test]
    fn changed_rounded_density_ignores_previous_star() {
        let g = k4();
        let prev = star_at(&g, 0, &[1, 2]);
        let h = EdgeSubset::from_ids(g.m(), [g.edge_between(2, 3).unwrap()]);
        let s = choose_star(&g, 0, &h, Some((&prev, Rounded::Pow(1))), Rounded::Pow(0), Variant::Unweighted).unwrap();
        // Starts from {2, 3} at 1/2 and grows by leaf 1 since 1/3 >= 1/4.
        assert_eq!(s, star_at(&g, 0, &[1, 2, 3]));
    }

    #[test]
    fn directed_triangle_estimate() {
        let arcs = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];
        let g = Graph::from_edges(3, true, &arcs).unwrap();
        let p = StarProblem::from_graph(&g, 0, &g.full_subset(), Variant::Directed).unwrap();
        let (star, rho) = directed_density_estimate(&g, 0, &g.full_subset()).unwrap();
        let (_, exact) = densest_star_brute(&p);
        let rho_u = p.collapsed_density(&[1, 2]);
        assert_eq!(rho_u, Ratio::new(1, 2));
        assert_eq!(exact, Ratio::new(1, 2));
        assert_eq!(star.size(), 4);
        assert_eq!(rho, Ratio::new(1, 2));
    }

    #[test]
    fn client_server_counts_client_edges_and_server_slots() {
        let mut b = GraphBuilder::new(4).client_server(true);
        b.full_edge(0, 1, 1, false, true).unwrap();
        b.full_edge(0, 2, 1, false, true).unwrap();
        b.full_edge(0, 3, 1, true, false).unwrap();
        b.full_edge(1, 2, 1, true, false).unwrap();
        b.full_edge(1, 3, 1, true, true).unwrap();
        let g = b.build().unwrap();
        let p = StarProblem::from_graph(&g, 0, &g.full_subset(), Variant::ClientServer).unwrap();
        assert_eq!(p.slots().len(), 2);
        assert_eq!(p.pairs().len(), 1);
        let (s, d) = densest_star(&g, 0, &g.full_subset(), None, Variant::ClientServer).unwrap();
        assert_eq!(s, star_at(&g, 0, &[1, 2]));
        assert_eq!(d.rho, Ratio::new(1, 2));
    }

    /// A center 0 with `d` leaves, random leaf-leaf edges and a random
    /// uncovered set.
    fn neighborhood(d: usize, bits: &[bool], weights: Option<&[u64]>, drop: &[bool]) -> (Graph, EdgeSubset) {
        let mut b = GraphBuilder::new(d + 1).weighted(weights.is_some());
        for x in 1..=d {
            b.weighted_edge(0, x, weights.map_or(1, |w| w[x - 1])).unwrap();
        }
        let mut idx = 0;
        for x in 1..=d {
            for y in x + 1..=d {
                if bits[idx % bits.len()] {
                    b.weighted_edge(x, y, 1).unwrap();
                }
                idx += 1;
            }
        }
        let g = b.build().unwrap();
        let h = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| !drop[e % drop.len()]));
        (g, h)
    }

    fn directed_neighborhood(d: usize, bits: &[u8], spokes: &[u8]) -> Graph {
        let mut arcs = Vec::new();
        for x in 1..=d {
            let s = spokes[x % spokes.len()] % 3;
            if s != 1 {
                arcs.push((0, x));
            }
            if s != 0 {
                arcs.push((x, 0));
            }
        }
        let mut idx = 0;
        for x in 1..=d {
            for y in x + 1..=d {
                let c = bits[idx % bits.len()] % 4;
                if c & 1 == 1 {
                    arcs.push((x, y));
                }
                if c & 2 == 2 {
                    arcs.push((y, x));
                }
                idx += 1;
            }
        }
        Graph::from_edges(d + 1, true, &arcs).unwrap()
    }

    fn leaf_subsets_best(p: &StarProblem) -> Ratio {
        let mut leaves: Vec<VertexId> = p.slots().iter().map(|s| s.leaf).collect();
        leaves.dedup();
        let mut best = Ratio::ZERO;
        for m in 1u32..(1 << leaves.len()) {
            let set: Vec<VertexId> = (0..leaves.len()).filter(|&i| m >> i & 1 == 1).map(|i| leaves[i]).collect();
            best = best.max(p.collapsed_density(&set));
        }
        best
    }

    proptest! {
        #[test]
        fn densest_star_is_exact(
            d in 1usize..12,
            bits in proptest::collection::vec(any::<bool>(), 66),
            drop in proptest::collection::vec(prop::bool::weighted(0.2), 80),
            raw_w in proptest::collection::vec(0u64..6, 12),
            weighted in any::<bool>(),
        ) {
            let w = weighted.then_some(&raw_w[..d]);
            let (g, h) = neighborhood(d, &bits, w, &drop);
            let variant = if weighted { Variant::Weighted } else { Variant::Unweighted };
            let p = StarProblem::from_graph(&g, 0, &h, variant).unwrap();
            let (brute_mask, brute_rho) = densest_star_brute(&p);
            let mask = p.densest(&p.full_mask()).unwrap();
            prop_assert_eq!(p.density(&mask), brute_rho);
            prop_assert_eq!(mask, brute_mask);
        }

        #[test]
        fn choice_meets_threshold_and_stays_inside_previous(
            d in 1usize..10,
            bits in proptest::collection::vec(any::<bool>(), 45),
            drop in proptest::collection::vec(prop::bool::weighted(0.3), 60),
            raw_w in proptest::collection::vec(0u64..4, 10),
            weighted in any::<bool>(),
        ) {
            let w = weighted.then_some(&raw_w[..d]);
            let (g, full) = neighborhood(d, &bits, w, &[false]);
            let variant = if weighted { Variant::Weighted } else { Variant::Unweighted };
            let p = StarProblem::from_graph(&g, 0, &full, variant).unwrap();
            let rho_now = p.density(&p.densest(&p.full_mask()).unwrap()).rounded();
            let s = p.choose(None, rho_now).unwrap();
            prop_assert!(p.density(&s).at_least(rho_now, -2));
            if weighted {
                for (i, slot) in p.slots().iter().enumerate() {
                    if slot.cost == 0 {
                        prop_assert!(s[i], "zero-cost slot left out");
                    }
                }
            }
            // Cover a random part of what was uncovered and choose again at
            // the same rounded density.
            let h = EdgeSubset::from_ids(g.m(), (0..g.m()).filter(|&e| !drop[e % drop.len()]));
            let q = StarProblem::from_graph(&g, 0, &h, variant).unwrap();
            match q.choose(Some(&s), rho_now) {
                Ok(t) => {
                    prop_assert!((0..t.len()).all(|i| !t[i] || s[i]));
                    prop_assert!(q.density(&t).at_least(rho_now, -2));
                }
                Err(e) => prop_assert_eq!(e, StarError::FallbackReached(0)),
            }
        }

        #[test]
        fn directed_density_sandwich(
            d in 1usize..7,
            bits in proptest::collection::vec(any::<u8>(), 21),
            spokes in proptest::collection::vec(any::<u8>(), 7),
        ) {
            let g = directed_neighborhood(d, &bits, &spokes);
            let p = StarProblem::from_graph(&g, 0, &g.full_subset(), Variant::Directed).unwrap();
            let (_, rho_d) = densest_star_brute(&p);
            let rho_u = leaf_subsets_best(&p);
            let est = p.density(&p.densest(&p.full_mask()).unwrap());
            prop_assert!(Ratio::new(rho_u.num, 2 * rho_u.den) <= est || rho_u.is_zero());
            prop_assert!(est <= rho_d);
            prop_assert!(rho_d <= rho_u);
        }
    }
}
