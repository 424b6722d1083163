//! Stateless maximal independent set over any oriented view.
//!
//! A node is in the MIS iff none of its out-neighbors is. Since out-edges
//! strictly decrease `(color, id)`, this is the greedy MIS along every linear
//! extension of the orientation, and a query only explores directed paths
//! starting at the queried node.

use rustc_hash::{FxHashMap, FxHashSet};
use std::hash::Hash;
use std::rc::Rc;

use crate::coloring::{points_to, ColorSchedule, ColorView, Colorer, GraphView};
use crate::error::{Error, Result};
use crate::graph::{ProbeSession, VertexId};

pub trait OrientedView {
    type Node: Copy + Eq + Hash + Ord + std::fmt::Debug;

    fn node_id(&self, node: Self::Node) -> u128;

    /// Neighbors sorted by node id.
    fn neighbors(&mut self, node: Self::Node) -> Result<Rc<[Self::Node]>>;

    /// Whether the edge `{a, b}` is directed from `a` to `b`.
    fn points_to(&mut self, a: Self::Node, b: Self::Node) -> Result<bool>;
}

/// Orients a [`ColorView`] by the colors of an on-demand [`Colorer`].
pub struct ColorOriented<V: ColorView> {
    pub view: V,
    pub colorer: Colorer<V::Node>,
}

impl<V: ColorView> ColorOriented<V> {
    pub fn new(view: V, colorer: Colorer<V::Node>) -> Self {
        ColorOriented { view, colorer }
    }

    pub fn into_parts(self) -> (V, Colorer<V::Node>) {
        (self.view, self.colorer)
    }
}

impl<V: ColorView> OrientedView for ColorOriented<V> {
    type Node = V::Node;

    fn node_id(&self, node: V::Node) -> u128 {
        self.view.node_id(node)
    }

    fn neighbors(&mut self, node: V::Node) -> Result<Rc<[V::Node]>> {
        self.view.neighbors(node)
    }

    fn points_to(&mut self, a: V::Node, b: V::Node) -> Result<bool> {
        let ca = self.colorer.color(&mut self.view, a)?;
        let cb = self.colorer.color(&mut self.view, b)?;
        Ok(points_to(ca, self.view.node_id(a), cb, self.view.node_id(b)))
    }
}

/// Query-private memo of decided nodes plus the current DFS stack.
#[derive(Debug)]
pub struct MisMemo<N> {
    decided: FxHashMap<N, bool>,
    active: FxHashSet<N>,
}

impl<N> Default for MisMemo<N> {
    fn default() -> Self {
        MisMemo {
            decided: FxHashMap::default(),
            active: FxHashSet::default(),
        }
    }
}

impl<N: Copy + Eq + Hash> MisMemo<N> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, node: N) -> Option<bool> {
        self.decided.get(&node).copied()
    }
}

/// Directed DFS from `v`; out-neighbors are explored in ascending id order.
pub fn in_mis<V: OrientedView>(view: &mut V, memo: &mut MisMemo<V::Node>, v: V::Node) -> Result<bool> {
    if let Some(answer) = memo.get(v) {
        return Ok(answer);
    }
    if !memo.active.insert(v) {
        return Err(Error::CorruptedOrientation(view.node_id(v)));
    }
    let neighbors = view.neighbors(v)?;
    let mut answer = true;
    for &u in neighbors.iter() {
        if view.points_to(v, u)? && in_mis(view, memo, u)? {
            answer = false;
            break;
        }
    }
    memo.active.remove(&v);
    memo.decided.insert(v, answer);
    Ok(answer)
}

/// Probe radius of the MIS oracle when the orientation of a node depends on
/// its radius-`orientation_radius` ball and directed paths have length at
/// most `orientation_depth`.
pub fn mis_probe_radius_bound(orientation_radius: u64, orientation_depth: u64) -> u64 {
    orientation_radius + orientation_depth
}

/// MIS membership of `v` in the input graph, oriented by its own coloring.
pub fn mis_vertex(session: &mut ProbeSession<'_>, v: VertexId) -> Result<bool> {
    let schedule = Rc::new(crate::coloring::graph_schedule(session)?);
    let mut view = ColorOriented::new(GraphView::new(session), Colorer::new(schedule));
    in_mis(&mut view, &mut MisMemo::new(), v)
}

/// Radius bound for [`mis_vertex`] under `schedule`.
pub fn graph_mis_radius_bound(schedule: &ColorSchedule) -> u64 {
    let depth = u64::try_from(schedule.palette().saturating_sub(1)).unwrap_or(u64::MAX);
    mis_probe_radius_bound(u64::from(schedule.rounds()), depth)
}

/// Greedy MIS over an explicit graph, processing nodes by ascending key.
/// `adjacency[i]` lists the indices adjacent to node `i`.
pub fn greedy_mis<K: Ord>(keys: &[K], adjacency: &[Vec<usize>]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut chosen = vec![false; keys.len()];
    for v in order {
        if adjacency[v].iter().all(|&u| !chosen[u]) {
            chosen[v] = true;
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use crate::coloring::color_vertex;
    use crate::corpus::ring;
    use crate::graph::{Anchor, LabeledGraph};

    /// Fixed orientation given by a key per node.
    struct Keyed {
        adj: HashMap<u32, Rc<[u32]>>,
        key: HashMap<u32, u32>,
    }

    impl Keyed {
        fn new(edges: &[(u32, u32)], key: &[(u32, u32)]) -> Self {
            let mut adj: HashMap<u32, Vec<u32>> = key.iter().map(|&(v, _)| (v, Vec::new())).collect();
            for &(a, b) in edges {
                adj.get_mut(&a).unwrap().push(b);
                adj.get_mut(&b).unwrap().push(a);
            }
            Keyed {
                adj: adj
                    .into_iter()
                    .map(|(v, mut n)| {
                        n.sort();
                        (v, n.into())
                    })
                    .collect(),
                key: key.iter().copied().collect(),
            }
        }
    }

    impl OrientedView for Keyed {
        type Node = u32;
        fn node_id(&self, node: u32) -> u128 {
            node.into()
        }
        fn neighbors(&mut self, node: u32) -> Result<Rc<[u32]>> {
            Ok(self.adj[&node].clone())
        }
        fn points_to(&mut self, a: u32, b: u32) -> Result<bool> {
            Ok(self.key[&a] > self.key[&b])
        }
    }

    #[test]
    fn isolated_node_is_in() {
        let mut view = Keyed::new(&[], &[(1, 0)]);
        assert!(in_mis(&mut view, &mut MisMemo::new(), 1).unwrap());
    }

    #[test]
    fn sink_of_a_single_edge_is_in() {
        let mut view = Keyed::new(&[(1, 2)], &[(1, 5), (2, 2)]);
        assert!(in_mis(&mut view, &mut MisMemo::new(), 2).unwrap());
        assert!(!in_mis(&mut view, &mut MisMemo::new(), 1).unwrap());
    }

    #[test]
    fn cyclic_orientation_is_detected() {
        struct Cyclic;
        impl OrientedView for Cyclic {
            type Node = u32;
            fn node_id(&self, node: u32) -> u128 {
                node.into()
            }
            fn neighbors(&mut self, node: u32) -> Result<Rc<[u32]>> {
                Ok(vec![(node + 1) % 3, (node + 2) % 3].into())
            }
            fn points_to(&mut self, a: u32, b: u32) -> Result<bool> {
                Ok(b == (a + 1) % 3)
            }
        }
        assert!(matches!(
            in_mis(&mut Cyclic, &mut MisMemo::new(), 0),
            Err(Error::CorruptedOrientation(_))
        ));
    }

    #[test]
    fn matches_greedy_on_small_keyed_graphs() {
        let edges = [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (4, 5)];
        let keys = [(1, 4), (2, 1), (3, 3), (4, 2), (5, 5)];
        let mut view = Keyed::new(&edges, &keys);
        let index = |v: u32| (v - 1) as usize;
        let mut adjacency = vec![Vec::new(); 5];
        for &(a, b) in &edges {
            adjacency[index(a)].push(index(b));
            adjacency[index(b)].push(index(a));
        }
        let order: Vec<(u32, u32)> = keys.iter().map(|&(v, k)| (k, v)).collect();
        let greedy = greedy_mis(&order, &adjacency);
        for v in 1..=5 {
            assert_eq!(in_mis(&mut view, &mut MisMemo::new(), v).unwrap(), greedy[index(v)]);
        }
    }

    #[test]
    fn ring_mis_is_maximal_and_independent() {
        let g = ring(64).unwrap();
        let schedule = crate::coloring::ColorSchedule::new(2, 64 * 64).unwrap();
        let bound = graph_mis_radius_bound(&schedule);
        let answers: HashMap<VertexId, bool> = g
            .vertices()
            .iter()
            .map(|&v| {
                let mut s = ProbeSession::new(&g, Anchor::Vertex(v));
                let a = mis_vertex(&mut s, v).unwrap();
                assert!(u64::from(s.stats().radius) <= bound);
                (v, a)
            })
            .collect();
        for e in g.edges() {
            assert!(!(answers[&e.0] && answers[&e.1]));
        }
        for &v in g.vertices() {
            if !answers[&v] {
                assert!(g.neighbors(v).unwrap().any(|u| answers[&u]));
            }
        }
    }

    #[test]
    fn single_edge_mis_follows_colors() {
        let g = LabeledGraph::from_edges(vec![1, 2], vec![(1, 2, None)], false).unwrap();
        let c1 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(1)), 1).unwrap();
        let c2 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(2)), 2).unwrap();
        let sink = if c1 < c2 { 1 } else { 2 };
        assert!(mis_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(sink)), sink).unwrap());
        let source = 3 - sink;
        assert!(!mis_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(source)), source).unwrap());
    }

    #[test]
    fn radius_bound_examples() {
        assert_eq!(mis_probe_radius_bound(0, 0), 0);
        let c = crate::coloring::palette_size(2, 4096).unwrap() as u64;
        assert_eq!(mis_probe_radius_bound(3, c - 1), 3 + c - 1);
    }
}
