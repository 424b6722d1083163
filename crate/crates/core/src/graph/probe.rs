use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Edge, GraphParams, LabeledGraph, Port, VertexId};
use crate::error::{Error, Result};

/// Anything that can answer probes: the full graph, or a ball collected by the
/// distributed simulation.
pub trait Topology: Sync {
    fn params(&self) -> GraphParams;

    /// The `port`-th (1-based) neighbor of `v`, or `None` past the degree.
    fn lookup(&self, v: VertexId, port: usize) -> Result<Option<Port>>;

    /// Hop distances from the anchor to every reachable vertex. Used only for
    /// radius accounting; algorithms never see it.
    fn distances(&self, anchor: &Anchor) -> HashMap<VertexId, u32>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    Vertex(VertexId),
    /// Distance to an edge query is the smaller of the distances to its
    /// endpoints.
    Edge(Edge),
}

impl Anchor {
    pub fn sources(&self) -> Vec<VertexId> {
        match *self {
            Anchor::Vertex(v) => vec![v],
            Anchor::Edge(e) => vec![e.0, e.1],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub probes: u64,
    pub radius: u32,
}

/// Probe accounting for a single query.
///
/// Sessions are created per query and dropped afterwards, so nothing carries
/// over between queries.
pub struct ProbeSession<'a> {
    topo: &'a dyn Topology,
    params: GraphParams,
    anchor: Anchor,
    dist: Option<HashMap<VertexId, u32>>,
    stats: ProbeStats,
    budget: Option<u32>,
}

impl<'a> ProbeSession<'a> {
    pub fn new(topo: &'a dyn Topology, anchor: Anchor) -> Self {
        ProbeSession {
            topo,
            params: topo.params(),
            anchor,
            dist: None,
            stats: ProbeStats::default(),
            budget: None,
        }
    }

    pub fn with_budget(mut self, radius_budget: u32) -> Self {
        self.budget = Some(radius_budget);
        self
    }

    pub fn params(&self) -> GraphParams {
        self.params
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    pub fn stats(&self) -> ProbeStats {
        self.stats
    }

    /// Who is the `port`-th neighbor of `v`?
    pub fn probe(&mut self, v: VertexId, port: usize) -> Result<Option<Port>> {
        let answer = self.topo.lookup(v, port)?;
        let dist = self.distance_to(v)?;
        if let Some(budget) = self.budget {
            if dist > budget {
                return Err(Error::BudgetViolation {
                    vertex: v,
                    distance: dist,
                    budget,
                });
            }
        }
        self.stats.probes += 1;
        self.stats.radius = self.stats.radius.max(dist);
        Ok(answer)
    }

    /// Probes ports `1..=Δ` of `v` until the first null answer.
    pub fn neighbors(&mut self, v: VertexId) -> Result<Vec<Port>> {
        let mut out = Vec::new();
        for port in 1..=self.params.max_degree {
            match self.probe(v, port)? {
                Some(p) => out.push(p),
                None => break,
            }
        }
        Ok(out)
    }

    fn distance_to(&mut self, v: VertexId) -> Result<u32> {
        let topo = self.topo;
        let anchor = self.anchor;
        let dist = self.dist.get_or_insert_with(|| topo.distances(&anchor));
        dist.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }
}

pub(crate) fn bfs_distances<F>(sources: &[VertexId], mut neighbors: F) -> HashMap<VertexId, u32>
where
    F: FnMut(VertexId) -> Vec<VertexId>,
{
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for u in neighbors(v) {
            dist.entry(u).or_insert_with(|| {
                queue.push_back(u);
                d + 1
            });
        }
    }
    dist
}

impl Topology for LabeledGraph {
    fn params(&self) -> GraphParams {
        LabeledGraph::params(self)
    }

    fn lookup(&self, v: VertexId, port: usize) -> Result<Option<Port>> {
        let ports = self.ports(v)?;
        Ok(port.checked_sub(1).and_then(|i| ports.get(i)).copied())
    }

    fn distances(&self, anchor: &Anchor) -> HashMap<VertexId, u32> {
        bfs_distances(&anchor.sources(), |v| {
            self.ports(v)
                .map(|ps| ps.iter().map(|p| p.neighbor).collect())
                .unwrap_or_default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ring;

    fn single_edge() -> LabeledGraph {
        LabeledGraph::from_edges(vec![1, 2], vec![(1, 2, None)], false).unwrap()
    }

    #[test]
    fn probe_single_edge() {
        let g = single_edge();
        let mut s = ProbeSession::new(&g, Anchor::Vertex(1));
        let p = s.probe(1, 1).unwrap().unwrap();
        assert_eq!((p.neighbor, p.reverse_port), (2, 1));
        assert_eq!(s.probe(1, 2).unwrap(), None);
        assert_eq!(s.stats().probes, 2);
        assert_eq!(s.stats().radius, 0);
    }

    #[test]
    fn probe_ring_second_neighbor() {
        // Ring edges are generated as (1,2),(2,3),...,(6,1): vertex 3 sees 2 on
        // port 1 and 4 on port 2; 3 is the first neighbor of 4.
        let g = ring(6).unwrap();
        let mut s = ProbeSession::new(&g, Anchor::Vertex(3));
        let p = s.probe(3, 2).unwrap().unwrap();
        assert_eq!((p.neighbor, p.reverse_port), (4, 1));
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let g = single_edge();
        let mut s = ProbeSession::new(&g, Anchor::Vertex(1));
        assert_eq!(s.probe(9, 1), Err(Error::UnknownVertex(9)));
    }

    #[test]
    fn budget_violation() {
        let g = ring(6).unwrap();
        let mut s = ProbeSession::new(&g, Anchor::Vertex(1)).with_budget(1);
        assert!(s.probe(2, 1).is_ok());
        assert!(matches!(
            s.probe(3, 1),
            Err(Error::BudgetViolation { distance: 2, .. })
        ));
    }

    #[test]
    fn edge_anchor_uses_nearer_endpoint() {
        let g = ring(6).unwrap();
        let mut s = ProbeSession::new(&g, Anchor::Edge(Edge::new(1, 2)));
        s.probe(3, 1).unwrap();
        assert_eq!(s.stats().radius, 1);
        s.probe(4, 1).unwrap();
        assert_eq!(s.stats().radius, 2);
    }

    #[test]
    fn port_symmetry() {
        let g = ring(7).unwrap();
        let mut s = ProbeSession::new(&g, Anchor::Vertex(1));
        for &v in g.vertices() {
            for i in 1..=2 {
                let p = s.probe(v, i).unwrap().unwrap();
                let back = s.probe(p.neighbor, p.reverse_port).unwrap().unwrap();
                assert_eq!((back.neighbor, back.reverse_port), (v, i));
            }
        }
    }
}
