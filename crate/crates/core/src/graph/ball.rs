use std::collections::{BTreeMap, HashMap, VecDeque};

use super::probe::bfs_distances;
use super::{Anchor, Edge, GraphParams, Port, ProbeSession, Topology, VertexId};
use crate::error::{Error, Result};

/// The radius-`r` ball around a vertex, together with the full port table of
/// every vertex inside it.
///
/// Port tables of boundary vertices still list their neighbors outside the
/// ball, so every probe at a ball vertex can be answered; probes at vertices
/// outside the ball fail with [`Error::SimulationSoundness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    center: VertexId,
    radius: u32,
    params: GraphParams,
    tables: BTreeMap<VertexId, Vec<Port>>,
}

impl Ball {
    pub fn new(
        center: VertexId,
        radius: u32,
        params: GraphParams,
        tables: BTreeMap<VertexId, Vec<Port>>,
    ) -> Self {
        Ball {
            center,
            radius,
            params,
            tables,
        }
    }

    pub fn center(&self) -> VertexId {
        self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.tables.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.tables.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Edges with both endpoints in the ball, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .tables
            .iter()
            .flat_map(|(&v, ports)| {
                ports
                    .iter()
                    .filter(move |p| v < p.neighbor)
                    .map(move |p| Edge::new(v, p.neighbor))
            })
            .filter(|e| self.contains(e.0) && self.contains(e.1))
            .collect();
        out.sort();
        out
    }

    pub fn port_table(&self, v: VertexId) -> Option<&[Port]> {
        self.tables.get(&v).map(Vec::as_slice)
    }
}

impl Topology for Ball {
    fn params(&self) -> GraphParams {
        self.params
    }

    fn lookup(&self, v: VertexId, port: usize) -> Result<Option<Port>> {
        let ports = self.tables.get(&v).ok_or(Error::SimulationSoundness {
            vertex: v,
            center: self.center,
            radius: self.radius,
        })?;
        Ok(port.checked_sub(1).and_then(|i| ports.get(i)).copied())
    }

    fn distances(&self, anchor: &Anchor) -> HashMap<VertexId, u32> {
        // Shortest paths to ball vertices stay inside the ball.
        bfs_distances(&anchor.sources(), |v| {
            self.tables
                .get(&v)
                .map(|ps| {
                    ps.iter()
                        .map(|p| p.neighbor)
                        .filter(|u| self.contains(*u))
                        .collect()
                })
                .unwrap_or_default()
        })
    }
}

/// Collects `B_r(v)` by breadth-first probing. Every port of every ball vertex
/// is probed, so the probe radius of this call is exactly `r`.
pub fn collect_ball(session: &mut ProbeSession<'_>, v: VertexId, r: u32) -> Result<Ball> {
    let mut tables = BTreeMap::new();
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(v, 0u32);
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        let ports = session.neighbors(u)?;
        if d < r {
            for p in &ports {
                if !dist.contains_key(&p.neighbor) {
                    dist.insert(p.neighbor, d + 1);
                    queue.push_back(p.neighbor);
                }
            }
        }
        tables.insert(u, ports);
    }
    Ok(Ball::new(v, r, session.params(), tables))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{path, ring};
    use crate::graph::LabeledGraph;

    fn ball(g: &LabeledGraph, v: VertexId, r: u32) -> (Ball, u64) {
        let mut s = ProbeSession::new(g, Anchor::Vertex(v));
        let b = collect_ball(&mut s, v, r).unwrap();
        assert!(s.stats().radius <= r);
        (b, s.stats().probes)
    }

    #[test]
    fn radius_zero_is_the_center_alone() {
        let g = ring(6).unwrap();
        let (b, _) = ball(&g, 3, 0);
        assert_eq!(b.vertices().collect::<Vec<_>>(), vec![3]);
        assert!(b.edges().is_empty());
    }

    #[test]
    fn ring_ball_of_radius_two() {
        let g = ring(6).unwrap();
        let (b, probes) = ball(&g, 1, 2);
        assert_eq!(b.vertices().collect::<Vec<_>>(), vec![1, 2, 3, 5, 6]);
        assert_eq!(b.edges().len(), 4);
        assert!(probes <= 2 * 5);
    }

    #[test]
    fn path_ball_covers_everything() {
        let g = path(3).unwrap();
        let (b, _) = ball(&g, 2, 1);
        assert_eq!(b.len(), 3);
        assert_eq!(b.edges(), vec![Edge(1, 2), Edge(2, 3)]);
    }

    #[test]
    fn probing_outside_the_ball_fails() {
        let g = ring(8).unwrap();
        let (b, _) = ball(&g, 1, 1);
        let mut s = ProbeSession::new(&b, Anchor::Vertex(1));
        assert!(s.probe(2, 1).is_ok());
        assert!(matches!(
            s.probe(3, 1),
            Err(Error::SimulationSoundness { vertex: 3, .. })
        ));
    }
}
