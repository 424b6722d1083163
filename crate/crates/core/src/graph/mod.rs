//! Labeled port-numbered graphs and the probe interface used by every local
//! algorithm in this crate.
//!
//! A [`LabeledGraph`] is immutable once built. Ports are assigned in the order
//! edges are inserted: the `i`-th edge incident to `v` (1-based) occupies port
//! `i` of `v`. Algorithms never touch the graph directly; they go through a
//! [`ProbeSession`], which counts probes and tracks the probe radius.

mod ball;
mod io;
mod probe;

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ball::{collect_ball, Ball};
pub use io::{format_weight, parse_graph, parse_weight, serialize_graph};
pub use probe::{Anchor, ProbeSession, ProbeStats, Topology};

pub type VertexId = u64;

/// Exact edge weight in `(0, 1]`.
pub type Weight = Ratio<u64>;

/// Answer to a probe `(v, i)`: the `i`-th neighbor of `v` and the port under
/// which `v` appears at that neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Port {
    pub neighbor: VertexId,
    pub reverse_port: usize,
    pub weight: Option<Weight>,
}

/// Undirected edge in normalized form (smaller id first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }

    pub fn shares_vertex(&self, other: &Edge) -> bool {
        self.contains(other.0) || self.contains(other.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Global knowledge every vertex (and every local query) starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParams {
    pub n: usize,
    pub max_degree: usize,
    pub id_bound: u64,
}

/// Default bound on vertex ids: `n²` (at least 1).
pub fn default_id_bound(n: usize) -> u64 {
    (n as u64).saturating_mul(n as u64).max(1)
}

#[derive(Debug, Clone)]
pub struct LabeledGraph {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    ports: Vec<Vec<Port>>,
    edges: Vec<(Edge, Option<Weight>)>,
    edge_index: HashMap<Edge, usize>,
    weighted: bool,
    max_degree: usize,
    id_bound: u64,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.ports == other.ports
            && self.edges == other.edges
            && self.weighted == other.weighted
            && self.id_bound == other.id_bound
    }
}

impl Eq for LabeledGraph {}

impl LabeledGraph {
    /// Builds a graph from a vertex list and an ordered edge list. The edge
    /// order fixes the port numbering.
    pub fn from_edges(
        vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId, Option<Weight>)>,
        weighted: bool,
    ) -> Result<Self> {
        let id_bound = default_id_bound(vertices.len());
        Self::with_id_bound(vertices, edges, weighted, id_bound)
    }

    pub fn with_id_bound(
        vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId, Option<Weight>)>,
        weighted: bool,
        id_bound: u64,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            if v == 0 {
                return Err(Error::InvalidGraph("vertex ids must be positive".into()));
            }
            if v > id_bound {
                return Err(Error::InvalidGraph(format!(
                    "vertex id {v} exceeds the id bound {id_bound}"
                )));
            }
            if index.insert(v, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex {v}")));
            }
        }
        let mut ports: Vec<Vec<Port>> = vec![Vec::new(); vertices.len()];
        let mut edge_list = Vec::with_capacity(edges.len());
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (u, v, w) in edges {
            let (&iu, &iv) = match (index.get(&u), index.get(&v)) {
                (Some(a), Some(b)) => (a, b),
                (None, _) => return Err(Error::UnknownVertex(u)),
                (_, None) => return Err(Error::UnknownVertex(v)),
            };
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if weighted != w.is_some() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) weight presence does not match the graph"
                )));
            }
            if let Some(w) = w {
                check_weight(w).map_err(Error::InvalidGraph)?;
            }
            let e = Edge::new(u, v);
            if edge_index.insert(e, edge_list.len()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge {e}")));
            }
            let pu = ports[iu].len() + 1;
            let pv = ports[iv].len() + 1;
            ports[iu].push(Port {
                neighbor: v,
                reverse_port: pv,
                weight: w,
            });
            ports[iv].push(Port {
                neighbor: u,
                reverse_port: pu,
                weight: w,
            });
            edge_list.push((e, w));
        }
        let max_degree = ports.iter().map(Vec::len).max().unwrap_or(0);
        Ok(LabeledGraph {
            vertices,
            index,
            ports,
            edges: edge_list,
            edge_index,
            weighted,
            max_degree,
            id_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn id_bound(&self) -> u64 {
        self.id_bound
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn params(&self) -> GraphParams {
        GraphParams {
            n: self.n(),
            max_degree: self.max_degree,
            id_bound: self.id_bound,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(e, _)| *e)
    }

    pub fn weighted_edges(&self) -> &[(Edge, Option<Weight>)] {
        &self.edges
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edge_index.contains_key(&e)
    }

    pub fn weight(&self, e: Edge) -> Option<Weight> {
        self.edge_index.get(&e).and_then(|&i| self.edges[i].1)
    }

    /// Weight of `e`, treating unweighted graphs as unit-weight.
    pub fn weight_or_one(&self, e: Edge) -> Weight {
        self.weight(e).unwrap_or_else(|| Ratio::from_integer(1))
    }

    pub fn ports(&self, v: VertexId) -> Result<&[Port]> {
        self.index
            .get(&v)
            .map(|&i| self.ports[i].as_slice())
            .ok_or(Error::UnknownVertex(v))
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.ports(v).map(<[Port]>::len)
    }

    pub fn neighbors(&self, v: VertexId) -> Result<impl Iterator<Item = VertexId> + '_> {
        Ok(self.ports(v)?.iter().map(|p| p.neighbor))
    }
}

pub(crate) fn check_weight(w: Weight) -> std::result::Result<(), String> {
    if *w.numer() == 0 || w > Ratio::from_integer(1) {
        Err(format!("weight {w} outside (0, 1]"))
    } else {
        Ok(())
    }
}
