//! `(1-ε)`-approximate maximum cardinality matching by recursive oracles.
//!
//! `M_0 = ∅` and `M_i = M_{i-1} ⊕ E(P*_i)`, where `P*_i` is the MIS of the
//! intersection graph `H_i` over all `M_{i-1}`-augmenting paths with `2i-1`
//! edges. The answer is `M_{k+1}` for `k = ⌈1/ε⌉`.

pub(crate) mod global;
mod oracle;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coloring::ColorSchedule;
use crate::error::{Error, Result};
use crate::graph::{Anchor, Edge, GraphParams, ProbeSession, VertexId};

pub use global::{global_apx_mcm, GlobalMcm};
pub use oracle::McmOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApxConfig {
    eps: Ratio<u64>,
    k: u32,
}

impl ApxConfig {
    /// `eps` must lie in `(0, 1]`.
    pub fn new(eps: Ratio<u64>) -> Result<Self> {
        if *eps.numer() == 0 || eps > Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(format!("eps = {eps} is outside (0, 1]")));
        }
        let k = eps.denom().div_ceil(eps.numer());
        let k = u32::try_from(k).map_err(|_| Error::Resource(format!("eps = {eps} is too small")))?;
        Ok(ApxConfig { eps, k })
    }

    pub fn eps(&self) -> Ratio<u64> {
        self.eps
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Index of the oracle that answers the top-level query.
    pub fn final_level(&self) -> u32 {
        self.k + 1
    }
}

/// A level-`i` augmenting path with `2i-1` edges, in canonical orientation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AugPath {
    pub level: u32,
    pub vertices: Vec<VertexId>,
}

impl AugPath {
    pub fn new(level: u32, vertices: Vec<VertexId>) -> Self {
        AugPath {
            level,
            vertices: canonical_path(vertices),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::new(w[0], w[1]))
    }
}

/// Smaller endpoint first.
pub fn canonical_path(mut vertices: Vec<VertexId>) -> Vec<VertexId> {
    if vertices.first() > vertices.last() {
        vertices.reverse();
    }
    vertices
}

pub fn path_base(params: &GraphParams) -> u128 {
    u128::from(params.id_bound) + 1
}

/// Big-endian digits in base `id_bound + 1`; order-preserving for paths of
/// equal length.
pub fn encode_path(vertices: &[VertexId], base: u128) -> Result<u128> {
    vertices.iter().try_fold(0u128, |acc, &v| {
        acc.checked_mul(base)
            .and_then(|x| x.checked_add(u128::from(v)))
            .ok_or_else(|| Error::Resource(format!("path id of {} vertices overflows 128 bits", vertices.len())))
    })
}

/// `Δ(H_i) ≤ (2i)² Δ^(2i-1)`.
pub fn level_degree_bound(level: u32, max_degree: usize) -> Result<u64> {
    let overflow = || Error::Resource(format!("degree bound of level {level} overflows"));
    let side = u64::from(2 * level);
    (max_degree as u64)
        .checked_pow(2 * level - 1)
        .and_then(|p| p.checked_mul(side * side))
        .ok_or_else(overflow)
}

/// The coloring schedule of `H_i`.
pub fn level_schedule(level: u32, params: &GraphParams) -> Result<ColorSchedule> {
    let id_bound = path_base(params)
        .checked_pow(2 * level)
        .ok_or_else(|| Error::Resource(format!("ids of level {level} overflow 128 bits")))?
        - 1;
    ColorSchedule::new(level_degree_bound(level, params.max_degree)?, id_bound)
}

/// Sound probe-radius bound for `O_level`:
/// `r(O_0) = 0`, `r(O_i) = r(O_{i-1}) + (2i-2) + (ρ_i + 1)(2i-1)` with
/// `ρ_i = palette(H_i) - 1 + rounds(H_i)`.
pub fn probe_radius_bound(level: u32, params: &GraphParams) -> Result<BigUint> {
    let mut r = BigUint::from(0u32);
    for i in 1..=level {
        let s = level_schedule(i, params)?;
        let rho = BigUint::from(s.palette() - 1) + s.rounds();
        r += BigUint::from(2 * i - 2) + (rho + 1u32) * (2 * i - 1);
    }
    Ok(r)
}

fn check_edge(session: &mut ProbeSession<'_>, e: Edge) -> Result<()> {
    if session.neighbors(e.0)?.iter().any(|p| p.neighbor == e.1) {
        Ok(())
    } else {
        Err(Error::UnknownEdge(e.0, e.1))
    }
}

/// Is `e ∈ M_level`?
pub fn oracle_m(session: &mut ProbeSession<'_>, level: u32, e: Edge) -> Result<bool> {
    check_edge(session, e)?;
    McmOracle::new(session).matched(level, e)
}

/// Does `e` lie on a path of `P*_level`?
pub fn in_p_star(session: &mut ProbeSession<'_>, level: u32, e: Edge) -> Result<bool> {
    if level == 0 {
        return Err(Error::InvalidParameter("A_i needs i ≥ 1".into()));
    }
    check_edge(session, e)?;
    McmOracle::new(session).in_p_star(level, e)
}

/// Neighbors of `p` in `H_{p.level}`, sorted by id.
pub fn h_probe(session: &mut ProbeSession<'_>, p: &AugPath) -> Result<Vec<AugPath>> {
    McmOracle::new(session).h_probe_path(p)
}

/// Membership of `e` in the final matching `M_{k+1}`.
pub fn apx_mcm_query(session: &mut ProbeSession<'_>, cfg: &ApxConfig, e: Edge) -> Result<bool> {
    oracle_m(session, cfg.final_level(), e)
}

/// Fresh session for an edge query.
pub fn edge_session(topo: &dyn crate::graph::Topology, e: Edge) -> ProbeSession<'_> {
    ProbeSession::new(topo, Anchor::Edge(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{path, ring};
    use crate::graph::LabeledGraph;

    fn eps(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    #[test]
    fn config_k() {
        assert_eq!(ApxConfig::new(eps(1, 1)).unwrap().k(), 1);
        assert_eq!(ApxConfig::new(eps(1, 2)).unwrap().k(), 2);
        assert_eq!(ApxConfig::new(eps(34, 100)).unwrap().k(), 3);
        assert_eq!(ApxConfig::new(eps(1, 4)).unwrap().final_level(), 5);
        assert!(ApxConfig::new(eps(0, 1)).is_err());
        assert!(ApxConfig::new(eps(3, 2)).is_err());
    }

    #[test]
    fn level_zero_is_empty() {
        let g = ring(5).unwrap();
        for e in g.edges() {
            assert!(!oracle_m(&mut edge_session(&g, e), 0, e).unwrap());
        }
    }

    #[test]
    fn single_edge_is_matched() {
        let g = LabeledGraph::from_edges(vec![1, 2], vec![(1, 2, None)], false).unwrap();
        let e = Edge(1, 2);
        assert!(oracle_m(&mut edge_session(&g, e), 1, e).unwrap());
        assert!(in_p_star(&mut edge_session(&g, e), 1, e).unwrap());
    }

    #[test]
    fn four_path_augments_at_level_two() {
        let g = path(4).unwrap();
        let m1: Vec<bool> = g
            .edges()
            .map(|e| oracle_m(&mut edge_session(&g, e), 1, e).unwrap())
            .collect();
        let m2: Vec<bool> = g
            .edges()
            .map(|e| oracle_m(&mut edge_session(&g, e), 2, e).unwrap())
            .collect();
        if m1 == [false, true, false] {
            assert_eq!(m2, [true, false, true]);
            let a = Edge(1, 2);
            assert!(in_p_star(&mut edge_session(&g, a), 2, a).unwrap());
            let p = AugPath::new(2, vec![1, 2, 3, 4]);
            assert!(h_probe(&mut edge_session(&g, a), &p).unwrap().is_empty());
        } else {
            assert_eq!(m1, [true, false, true]);
            assert_eq!(m2, m1);
        }
    }

    #[test]
    fn ring_line_graph_neighbors() {
        let g = ring(6).unwrap();
        let e = Edge(1, 2);
        let p = AugPath::new(1, vec![1, 2]);
        let got = h_probe(&mut edge_session(&g, e), &p).unwrap();
        let want = vec![AugPath::new(1, vec![1, 6]), AugPath::new(1, vec![2, 3])];
        assert_eq!(got, want);
    }

    #[test]
    fn disjoint_edges_all_matched() {
        let spec = crate::corpus::CorpusSpec::new(crate::corpus::Family::DisjointEdges, 8, 0);
        let g = crate::corpus::generate(&spec).unwrap();
        let cfg = ApxConfig::new(eps(1, 2)).unwrap();
        for e in g.edges() {
            assert!(apx_mcm_query(&mut edge_session(&g, e), &cfg, e).unwrap());
        }
    }

    #[test]
    fn unknown_edge_is_rejected() {
        let g = ring(6).unwrap();
        let e = Edge(1, 3);
        assert_eq!(oracle_m(&mut edge_session(&g, e), 1, e), Err(Error::UnknownEdge(1, 3)));
    }

    #[test]
    fn radius_bound_is_monotone() {
        let p = |n: usize, d: usize| GraphParams {
            n,
            max_degree: d,
            id_bound: crate::graph::default_id_bound(n),
        };
        assert_eq!(probe_radius_bound(0, &p(10, 3)).unwrap(), BigUint::from(0u32));
        let b = |l, n, d| probe_radius_bound(l, &p(n, d)).unwrap();
        assert!(b(2, 20, 3) <= b(3, 20, 3));
        assert!(b(2, 20, 3) <= b(2, 20, 4));
        assert!(b(2, 20, 3) <= b(2, 2000, 3));
    }

    #[test]
    fn encoding_preserves_lexicographic_order() {
        let base = 101;
        let a = encode_path(&[1, 5, 3, 9], base).unwrap();
        let b = encode_path(&[1, 6, 2, 2], base).unwrap();
        assert!(a < b);
        assert!(encode_path(&[u64::MAX; 4], u128::from(u64::MAX) + 1).is_err());
    }
}
