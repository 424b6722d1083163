//! Synchronous-round simulation of the local algorithms.
//!
//! Every vertex collects the port tables of its radius-`r` ball by flooding
//! and then answers its queries from the ball alone, through the same probe
//! interface the centralized queries use.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coloring::ColorSchedule;
use crate::error::Result;
use crate::graph::{Anchor, Ball, Edge, GraphParams, LabeledGraph, Port, ProbeSession, VertexId};
use crate::mcm::{probe_radius_bound, ApxConfig};
use crate::mis::graph_mis_radius_bound;
use crate::mwm::{ladder_bound, ladder_size_for, MwmConfig, MwmContext};
use crate::par;

/// Port tables flooded one hop per round. A message holds the tables its
/// sender learned in the previous round.
pub struct RoundEngine<'g> {
    g: &'g LabeledGraph,
    round: u64,
    known: Vec<BTreeMap<VertexId, Vec<Port>>>,
    fresh: Vec<Vec<VertexId>>,
    messages: u64,
}

impl<'g> RoundEngine<'g> {
    /// Round 0: each vertex knows its own port table.
    pub fn new(g: &'g LabeledGraph) -> Self {
        let known = g
            .vertices()
            .iter()
            .map(|&v| BTreeMap::from([(v, g.ports(v).expect("own vertex").to_vec())]))
            .collect();
        RoundEngine {
            g,
            round: 0,
            known,
            fresh: g.vertices().iter().map(|&v| vec![v]).collect(),
            messages: 0,
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    /// Runs one round; returns whether any vertex learned something new.
    pub fn step(&mut self) -> bool {
        let index: BTreeMap<VertexId, usize> = self.g.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let outbox: Vec<Vec<(VertexId, Vec<Port>)>> = self
            .fresh
            .iter()
            .zip(&self.known)
            .map(|(fresh, known)| fresh.iter().map(|v| (*v, known[v].clone())).collect())
            .collect();
        let mut learned = false;
        let mut next_fresh = vec![Vec::new(); self.known.len()];
        for (i, &v) in self.g.vertices().iter().enumerate() {
            for p in self.g.ports(v).expect("own vertex") {
                let sender = &outbox[index[&p.neighbor]];
                if sender.is_empty() {
                    continue;
                }
                self.messages += 1;
                for (u, table) in sender {
                    if !self.known[i].contains_key(u) {
                        self.known[i].insert(*u, table.clone());
                        next_fresh[i].push(*u);
                        learned = true;
                    }
                }
            }
        }
        self.fresh = next_fresh;
        self.round += 1;
        learned
    }

    /// What `v` knows now, as a ball of nominal radius `radius`.
    pub fn ball(&self, v: VertexId, radius: u64) -> Ball {
        let i = self.g.vertices().iter().position(|&u| u == v).expect("known vertex");
        let radius = u32::try_from(radius).unwrap_or(u32::MAX);
        Ball::new(v, radius, self.g.params(), self.known[i].clone())
    }
}

#[derive(Debug, Clone)]
pub struct BallCollection {
    pub balls: BTreeMap<VertexId, Ball>,
    /// The requested `r`.
    pub rounds: u64,
    /// Rounds actually run; once no vertex learns anything the remaining
    /// rounds cannot change any ball and are skipped.
    pub rounds_executed: u64,
    pub messages: u64,
}

/// After `r` rounds every vertex holds `B_r(v)`.
pub fn run_ball_collection(g: &LabeledGraph, r: u64) -> BallCollection {
    let mut engine = RoundEngine::new(g);
    while engine.round() < r && engine.step() {}
    let balls = g.vertices().iter().map(|&v| (v, engine.ball(v, r))).collect();
    BallCollection {
        balls,
        rounds: r,
        rounds_executed: engine.round(),
        messages: engine.messages(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimOutput<Q: Ord, T> {
    pub outputs: BTreeMap<Q, T>,
    pub rounds: u64,
    pub rounds_executed: u64,
    pub messages: u64,
}

/// Every vertex answers `f` for itself from its radius-`r` ball.
pub fn simulate_vertices<T: Send>(
    g: &LabeledGraph,
    r: u64,
    f: impl Fn(&mut ProbeSession<'_>, VertexId) -> Result<T> + Sync + Send,
) -> Result<SimOutput<VertexId, T>> {
    let collection = run_ball_collection(g, r);
    let answers = par::map(g.vertices(), |&v| {
        let mut session = ProbeSession::new(&collection.balls[&v], Anchor::Vertex(v));
        f(&mut session, v)
    });
    let outputs = g.vertices().iter().copied().zip(answers).map(|(v, a)| Ok((v, a?))).collect::<Result<_>>()?;
    Ok(SimOutput {
        outputs,
        rounds: collection.rounds,
        rounds_executed: collection.rounds_executed,
        messages: collection.messages,
    })
}

/// Every edge is answered by its smaller endpoint. Probe radius is measured
/// from the nearer endpoint, so a radius-`r` edge query needs `r + 1` rounds.
pub fn simulate_edges<T: Send>(
    g: &LabeledGraph,
    r: u64,
    f: impl Fn(&mut ProbeSession<'_>, Edge) -> Result<T> + Sync + Send,
) -> Result<SimOutput<Edge, T>> {
    let collection = run_ball_collection(g, r.saturating_add(1));
    let edges: Vec<Edge> = g.edges().collect();
    let answers = par::map(&edges, |&e| {
        let mut session = ProbeSession::new(&collection.balls[&e.0], Anchor::Edge(e));
        f(&mut session, e)
    });
    let outputs = edges.iter().copied().zip(answers).map(|(e, a)| Ok((e, a?))).collect::<Result<_>>()?;
    Ok(SimOutput {
        outputs,
        rounds: collection.rounds,
        rounds_executed: collection.rounds_executed,
        messages: collection.messages,
    })
}

/// Saturating conversion for round counts that only bound the simulation.
pub fn rounds_u64(r: &BigUint) -> u64 {
    r.to_u64().unwrap_or(u64::MAX)
}

fn params(max_degree: usize, n: usize) -> GraphParams {
    GraphParams {
        n,
        max_degree,
        id_bound: crate::graph::default_id_bound(n),
    }
}

/// Rounds for the vertex MIS: the probe radius of the orientation-driven MIS.
pub fn round_bound_mis(params: &GraphParams) -> Result<u64> {
    let schedule = ColorSchedule::new(params.max_degree as u64, u128::from(params.id_bound))?;
    Ok(graph_mis_radius_bound(&schedule))
}

/// Rounds for an edge query of the cardinality algorithm:
/// `r(O_(k+1)) + 1`.
pub fn round_bound_mcm(eps: Ratio<u64>, params: &GraphParams) -> Result<BigUint> {
    let cfg = ApxConfig::new(eps)?;
    Ok(probe_radius_bound(cfg.final_level(), params)? + 1u32)
}

/// [`round_bound_mcm`] with the default id bound `n²`.
pub fn round_bound_mcm_for(eps: Ratio<u64>, max_degree: usize, n: usize) -> Result<BigUint> {
    round_bound_mcm(eps, &params(max_degree, n))
}

/// Rounds for an edge query of the weighted algorithm:
/// `2k + L·T·(4k + ρ(2k+1)) + 1`, where `T` counts the gains that weight
/// classes down to `wmin` (normalized by the maximum weight) can produce.
pub fn round_bound_mwm(eps: Ratio<u64>, params: &GraphParams, wmin: &BigRational) -> Result<BigUint> {
    let cfg = MwmConfig::new(eps)?;
    let ctx = MwmContext::new(cfg, *params, Ratio::from_integer(1))?;
    let classes = ctx.disc.classes_down_to(wmin);
    let t = ladder_size_for(&ctx.disc, cfg.k(), classes).unwrap_or_else(|_| ladder_bound(classes, cfg.k()));
    let k = BigUint::from(cfg.k());
    let per_stage = BigUint::from(4u32) * &k + ctx.orientation_radius() * (BigUint::from(2u32) * &k + 1u32);
    Ok(BigUint::from(2u32) * k + BigUint::from(cfg.rounds()) * t * per_stage + 1u32)
}

/// [`round_bound_mwm`] with the default id bound `n²`.
pub fn round_bound_mwm_for(eps: Ratio<u64>, max_degree: usize, n: usize, wmin: &BigRational) -> Result<BigUint> {
    round_bound_mwm(eps, &params(max_degree, n), wmin)
}

/// Vertices reachable within `r` hops, for ball checks.
pub fn hop_ball(g: &LabeledGraph, v: VertexId, r: u64) -> BTreeSet<VertexId> {
    let mut seen = BTreeSet::from([v]);
    let mut frontier = vec![v];
    for _ in 0..r {
        let mut next = Vec::new();
        for u in frontier {
            for w in g.neighbors(u).expect("reachable vertex") {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}
