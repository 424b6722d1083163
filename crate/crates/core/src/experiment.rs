//! Whole-graph query runs and the metrics record of one experiment cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coloring::{color_vertex, graph_schedule, orient_edge, Color};
use crate::corpus::{generate, CorpusSpec};
use crate::dlocal::{
    round_bound_mcm, round_bound_mis, round_bound_mwm, rounds_u64, simulate_edges, simulate_vertices,
};
use crate::error::{Error, Result};
use crate::graph::{Anchor, Edge, LabeledGraph, ProbeSession, ProbeStats, VertexId};
use crate::mcm::{apx_mcm_query, ApxConfig};
use crate::mis::mis_vertex;
use crate::mwm::{apx_mwm_query, preprocess, MwmContext};
use crate::par;
use crate::verify::{exact_mcm, exact_mwm, matching_weight, MCM_CAP, MWM_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mis,
    Mcm,
    Mwm,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Mis => "mis",
            Algorithm::Mcm => "mcm",
            Algorithm::Mwm => "mwm",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mis" => Ok(Algorithm::Mis),
            "mcm" => Ok(Algorithm::Mcm),
            "mwm" => Ok(Algorithm::Mwm),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Answers and probe statistics of one query per vertex or edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRun<Q: Ord, T> {
    pub answers: BTreeMap<Q, T>,
    pub stats: BTreeMap<Q, ProbeStats>,
}

impl<Q: Ord + Copy, T> QueryRun<Q, T> {
    pub fn max_radius(&self) -> u32 {
        self.stats.values().map(|s| s.radius).max().unwrap_or(0)
    }

    pub fn max_probes(&self) -> u64 {
        self.stats.values().map(|s| s.probes).max().unwrap_or(0)
    }

    pub fn mean_probes(&self) -> f64 {
        if self.stats.is_empty() {
            return 0.0;
        }
        self.stats.values().map(|s| s.probes as f64).sum::<f64>() / self.stats.len() as f64
    }

    pub fn selected(&self) -> BTreeSet<Q>
    where
        T: Copy + Into<bool>,
    {
        self.answers
            .iter()
            .filter(|(_, &a)| a.into())
            .map(|(&q, _)| q)
            .collect()
    }
}

/// Runs `f` once per query, in the given order, each with a fresh session.
pub fn run_queries<Q, T>(
    g: &LabeledGraph,
    queries: &[Q],
    anchor: impl Fn(Q) -> Anchor + Sync + Send,
    f: impl Fn(&mut ProbeSession<'_>, Q) -> Result<T> + Sync + Send,
) -> Result<QueryRun<Q, T>>
where
    Q: Ord + Copy + Send + Sync,
    T: Send,
{
    let results = par::map(queries, |&q| {
        let mut session = ProbeSession::new(g, anchor(q));
        f(&mut session, q).map(|a| (a, session.stats()))
    });
    let mut answers = BTreeMap::new();
    let mut stats = BTreeMap::new();
    for (&q, r) in queries.iter().zip(results) {
        let (a, s) = r?;
        answers.insert(q, a);
        stats.insert(q, s);
    }
    Ok(QueryRun { answers, stats })
}

pub fn run_mis(g: &LabeledGraph) -> Result<QueryRun<VertexId, bool>> {
    run_queries(g, g.vertices(), Anchor::Vertex, mis_vertex)
}

pub fn run_coloring(g: &LabeledGraph) -> Result<QueryRun<VertexId, Color>> {
    run_queries(g, g.vertices(), Anchor::Vertex, color_vertex)
}

/// Orientation of every edge as `(from, to)`.
pub fn run_orientation(g: &LabeledGraph) -> Result<QueryRun<Edge, (VertexId, VertexId)>> {
    let edges: Vec<Edge> = g.edges().collect();
    run_queries(g, &edges, Anchor::Edge, |s, e| orient_edge(s, e).map(|d| (d.from, d.to)))
}

pub fn run_mcm(g: &LabeledGraph, eps: Ratio<u64>) -> Result<QueryRun<Edge, bool>> {
    let cfg = ApxConfig::new(eps)?;
    let edges: Vec<Edge> = g.edges().collect();
    run_mcm_edges(g, &cfg, &edges)
}

pub fn run_mcm_edges(g: &LabeledGraph, cfg: &ApxConfig, edges: &[Edge]) -> Result<QueryRun<Edge, bool>> {
    run_queries(g, edges, Anchor::Edge, |s, e| apx_mcm_query(s, cfg, e))
}

pub fn run_mwm(g: &LabeledGraph, eps: Ratio<u64>) -> Result<QueryRun<Edge, bool>> {
    let ctx = MwmContext::for_graph(g, eps)?;
    let edges: Vec<Edge> = g.edges().collect();
    run_mwm_edges(g, &ctx, &edges)
}

pub fn run_mwm_edges(g: &LabeledGraph, ctx: &MwmContext, edges: &[Edge]) -> Result<QueryRun<Edge, bool>> {
    run_queries(g, edges, Anchor::Edge, |s, e| apx_mwm_query(s, ctx, e))
}

/// Normalized minimum weight used by the weighted round bound.
pub fn normalized_wmin(g: &LabeledGraph, ctx: &MwmContext) -> BigRational {
    preprocess(g, &ctx.disc).wmin
}

/// Analytic round bound of `algorithm` on `g`, as a decimal string.
pub fn round_bound(g: &LabeledGraph, algorithm: Algorithm, eps: Ratio<u64>) -> Result<String> {
    let params = g.params();
    Ok(match algorithm {
        Algorithm::Mis => round_bound_mis(&params)?.to_string(),
        Algorithm::Mcm => round_bound_mcm(eps, &params)?.to_string(),
        Algorithm::Mwm => {
            let ctx = MwmContext::for_graph(g, eps)?;
            round_bound_mwm(eps, &params, &normalized_wmin(g, &ctx))?.to_string()
        }
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExperimentOptions {
    /// Also run the round simulation and compare it with the direct answers.
    pub simulate: bool,
    /// Record wall-clock time. Off by default so that records are
    /// reproducible byte for byte.
    pub wall_time: bool,
}

/// One JSON-lines record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub graph: String,
    pub algorithm: Algorithm,
    pub eps: String,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    /// Number of selected vertices or edges.
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub max_probes: u64,
    pub mean_probes: f64,
    pub max_radius: u32,
    pub round_bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_equal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

fn ratio_f64(num: &BigRational, den: &BigRational) -> Option<f64> {
    if den.is_zero() {
        return Some(1.0);
    }
    (num / den).to_f64()
}

pub fn run_experiment(spec: &CorpusSpec, algorithm: Algorithm, eps: Ratio<u64>, opts: ExperimentOptions) -> Result<Metrics> {
    let g = generate(spec)?;
    experiment_on(&g, &spec.to_string(), algorithm, eps, opts)
}

/// [`run_experiment`] on an explicit graph labelled `name`.
pub fn experiment_on(
    g: &LabeledGraph,
    name: &str,
    algorithm: Algorithm,
    eps: Ratio<u64>,
    opts: ExperimentOptions,
) -> Result<Metrics> {
    outcome_on(g, name, algorithm, eps, opts).map(|o| o.metrics)
}

/// Metrics of one cell plus what was selected.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub metrics: Metrics,
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<Edge>,
}

/// [`experiment_on`], keeping the selected vertices or edges.
pub fn outcome_on(
    g: &LabeledGraph,
    name: &str,
    algorithm: Algorithm,
    eps: Ratio<u64>,
    opts: ExperimentOptions,
) -> Result<Outcome> {
    let start = Instant::now();
    let bound = round_bound(g, algorithm, eps)?;
    let sim_r = rounds_u64(&bound.parse().expect("decimal bound"));
    let mut weight = None;
    let mut optimum = None;
    let mut ratio = None;
    let mut sim = None;
    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let (size, max_probes, mean_probes, max_radius) = match algorithm {
        Algorithm::Mis => {
            let run = run_mis(g)?;
            if opts.simulate {
                let out = simulate_vertices(g, sim_r, mis_vertex)?;
                sim = Some((out.rounds_executed, out.outputs == run.answers));
            }
            vertices = run.selected();
            (vertices.len(), run.max_probes(), run.mean_probes(), run.max_radius())
        }
        Algorithm::Mcm => {
            let run = run_mcm(g, eps)?;
            let m = run.selected();
            if g.n() <= MCM_CAP {
                let opt = exact_mcm(g)?.value;
                optimum = Some(opt.to_string());
                ratio = Some(if opt == 0 { 1.0 } else { m.len() as f64 / opt as f64 });
            }
            if opts.simulate {
                let cfg = ApxConfig::new(eps)?;
                let out = simulate_edges(g, sim_r.saturating_sub(1), |s, e| apx_mcm_query(s, &cfg, e))?;
                sim = Some((out.rounds_executed, out.outputs == run.answers));
            }
            let size = m.len();
            edges = m;
            (size, run.max_probes(), run.mean_probes(), run.max_radius())
        }
        Algorithm::Mwm => {
            let ctx = MwmContext::for_graph(g, eps)?;
            let queries: Vec<Edge> = g.edges().collect();
            let run = run_mwm_edges(g, &ctx, &queries)?;
            let m = run.selected();
            let w = matching_weight(g, &m);
            if g.n() <= MWM_CAP {
                let opt = exact_mwm(g)?.value;
                ratio = ratio_f64(&w, &opt);
                optimum = Some(opt.to_string());
            }
            weight = Some(w.to_string());
            if opts.simulate {
                let out = simulate_edges(g, sim_r.saturating_sub(1), |s, e| apx_mwm_query(s, &ctx, e))?;
                sim = Some((out.rounds_executed, out.outputs == run.answers));
            }
            let size = m.len();
            edges = m;
            (size, run.max_probes(), run.mean_probes(), run.max_radius())
        }
    };
    let metrics = Metrics {
        graph: name.to_string(),
        algorithm,
        eps: eps.to_string(),
        n: g.n(),
        m: g.m(),
        max_degree: g.max_degree(),
        size,
        weight,
        optimum,
        ratio,
        max_probes,
        mean_probes,
        max_radius,
        round_bound: bound,
        sim_rounds: sim.map(|s| s.0),
        sim_equal: sim.map(|s| s.1),
        wall_ms: opts.wall_time.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Outcome { metrics, vertices, edges })
}

/// The coloring schedule a vertex of `g` uses.
pub fn schedule_of(g: &LabeledGraph) -> Result<crate::coloring::ColorSchedule> {
    graph_schedule(&ProbeSession::new(g, Anchor::Vertex(g.vertices().first().copied().unwrap_or(1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Family, WeightModel};

    #[test]
    fn disjoint_edges_ratio_one() {
        let spec = CorpusSpec::new(Family::DisjointEdges, 8, 0);
        let m = run_experiment(&spec, Algorithm::Mcm, Ratio::new(1, 2), ExperimentOptions::default()).unwrap();
        assert_eq!(m.ratio, Some(1.0));
        assert_eq!(m.size, 4);
    }

    #[test]
    fn ring_twelve_meets_the_guarantee() {
        let spec = CorpusSpec::new(Family::Ring, 12, 0);
        let m = run_experiment(&spec, Algorithm::Mcm, Ratio::new(34, 100), ExperimentOptions::default()).unwrap();
        assert!(m.ratio.unwrap() >= 0.66);
    }

    #[test]
    fn weighted_grid_meets_the_guarantee() {
        let spec = CorpusSpec::grid(3, 3, 1).with_weights(WeightModel::UniformRational);
        let opts = ExperimentOptions {
            simulate: true,
            wall_time: false,
        };
        let m = run_experiment(&spec, Algorithm::Mwm, Ratio::new(1, 2), opts).unwrap();
        assert!(m.ratio.unwrap() >= 0.5);
        assert_eq!(m.sim_equal, Some(true));
        assert!(m.wall_ms.is_none());
    }

    #[test]
    fn records_are_reproducible() {
        let spec = CorpusSpec::new(Family::RandomRegular { degree: 3 }, 10, 3);
        let opts = ExperimentOptions {
            simulate: true,
            wall_time: false,
        };
        let a = run_experiment(&spec, Algorithm::Mis, Ratio::new(1, 2), opts).unwrap();
        let b = run_experiment(&spec, Algorithm::Mis, Ratio::new(1, 2), opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sim_equal, Some(true));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Mis, Algorithm::Mcm, Algorithm::Mwm] {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bogus".parse::<Algorithm>().is_err());
    }
}
