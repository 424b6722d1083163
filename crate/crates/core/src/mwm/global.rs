use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Signed;

use super::{gain, preprocess, AugStructure, Kind, MwmContext, StageIndex};
use crate::coloring::color_all;
use crate::error::Result;
use crate::graph::{Edge, LabeledGraph, VertexId};
use crate::mcm::global::intersection_graph;
use crate::mis::greedy_mis;
use crate::verify::for_each_simple_path;

/// Every non-empty stage of the global algorithm, in order, with the matching
/// right after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalMwm {
    pub stages: Vec<(StageIndex, BTreeSet<Edge>)>,
}

impl GlobalMwm {
    pub fn result(&self) -> BTreeSet<Edge> {
        self.stages.last().map(|(_, m)| m.clone()).unwrap_or_default()
    }
}

/// Runs the stage loop over explicit structure sets. Within a round the next
/// gain is the largest one below the previous stage that some augmenting
/// structure realises; every other ladder stage is empty.
pub fn global_apx_mwm(g: &LabeledGraph, ctx: &MwmContext) -> Result<GlobalMwm> {
    let kept: BTreeMap<Edge, u32> = preprocess(g, &ctx.disc).kept.into_iter().collect();
    let mut m = BTreeSet::new();
    let mut stages = Vec::new();
    for round in 1..=ctx.cfg.rounds() {
        let mut last: Option<BigInt> = None;
        loop {
            let all = augmenting_structures(g, ctx, &kept, &m);
            let Some(top) = all
                .iter()
                .map(|(gain, _)| gain)
                .filter(|gain| last.as_ref().is_none_or(|l| *gain < l))
                .max()
                .cloned()
            else {
                break;
            };
            let chosen: Vec<&AugStructure> = all.iter().filter(|(g, _)| *g == top).map(|(_, s)| s).collect();
            let ids: Vec<u128> = chosen.iter().map(|s| structure_id(g, ctx, s)).collect();
            let vertex_sets: Vec<Vec<VertexId>> = chosen.iter().map(|s| s.vertices.clone()).collect();
            let adjacency = intersection_graph(&vertex_sets);
            let colors = color_all(&ctx.schedule, &ids, &adjacency)?;
            let keys: Vec<(u128, u128)> = colors.into_iter().zip(ids.iter().copied()).collect();
            for (s, pick) in chosen.iter().zip(greedy_mis(&keys, &adjacency)) {
                if pick {
                    for e in s.edges() {
                        if !m.remove(&e) {
                            m.insert(e);
                        }
                    }
                }
            }
            stages.push((StageIndex::at(round, top.clone()), m.clone()));
            last = Some(top);
        }
    }
    Ok(GlobalMwm { stages })
}

/// Matching after `stage` in a global run.
pub fn matching_at(run: &GlobalMwm, stage: &StageIndex) -> BTreeSet<Edge> {
    run.stages
        .iter()
        .take_while(|(s, _)| s <= stage)
        .last()
        .map(|(_, m)| m.clone())
        .unwrap_or_default()
}

pub(crate) fn structure_id(g: &LabeledGraph, ctx: &MwmContext, s: &AugStructure) -> u128 {
    let v = &s.vertices;
    let closing = usize::from(s.kind == Kind::Cycle);
    let ports: Vec<usize> = (0..v.len() - 1 + closing)
        .map(|j| {
            let next = v[(j + 1) % v.len()];
            let table = g.ports(v[j]).expect("structure vertices exist");
            table.iter().position(|p| p.neighbor == next).expect("structure edges exist") + 1
        })
        .collect();
    ctx.encoding.id(s.kind, v[0], &ports)
}

/// All augmenting structures with respect to `m` together with their scaled
/// gains, found by brute force over kept edges.
pub(crate) fn augmenting_structures(
    g: &LabeledGraph,
    ctx: &MwmContext,
    kept: &BTreeMap<Edge, u32>,
    m: &BTreeSet<Edge>,
) -> Vec<(BigInt, AugStructure)> {
    let sub = LabeledGraph::with_id_bound(
        g.vertices().to_vec(),
        kept.keys().map(|e| (e.0, e.1, None)).collect(),
        false,
        g.id_bound(),
    )
    .expect("subgraph of a valid graph");
    let covered: BTreeSet<VertexId> = m.iter().flat_map(|e| [e.0, e.1]).collect();
    let k = ctx.cfg.k() as usize;
    let mut out = Vec::new();
    let mut consider = |kind: Kind, vertices: &[VertexId]| {
        let mut edges: Vec<Edge> = vertices.windows(2).map(|w| Edge::new(w[0], w[1])).collect();
        if kind == Kind::Cycle {
            edges.push(Edge::new(vertices[vertices.len() - 1], vertices[0]));
        }
        let matched: Vec<bool> = edges.iter().map(|e| m.contains(e)).collect();
        let alternating = matched.windows(2).all(|w| w[0] != w[1])
            && (kind == Kind::Path || matched[0] != matched[matched.len() - 1]);
        let unmatched = matched.iter().filter(|&&x| !x).count();
        if !alternating || unmatched == 0 || unmatched > k {
            return;
        }
        if kind == Kind::Path {
            let (first, last) = (vertices[0], vertices[vertices.len() - 1]);
            if (!matched[0] && covered.contains(&first)) || (!matched[matched.len() - 1] && covered.contains(&last)) {
                return;
            }
        }
        let classes: Vec<u32> = edges.iter().map(|e| kept[e]).collect();
        let gain = gain(&ctx.disc, &classes, &matched);
        if gain.is_positive() {
            out.push((
                gain,
                AugStructure {
                    kind,
                    vertices: vertices.to_vec(),
                },
            ));
        }
    };
    for len in 1..=ctx.cfg.max_path_edges() {
        for_each_simple_path(&sub, len, &mut |p| {
            if p[0] < p[p.len() - 1] {
                consider(Kind::Path, p);
            }
        });
    }
    for len in (4..=ctx.cfg.max_cycle_edges()).step_by(2) {
        for_each_simple_path(&sub, len - 1, &mut |p| {
            let closes = sub.contains_edge(Edge::new(p[0], p[p.len() - 1]));
            if closes && AugStructure::cycle(p.to_vec()).vertices == p {
                consider(Kind::Cycle, p);
            }
        });
    }
    out.sort();
    out
}
