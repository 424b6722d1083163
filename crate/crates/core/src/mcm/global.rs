use std::collections::BTreeSet;

use super::{encode_path, level_schedule, path_base, ApxConfig};
use crate::coloring::color_all;
use crate::error::Result;
use crate::graph::{Edge, LabeledGraph, VertexId};
use crate::mis::greedy_mis;
use crate::verify::augmenting_paths;

/// Every intermediate matching of the global algorithm; `matchings[i]` is
/// `M_i` for `i = 0..=k+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalMcm {
    pub matchings: Vec<BTreeSet<Edge>>,
}

impl GlobalMcm {
    pub fn result(&self) -> &BTreeSet<Edge> {
        self.matchings.last().expect("M_0 is always present")
    }
}

/// Runs the global algorithm with explicit intersection graphs, colored by
/// the same schedules the local oracles use.
pub fn global_apx_mcm(g: &LabeledGraph, cfg: &ApxConfig) -> Result<GlobalMcm> {
    let params = g.params();
    let base = path_base(&params);
    let mut m = BTreeSet::new();
    let mut matchings = vec![m.clone()];
    for i in 1..=cfg.final_level() {
        let paths = augmenting_paths(g, &m, 2 * i as usize - 1);
        let ids: Vec<u128> = paths
            .iter()
            .map(|p| encode_path(p, base))
            .collect::<Result<_>>()?;
        let adjacency = intersection_graph(&paths);
        let colors = color_all(&level_schedule(i, &params)?, &ids, &adjacency)?;
        let keys: Vec<(u128, u128)> = colors.into_iter().zip(ids.iter().copied()).collect();
        for (p, chosen) in paths.iter().zip(greedy_mis(&keys, &adjacency)) {
            if chosen {
                for w in p.windows(2) {
                    let e = Edge::new(w[0], w[1]);
                    if !m.remove(&e) {
                        m.insert(e);
                    }
                }
            }
        }
        matchings.push(m.clone());
    }
    Ok(GlobalMcm { matchings })
}

/// Adjacency lists of the vertex-sharing relation.
pub(crate) fn intersection_graph(structures: &[Vec<VertexId>]) -> Vec<Vec<usize>> {
    let sets: Vec<BTreeSet<VertexId>> = structures.iter().map(|s| s.iter().copied().collect()).collect();
    (0..sets.len())
        .map(|a| {
            (0..sets.len())
                .filter(|&b| b != a && !sets[a].is_disjoint(&sets[b]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{path, ring};
    use num_rational::Ratio;

    #[test]
    fn four_path_reaches_the_perfect_matching() {
        let g = path(4).unwrap();
        let cfg = ApxConfig::new(Ratio::new(1, 1)).unwrap();
        let run = global_apx_mcm(&g, &cfg).unwrap();
        assert_eq!(run.matchings.len(), 3);
        assert_eq!(run.result().len(), 2);
    }

    #[test]
    fn first_level_is_maximal() {
        let g = ring(7).unwrap();
        let cfg = ApxConfig::new(Ratio::new(1, 2)).unwrap();
        let run = global_apx_mcm(&g, &cfg).unwrap();
        let m1 = &run.matchings[1];
        for e in g.edges() {
            assert!(m1.iter().any(|f| f.shares_vertex(&e)));
        }
        assert_eq!(run.result().len(), 3);
    }
}
