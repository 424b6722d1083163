//! Brute-force ground truth and structural validators. Nothing here shares
//! code with the local algorithms under test.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::Color;
use crate::error::{Error, Result};
use crate::graph::{Edge, LabeledGraph, VertexId, Weight};

pub const MCM_CAP: usize = 20;
pub const MWM_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum Violation {
    #[error("edge {0} is not in the graph")]
    UnknownEdge(Edge),
    #[error("edges {first} and {second} share vertex {vertex}")]
    SharedVertex { vertex: VertexId, first: Edge, second: Edge },
    #[error("adjacent nodes {0} and {1} are both in the independent set")]
    NotIndependent(u128, u128),
    #[error("node {0} could be added to the independent set")]
    NotMaximal(u128),
    #[error("vertex {0} has no color")]
    Uncolored(VertexId),
    #[error("vertex {vertex} has color {color} outside palette {palette}")]
    OutOfPalette { vertex: VertexId, color: Color, palette: Color },
    #[error("edge {0} is monochromatic")]
    Monochromatic(Edge),
    #[error("edge {0} has no direction")]
    Undirected(Edge),
    #[error("directed pair ({0}, {1}) is not an edge")]
    StrayDirection(VertexId, VertexId),
    #[error("orientation has a cycle through {0}")]
    Cycle(VertexId),
    #[error("longest directed path has {length} edges, bound is {bound}")]
    RadiusExceeded { length: u64, bound: u64 },
    #[error("matching of size {size} is below the required {required}")]
    Approximation { size: String, required: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult<V> {
    pub value: V,
    pub witness: BTreeSet<Edge>,
}

fn check_cap(g: &LabeledGraph, cap: usize) -> Result<()> {
    if g.n() > cap {
        Err(Error::TooLarge { size: g.n(), cap })
    } else {
        Ok(())
    }
}

struct Search<'a, V> {
    vertices: Vec<VertexId>,
    adjacency: HashMap<VertexId, Vec<(VertexId, V)>>,
    used: HashMap<VertexId, bool>,
    chosen: Vec<Edge>,
    best: Option<(V, Vec<Edge>)>,
    bound: &'a dyn Fn(&Search<'a, V>, usize) -> V,
}

impl<'a, V: Clone + Ord + std::ops::Add<Output = V>> Search<'a, V> {
    fn new(g: &LabeledGraph, weight: impl Fn(Edge) -> V, bound: &'a dyn Fn(&Search<'a, V>, usize) -> V) -> Self {
        let mut vertices = g.vertices().to_vec();
        vertices.sort_unstable();
        let mut adjacency: HashMap<VertexId, Vec<(VertexId, V)>> =
            vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in g.edges() {
            let w = weight(e);
            adjacency.get_mut(&e.0).unwrap().push((e.1, w.clone()));
            adjacency.get_mut(&e.1).unwrap().push((e.0, w));
        }
        for list in adjacency.values_mut() {
            list.sort_by_key(|(u, _)| *u);
        }
        let used = vertices.iter().map(|&v| (v, false)).collect();
        Search {
            vertices,
            adjacency,
            used,
            chosen: Vec::new(),
            best: None,
            bound,
        }
    }

    /// Branches on the first undecided vertex: leave it unmatched, or match
    /// it to each undecided neighbor.
    fn run(&mut self, from: usize, value: V) {
        if let Some((best, _)) = &self.best {
            if value.clone() + (self.bound)(self, from) <= *best {
                return;
            }
        }
        let Some(pos) = (from..self.vertices.len()).find(|&i| !self.used[&self.vertices[i]]) else {
            if self.best.as_ref().map_or(true, |(b, _)| value > *b) {
                self.best = Some((value, self.chosen.clone()));
            }
            return;
        };
        let v = self.vertices[pos];
        self.used.insert(v, true);
        let options: Vec<(VertexId, V)> = self.adjacency[&v]
            .iter()
            .filter(|(u, _)| !self.used[u])
            .cloned()
            .collect();
        for (u, w) in options {
            self.used.insert(u, true);
            self.chosen.push(Edge::new(v, u));
            self.run(pos + 1, value.clone() + w);
            self.chosen.pop();
            self.used.insert(u, false);
        }
        self.run(pos + 1, value);
        self.used.insert(v, false);
    }
}

/// Maximum cardinality matching by branch and bound.
pub fn exact_mcm(g: &LabeledGraph) -> Result<ExactResult<usize>> {
    check_cap(g, MCM_CAP)?;
    let bound = |s: &Search<'_, usize>, from: usize| {
        s.vertices[from..].iter().filter(|v| !s.used[v]).count() / 2
    };
    let mut search = Search::new(g, |_| 1usize, &bound);
    search.run(0, 0);
    let (value, witness) = search.best.expect("the empty matching is always found");
    Ok(ExactResult {
        value,
        witness: witness.into_iter().collect(),
    })
}

pub fn to_big(w: Weight) -> BigRational {
    BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()))
}

/// Maximum weight matching by branch and bound; unweighted edges weigh 1.
pub fn exact_mwm(g: &LabeledGraph) -> Result<ExactResult<BigRational>> {
    check_cap(g, MWM_CAP)?;
    // Each undecided vertex can contribute at most half its heaviest edge.
    let bound = |s: &Search<'_, BigRational>, from: usize| {
        let two = BigRational::from_integer(2.into());
        s.vertices[from..]
            .iter()
            .filter(|v| !s.used[v])
            .map(|v| {
                s.adjacency[v]
                    .iter()
                    .filter(|(u, _)| !s.used[u])
                    .map(|(_, w)| w.clone())
                    .max()
                    .unwrap_or_else(BigRational::zero)
            })
            .fold(BigRational::zero(), |acc, w| acc + w)
            / two
    };
    let mut search = Search::new(g, |e| to_big(g.weight_or_one(e)), &bound);
    search.run(0, BigRational::zero());
    let (value, witness) = search.best.expect("the empty matching is always found");
    Ok(ExactResult {
        value,
        witness: witness.into_iter().collect(),
    })
}

pub fn matching_weight(g: &LabeledGraph, m: &BTreeSet<Edge>) -> BigRational {
    m.iter()
        .map(|&e| to_big(g.weight_or_one(e)))
        .fold(BigRational::zero(), |acc, w| acc + w)
}

pub fn validate_matching(g: &LabeledGraph, edges: &BTreeSet<Edge>) -> std::result::Result<(), Violation> {
    let mut owner: BTreeMap<VertexId, Edge> = BTreeMap::new();
    for &e in edges {
        if !g.contains_edge(e) {
            return Err(Violation::UnknownEdge(e));
        }
        for v in [e.0, e.1] {
            if let Some(&first) = owner.get(&v) {
                return Err(Violation::SharedVertex {
                    vertex: v,
                    first,
                    second: e,
                });
            }
            owner.insert(v, e);
        }
    }
    Ok(())
}

/// Independence and maximality over an explicit graph on `nodes`.
pub fn validate_mis(
    nodes: &[u128],
    edges: &[(u128, u128)],
    set: &BTreeSet<u128>,
) -> std::result::Result<(), Violation> {
    for &(a, b) in edges {
        if set.contains(&a) && set.contains(&b) {
            return Err(Violation::NotIndependent(a.min(b), a.max(b)));
        }
    }
    let mut covered: BTreeSet<u128> = set.clone();
    for &(a, b) in edges {
        if set.contains(&a) {
            covered.insert(b);
        }
        if set.contains(&b) {
            covered.insert(a);
        }
    }
    match nodes.iter().find(|v| !covered.contains(v)) {
        Some(&v) => Err(Violation::NotMaximal(v)),
        None => Ok(()),
    }
}

pub fn validate_graph_mis(g: &LabeledGraph, set: &BTreeSet<VertexId>) -> std::result::Result<(), Violation> {
    let nodes: Vec<u128> = g.vertices().iter().map(|&v| v.into()).collect();
    let edges: Vec<(u128, u128)> = g.edges().map(|e| (e.0.into(), e.1.into())).collect();
    let set = set.iter().map(|&v| v.into()).collect();
    validate_mis(&nodes, &edges, &set)
}

pub fn validate_coloring(
    g: &LabeledGraph,
    colors: &HashMap<VertexId, Color>,
    palette: Color,
) -> std::result::Result<(), Violation> {
    for &v in g.vertices() {
        let &c = colors.get(&v).ok_or(Violation::Uncolored(v))?;
        if c >= palette {
            return Err(Violation::OutOfPalette {
                vertex: v,
                color: c,
                palette,
            });
        }
    }
    match g.edges().find(|e| colors[&e.0] == colors[&e.1]) {
        Some(e) => Err(Violation::Monochromatic(e)),
        None => Ok(()),
    }
}

/// Checks that `directions` orients every edge exactly once, without cycles,
/// with no directed path longer than `palette - 1`. Returns the longest
/// directed path length.
pub fn validate_orientation(
    g: &LabeledGraph,
    directions: &[(VertexId, VertexId)],
    palette: Color,
) -> std::result::Result<u64, Violation> {
    let mut out: HashMap<VertexId, Vec<VertexId>> = g.vertices().iter().map(|&v| (v, Vec::new())).collect();
    let mut seen = BTreeSet::new();
    for &(a, b) in directions {
        let e = Edge::new(a, b);
        if !g.contains_edge(e) || !seen.insert(e) {
            return Err(Violation::StrayDirection(a, b));
        }
        out.get_mut(&a).expect("edge endpoints are vertices").push(b);
    }
    if let Some(e) = g.edges().find(|e| !seen.contains(e)) {
        return Err(Violation::Undirected(e));
    }
    // Longest path by DFS with colors: 0 unvisited, 1 on stack, 2 done.
    let mut state: HashMap<VertexId, u8> = HashMap::new();
    let mut longest: HashMap<VertexId, u64> = HashMap::new();
    let mut vertices = g.vertices().to_vec();
    vertices.sort_unstable();
    for &root in &vertices {
        if state.contains_key(&root) {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state.insert(root, 1);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&u) = out[&v].get(*next) {
                *next += 1;
                match state.get(&u) {
                    Some(1) => return Err(Violation::Cycle(u)),
                    Some(_) => {}
                    None => {
                        state.insert(u, 1);
                        stack.push((u, 0));
                    }
                }
            } else {
                let len = out[&v].iter().map(|u| longest[u] + 1).max().unwrap_or(0);
                longest.insert(v, len);
                state.insert(v, 2);
                stack.pop();
            }
        }
    }
    let length = longest.values().copied().max().unwrap_or(0);
    let bound = u64::try_from(palette.saturating_sub(1)).unwrap_or(u64::MAX);
    if length > bound {
        return Err(Violation::RadiusExceeded { length, bound });
    }
    Ok(length)
}

/// Every `m`-augmenting path with exactly `len` edges, found by enumerating
/// all simple paths. Paths are returned with the smaller endpoint first,
/// sorted.
pub fn augmenting_paths(g: &LabeledGraph, m: &BTreeSet<Edge>, len: usize) -> Vec<Vec<VertexId>> {
    let covered: BTreeSet<VertexId> = m.iter().flat_map(|e| [e.0, e.1]).collect();
    let mut out = Vec::new();
    for_each_simple_path(g, len, &mut |p| {
        let first = p[0];
        let last = p[p.len() - 1];
        if first > last || covered.contains(&first) || covered.contains(&last) {
            return;
        }
        let alternating = p
            .windows(2)
            .enumerate()
            .all(|(j, w)| m.contains(&Edge::new(w[0], w[1])) == (j % 2 == 1));
        if alternating {
            out.push(p.to_vec());
        }
    });
    out.sort();
    out
}

/// Calls `f` on every simple path with exactly `len` edges, in both
/// directions.
pub fn for_each_simple_path(g: &LabeledGraph, len: usize, f: &mut dyn FnMut(&[VertexId])) {
    fn extend(g: &LabeledGraph, path: &mut Vec<VertexId>, len: usize, f: &mut dyn FnMut(&[VertexId])) {
        if path.len() == len + 1 {
            f(path);
            return;
        }
        let last = path[path.len() - 1];
        let next: Vec<VertexId> = g.neighbors(last).expect("path vertices exist").collect();
        for u in next {
            if !path.contains(&u) {
                path.push(u);
                extend(g, path, len, f);
                path.pop();
            }
        }
    }
    let mut vertices = g.vertices().to_vec();
    vertices.sort_unstable();
    for v in vertices {
        extend(g, &mut vec![v], len, f);
    }
}

/// Length of a shortest `m`-augmenting path, if any.
pub fn shortest_augmenting_path(g: &LabeledGraph, m: &BTreeSet<Edge>) -> Option<usize> {
    (1..g.n().max(1)).step_by(2).find(|&len| !augmenting_paths(g, m, len).is_empty())
}

/// Greedy maximal matching in edge order, for sandwich checks.
pub fn greedy_matching(g: &LabeledGraph) -> BTreeSet<Edge> {
    let mut used = BTreeSet::new();
    let mut m = BTreeSet::new();
    for e in g.edges() {
        if !used.contains(&e.0) && !used.contains(&e.1) {
            used.insert(e.0);
            used.insert(e.1);
            m.insert(e);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, path, ring, CorpusSpec, Family};
    use num_rational::Ratio;

    fn triangle() -> LabeledGraph {
        LabeledGraph::from_edges(
            vec![1, 2, 3],
            vec![
                (1, 2, Some(Ratio::new(1, 1))),
                (2, 3, Some(Ratio::new(1, 1))),
                (1, 3, Some(Ratio::new(9, 10))),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn exact_on_small_graphs() {
        let empty = LabeledGraph::from_edges(vec![], vec![], false).unwrap();
        assert_eq!(exact_mcm(&empty).unwrap().value, 0);
        assert_eq!(exact_mcm(&ring(6).unwrap()).unwrap().value, 3);
        assert_eq!(exact_mcm(&ring(7).unwrap()).unwrap().value, 3);
        let w = exact_mwm(&triangle()).unwrap();
        assert_eq!(w.value, BigRational::from_integer(1.into()));
        assert!(validate_matching(&triangle(), &w.witness).is_ok());
    }

    #[test]
    fn exact_respects_caps() {
        let big = ring(21).unwrap();
        assert!(matches!(exact_mcm(&big), Err(Error::TooLarge { size: 21, cap: 20 })));
        assert!(matches!(exact_mwm(&ring(15).unwrap()), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn sandwich_on_regular_graphs() {
        for seed in 0..5 {
            let g = generate(&CorpusSpec::new(Family::RandomRegular { degree: 3 }, 16, seed)).unwrap();
            let opt = exact_mcm(&g).unwrap();
            let greedy = greedy_matching(&g).len();
            assert!(greedy <= opt.value && opt.value <= 2 * greedy);
            assert_eq!(opt.witness.len(), opt.value);
            assert!(validate_matching(&g, &opt.witness).is_ok());
        }
    }

    #[test]
    fn matching_violations() {
        let g = path(3).unwrap();
        assert!(validate_matching(&g, &BTreeSet::new()).is_ok());
        let bad = [Edge(1, 2), Edge(2, 3)].into_iter().collect();
        assert_eq!(
            validate_matching(&g, &bad),
            Err(Violation::SharedVertex {
                vertex: 2,
                first: Edge(1, 2),
                second: Edge(2, 3)
            })
        );
    }

    #[test]
    fn mis_violations() {
        assert!(validate_mis(&[7], &[], &[7].into_iter().collect()).is_ok());
        let g = path(4).unwrap();
        let not_max: BTreeSet<VertexId> = [1].into_iter().collect();
        assert_eq!(validate_graph_mis(&g, &not_max), Err(Violation::NotMaximal(3)));
        let dep: BTreeSet<VertexId> = [1, 2, 4].into_iter().collect();
        assert_eq!(validate_graph_mis(&g, &dep), Err(Violation::NotIndependent(1, 2)));
    }

    #[test]
    fn orientation_checks() {
        let g = ring(4).unwrap();
        let dag = [(2, 1), (2, 3), (4, 3), (4, 1)];
        assert_eq!(validate_orientation(&g, &dag, 3), Ok(1));
        let cyc = [(1, 2), (2, 3), (3, 4), (4, 1)];
        assert!(matches!(validate_orientation(&g, &cyc, 10), Err(Violation::Cycle(_))));
        let long = [(1, 2), (2, 3), (3, 4), (1, 4)];
        assert_eq!(
            validate_orientation(&g, &long, 3),
            Err(Violation::RadiusExceeded { length: 3, bound: 2 })
        );
    }

    #[test]
    fn augmenting_paths_on_four_path() {
        let g = path(4).unwrap();
        let m: BTreeSet<Edge> = [Edge(2, 3)].into_iter().collect();
        assert_eq!(augmenting_paths(&g, &m, 3), vec![vec![1, 2, 3, 4]]);
        assert!(augmenting_paths(&g, &m, 1).is_empty());
        assert_eq!(shortest_augmenting_path(&g, &m), Some(3));
        let perfect: BTreeSet<Edge> = [Edge(1, 2), Edge(3, 4)].into_iter().collect();
        assert_eq!(shortest_augmenting_path(&g, &perfect), None);
    }
}
