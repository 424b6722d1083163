//! Seeded graph generators. Generation is a pure function of the
//! [`CorpusSpec`]: vertex ids are `1..=n` in generation order and ports follow
//! edge generation order.

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, LabeledGraph, VertexId, Weight};

const PAIRING_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ring,
    Path,
    Grid { rows: usize, cols: usize },
    RandomRegular { degree: usize },
    DisjointEdges,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightModel {
    /// Unweighted graph.
    #[default]
    Unit,
    /// Weights `2^-t` for `t` uniform in `0..=3`.
    DiscretePowers,
    /// Weights `a/100` for `a` uniform in `1..=100`.
    UniformRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub family: Family,
    pub n: usize,
    pub weights: WeightModel,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        CorpusSpec {
            family,
            n,
            weights: WeightModel::Unit,
            seed,
        }
    }

    pub fn grid(rows: usize, cols: usize, seed: u64) -> Self {
        Self::new(Family::Grid { rows, cols }, rows * cols, seed)
    }

    pub fn with_weights(mut self, weights: WeightModel) -> Self {
        self.weights = weights;
        self
    }
}

impl fmt::Display for CorpusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::Ring => "ring".to_string(),
            Family::Path => "path".to_string(),
            Family::Grid { rows, cols } => format!("grid{rows}x{cols}"),
            Family::RandomRegular { degree } => format!("regular{degree}"),
            Family::DisjointEdges => "disjoint".to_string(),
        };
        let weights = match self.weights {
            WeightModel::Unit => "unit",
            WeightModel::DiscretePowers => "pow2",
            WeightModel::UniformRational => "rational",
        };
        write!(f, "{family}-n{}-{weights}-s{}", self.n, self.seed)
    }
}

pub fn generate(spec: &CorpusSpec) -> Result<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let edges: Vec<(VertexId, VertexId)> = match spec.family {
        Family::Ring => {
            if n < 3 {
                return Err(spec_error(spec, "a ring needs at least 3 vertices"));
            }
            (1..=n as u64).map(|v| (v, v % n as u64 + 1)).collect()
        }
        Family::Path => (1..n as u64).map(|v| (v, v + 1)).collect(),
        Family::Grid { rows, cols } => {
            if rows * cols != n {
                return Err(spec_error(spec, "grid size does not match n"));
            }
            grid_edges(rows, cols)
        }
        Family::DisjointEdges => {
            if n % 2 != 0 {
                return Err(spec_error(spec, "disjoint edges need an even n"));
            }
            (0..n as u64 / 2).map(|i| (2 * i + 1, 2 * i + 2)).collect()
        }
        Family::RandomRegular { degree } => random_regular(n, degree, &mut rng)
            .ok_or_else(|| spec_error(spec, "no simple regular graph found"))?,
    };
    let weighted = spec.weights != WeightModel::Unit;
    let edges = edges
        .into_iter()
        .map(|(u, v)| (u, v, draw_weight(spec.weights, &mut rng)))
        .collect();
    LabeledGraph::from_edges((1..=n as u64).collect(), edges, weighted)
}

fn spec_error(spec: &CorpusSpec, message: &str) -> Error {
    Error::InvalidParameter(format!("{spec}: {message}"))
}

fn grid_edges(rows: usize, cols: usize) -> Vec<(VertexId, VertexId)> {
    let id = |r: usize, c: usize| (r * cols + c + 1) as VertexId;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    edges
}

/// Configuration model with rejection of loops and parallel edges.
fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(VertexId, VertexId)>> {
    if (n * d) % 2 != 0 || (d >= n && d > 0) {
        return None;
    }
    let mut points: Vec<VertexId> = (1..=n as u64)
        .flat_map(|v| std::iter::repeat(v).take(d))
        .collect();
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        points.shuffle(rng);
        let mut seen = HashSet::with_capacity(points.len() / 2);
        let mut edges = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert(Edge::new(u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        return Some(edges);
    }
    None
}

fn draw_weight(model: WeightModel, rng: &mut ChaCha8Rng) -> Option<Weight> {
    match model {
        WeightModel::Unit => None,
        WeightModel::DiscretePowers => Some(Ratio::new(1, 1 << rng.gen_range(0..=3u32))),
        WeightModel::UniformRational => Some(Ratio::new(rng.gen_range(1..=100u64), 100)),
    }
}

pub fn ring(n: usize) -> Result<LabeledGraph> {
    generate(&CorpusSpec::new(Family::Ring, n, 0))
}

pub fn path(n: usize) -> Result<LabeledGraph> {
    generate(&CorpusSpec::new(Family::Path, n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::serialize_graph;

    #[test]
    fn ring_of_six() {
        let g = ring(6).unwrap();
        assert_eq!((g.n(), g.m(), g.max_degree()), (6, 6, 2));
    }

    #[test]
    fn disjoint_edges_form_a_perfect_matching() {
        let g = generate(&CorpusSpec::new(Family::DisjointEdges, 8, 0)).unwrap();
        assert_eq!((g.n(), g.m(), g.max_degree()), (8, 4, 1));
    }

    #[test]
    fn random_regular_is_reproducible() {
        let spec = CorpusSpec::new(Family::RandomRegular { degree: 3 }, 20, 7);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(serialize_graph(&a), serialize_graph(&b));
        assert!(a.vertices().iter().all(|&v| a.degree(v).unwrap() == 3));
        let other = generate(&CorpusSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(serialize_graph(&a), serialize_graph(&other));
    }

    #[test]
    fn odd_degree_sum_is_rejected() {
        let spec = CorpusSpec::new(Family::RandomRegular { degree: 3 }, 7, 1);
        assert!(matches!(generate(&spec), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn grid_three_by_three() {
        let g = generate(&CorpusSpec::grid(3, 3, 0)).unwrap();
        assert_eq!((g.n(), g.m(), g.max_degree()), (9, 12, 4));
    }

    #[test]
    fn weighted_models_stay_in_range() {
        for model in [WeightModel::DiscretePowers, WeightModel::UniformRational] {
            let spec = CorpusSpec::grid(3, 4, 5).with_weights(model);
            let g = generate(&spec).unwrap();
            assert!(g.is_weighted());
            for (_, w) in g.weighted_edges() {
                let w = w.unwrap();
                assert!(w > Ratio::from_integer(0) && w <= Ratio::from_integer(1));
            }
        }
    }
}
