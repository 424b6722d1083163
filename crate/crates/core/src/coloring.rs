//! Deterministic local vertex coloring by iterated palette reduction, and the
//! acyclic orientation it induces.
//!
//! Each reduction step maps a color `c < q^(d+1)` to the polynomial over
//! `GF(q)` whose coefficients are the base-`q` digits of `c`. A vertex picks
//! the smallest point `x` where its polynomial differs from every neighbor's
//! and takes `(x, f_c(x))` as its new color. Two distinct polynomials of degree
//! `≤ d` agree on at most `d` points, so with `q > Δ·d` such an `x` exists and
//! the new coloring is again proper, with `q²` colors.
//!
//! The schedule of `(q, d)` pairs depends only on `(Δ, id_bound)`, so every
//! vertex runs the same number of steps and the color of `v` is a function of
//! the radius-`rounds` ball around `v`.

use rustc_hash::FxHashMap;
use std::hash::Hash;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, ProbeSession, VertexId};

/// `palette_size(Δ, ·) ≤ PALETTE_CONSTANT · Δ² · log₂ Δ` for every `Δ ≥ 2`.
pub const PALETTE_CONSTANT: u64 = 7;

const MAX_POLY_DEGREE: u32 = 64;

pub type Color = u128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub modulus: u64,
    pub degree: u32,
}

impl ReductionStep {
    fn palette(&self) -> u128 {
        u128::from(self.modulus) * u128::from(self.modulus)
    }

    fn digits(&self, color: Color) -> Vec<u64> {
        let q = u128::from(self.modulus);
        let mut c = color;
        (0..=self.degree)
            .map(|_| {
                let digit = (c % q) as u64;
                c /= q;
                digit
            })
            .collect()
    }

    fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        let q = u128::from(self.modulus);
        coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &a| (acc * u128::from(x) + u128::from(a)) % q) as u64
    }

    /// One reduction round for a vertex of color `own` whose neighbors have
    /// colors `neighbors`.
    pub fn reduce(&self, own: Color, neighbors: &[Color]) -> Result<Color> {
        let mine = self.digits(own);
        let theirs: Vec<Vec<u64>> = neighbors.iter().map(|&c| self.digits(c)).collect();
        for x in 0..self.modulus {
            let y = self.eval(&mine, x);
            if theirs.iter().all(|f| self.eval(f, x) != y) {
                return Ok(u128::from(x) * u128::from(self.modulus) + u128::from(y));
            }
        }
        Err(Error::InvalidParameter(format!(
            "color {own} has no free evaluation point; the input coloring is not proper"
        )))
    }
}

/// The globally agreed reduction schedule for a degree bound and id bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorSchedule {
    max_degree: u64,
    initial_palette: u128,
    steps: Vec<ReductionStep>,
    palette: u128,
}

impl ColorSchedule {
    /// Colors start as ids in `[0, id_bound]`.
    pub fn new(max_degree: u64, id_bound: u128) -> Result<Self> {
        let initial_palette = id_bound
            .checked_add(1)
            .ok_or_else(|| Error::Resource("id bound overflows the color space".into()))?;
        if max_degree == 0 {
            return Ok(ColorSchedule {
                max_degree,
                initial_palette,
                steps: Vec::new(),
                palette: 1,
            });
        }
        let mut steps = Vec::new();
        let mut palette = initial_palette;
        while let Some(step) = best_step(max_degree, palette)? {
            if step.palette() >= palette {
                break;
            }
            palette = step.palette();
            steps.push(step);
        }
        Ok(ColorSchedule {
            max_degree,
            initial_palette,
            steps,
            palette,
        })
    }

    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    pub fn steps(&self) -> &[ReductionStep] {
        &self.steps
    }

    /// Number of communication rounds; the color of `v` depends only on the
    /// ball of this radius.
    pub fn rounds(&self) -> u32 {
        self.steps.len() as u32
    }

    /// Colors are always `< palette()`.
    pub fn palette(&self) -> u128 {
        self.palette
    }

    pub fn initial_palette(&self) -> u128 {
        self.initial_palette
    }
}

fn best_step(max_degree: u64, palette: u128) -> Result<Option<ReductionStep>> {
    let mut best: Option<ReductionStep> = None;
    for degree in 1..=MAX_POLY_DEGREE {
        let lower = max_degree
            .checked_mul(u64::from(degree))
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| Error::Resource(format!("degree bound {max_degree} too large")))?;
        if let Some(b) = best {
            if lower > b.modulus {
                break;
            }
        }
        let root = ceil_root(palette, degree + 1);
        let Ok(root) = u64::try_from(root) else {
            continue;
        };
        let q = next_prime(lower.max(root).max(2))
            .ok_or_else(|| Error::Resource("modulus exceeds 64 bits".into()))?;
        if best.map_or(true, |b| q < b.modulus) {
            best = Some(ReductionStep { modulus: q, degree });
        }
    }
    Ok(best)
}

/// `palette_size(Δ, id_bound)`: the exact number of colors the schedule ends
/// with.
pub fn palette_size(max_degree: u64, id_bound: u128) -> Result<u128> {
    Ok(ColorSchedule::new(max_degree, id_bound)?.palette())
}

/// Smallest `r` with `r^k ≥ m`.
fn ceil_root(m: u128, k: u32) -> u128 {
    if m <= 1 {
        return m;
    }
    let pow_at_least = |r: u128| r.checked_pow(k).map_or(true, |p| p >= m);
    let mut r = (m as f64).powf(1.0 / f64::from(k)) as u128;
    while r > 0 && pow_at_least(r - 1) {
        r -= 1;
    }
    while !pow_at_least(r) {
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn next_prime(from: u64) -> Option<u64> {
    (from..=u64::MAX).find(|&q| is_prime(q))
}

/// A probe-able graph whose nodes carry unique integer ids.
pub trait ColorView {
    type Node: Copy + Eq + Hash + Ord + std::fmt::Debug;

    fn node_id(&self, node: Self::Node) -> u128;

    /// Neighbors of `node`, sorted by node id.
    fn neighbors(&mut self, node: Self::Node) -> Result<Rc<[Self::Node]>>;
}

/// Evaluates the schedule on demand, memoizing per `(node, round)`. One
/// `Colorer` lives for one query.
#[derive(Debug)]
pub struct Colorer<N> {
    schedule: Rc<ColorSchedule>,
    memo: FxHashMap<(N, u32), Color>,
}

impl<N: Copy + Eq + Hash + std::fmt::Debug> Colorer<N> {
    pub fn new(schedule: Rc<ColorSchedule>) -> Self {
        Colorer {
            schedule,
            memo: FxHashMap::default(),
        }
    }

    pub fn schedule(&self) -> &ColorSchedule {
        &self.schedule
    }

    pub fn color<V: ColorView<Node = N>>(&mut self, view: &mut V, node: N) -> Result<Color> {
        if self.schedule.max_degree == 0 {
            return Ok(0);
        }
        self.color_at(view, node, self.schedule.rounds())
    }

    fn color_at<V: ColorView<Node = N>>(&mut self, view: &mut V, node: N, round: u32) -> Result<Color> {
        if round == 0 {
            return Ok(view.node_id(node));
        }
        if let Some(&c) = self.memo.get(&(node, round)) {
            return Ok(c);
        }
        let neighbors = view.neighbors(node)?;
        if neighbors.len() as u64 > self.schedule.max_degree {
            return Err(Error::Resource(format!(
                "node {node:?} has {} neighbors, above the agreed degree bound {}",
                neighbors.len(),
                self.schedule.max_degree
            )));
        }
        let own = self.color_at(view, node, round - 1)?;
        let mut theirs = Vec::with_capacity(neighbors.len());
        for &u in neighbors.iter() {
            theirs.push(self.color_at(view, u, round - 1)?);
        }
        let step = self.schedule.steps[round as usize - 1];
        let c = step.reduce(own, &theirs)?;
        self.memo.insert((node, round), c);
        Ok(c)
    }
}

/// Runs the schedule synchronously over an explicit graph. Node `i` has id
/// `ids[i]` and neighbors `adjacency[i]`.
pub fn color_all(schedule: &ColorSchedule, ids: &[u128], adjacency: &[Vec<usize>]) -> Result<Vec<Color>> {
    if schedule.max_degree == 0 {
        return Ok(vec![0; ids.len()]);
    }
    if let Some(nbrs) = adjacency.iter().find(|a| a.len() as u64 > schedule.max_degree) {
        return Err(Error::Resource(format!(
            "a node has {} neighbors, above the agreed degree bound {}",
            nbrs.len(),
            schedule.max_degree
        )));
    }
    let mut colors = ids.to_vec();
    for step in &schedule.steps {
        colors = adjacency
            .iter()
            .enumerate()
            .map(|(v, nbrs)| {
                let theirs: Vec<Color> = nbrs.iter().map(|&u| colors[u]).collect();
                step.reduce(colors[v], &theirs)
            })
            .collect::<Result<_>>()?;
    }
    Ok(colors)
}

/// Orientation rule: from the higher color to the lower, ties from the higher
/// id to the lower.
pub fn points_to(color_a: Color, id_a: u128, color_b: Color, id_b: u128) -> bool {
    (color_a, id_a) > (color_b, id_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationDecision {
    pub from: VertexId,
    pub to: VertexId,
}

/// The input graph itself as a [`ColorView`], probed through a session.
pub struct GraphView<'s, 'g> {
    session: &'s mut ProbeSession<'g>,
    cache: FxHashMap<VertexId, Rc<[VertexId]>>,
}

impl<'s, 'g> GraphView<'s, 'g> {
    pub fn new(session: &'s mut ProbeSession<'g>) -> Self {
        GraphView {
            session,
            cache: FxHashMap::default(),
        }
    }
}

impl ColorView for GraphView<'_, '_> {
    type Node = VertexId;

    fn node_id(&self, node: VertexId) -> u128 {
        u128::from(node)
    }

    fn neighbors(&mut self, node: VertexId) -> Result<Rc<[VertexId]>> {
        if let Some(n) = self.cache.get(&node) {
            return Ok(n.clone());
        }
        let mut ids: Vec<VertexId> = self.session.neighbors(node)?.iter().map(|p| p.neighbor).collect();
        ids.sort_unstable();
        let ids: Rc<[VertexId]> = ids.into();
        self.cache.insert(node, ids.clone());
        Ok(ids)
    }
}

/// The schedule used for the input graph.
pub fn graph_schedule(session: &ProbeSession<'_>) -> Result<ColorSchedule> {
    let p = session.params();
    ColorSchedule::new(p.max_degree as u64, u128::from(p.id_bound))
}

/// CLOCAL color of `v`.
pub fn color_vertex(session: &mut ProbeSession<'_>, v: VertexId) -> Result<Color> {
    let schedule = Rc::new(graph_schedule(session)?);
    let mut colorer = Colorer::new(schedule);
    colorer.color(&mut GraphView::new(session), v)
}

/// CLOCAL orientation of the edge `e`.
pub fn orient_edge(session: &mut ProbeSession<'_>, e: Edge) -> Result<OrientationDecision> {
    let schedule = Rc::new(graph_schedule(session)?);
    let mut colorer = Colorer::new(schedule);
    let mut view = GraphView::new(session);
    if !view.neighbors(e.0)?.contains(&e.1) {
        return Err(Error::UnknownEdge(e.0, e.1));
    }
    let ca = colorer.color(&mut view, e.0)?;
    let cb = colorer.color(&mut view, e.1)?;
    Ok(if points_to(ca, u128::from(e.0), cb, u128::from(e.1)) {
        OrientationDecision { from: e.0, to: e.1 }
    } else {
        OrientationDecision { from: e.1, to: e.0 }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use crate::corpus::ring;
    use crate::graph::{Anchor, LabeledGraph};
    use proptest::prelude::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn ceil_roots() {
        assert_eq!(ceil_root(27, 3), 3);
        assert_eq!(ceil_root(28, 3), 4);
        assert_eq!(ceil_root(1, 5), 1);
        assert_eq!(ceil_root(u128::MAX, 2), 1u128 << 64);
    }

    #[test]
    fn palette_without_edges_is_one() {
        assert_eq!(palette_size(0, 100).unwrap(), 1);
    }

    #[test]
    fn palette_for_rings() {
        // Fixed point for Δ = 2: q = 5, d = 2.
        let p = palette_size(2, 4096).unwrap();
        assert_eq!(p, 25);
        assert!(p >= 3);
    }

    #[test]
    fn palette_for_cubic_graphs() {
        let p = palette_size(3, 1 << 20).unwrap();
        assert_eq!(p, 49);
        assert!((p as f64) <= PALETTE_CONSTANT as f64 * 9.0 * 3f64.log2());
    }

    #[test]
    fn palette_bound_over_degrees() {
        for delta in 2..=200u64 {
            let p = palette_size(delta, 1 << 40).unwrap() as f64;
            let d = delta as f64;
            assert!(p <= PALETTE_CONSTANT as f64 * d * d * d.log2(), "Δ = {delta}");
        }
    }

    #[test]
    fn schedule_is_short_for_huge_ids() {
        let s = ColorSchedule::new(3, u128::MAX - 1).unwrap();
        assert!(s.rounds() <= 5, "{s:?}");
        assert_eq!(s.palette(), 49);
    }

    #[test]
    fn isolated_vertex_color_is_stable() {
        let g = LabeledGraph::from_edges(vec![1, 2, 3], vec![(1, 2, None)], false).unwrap();
        let c1 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(3)), 3).unwrap();
        let c2 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(3)), 3).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn single_edge_endpoints_differ() {
        let g = LabeledGraph::from_edges(vec![1, 2], vec![(1, 2, None)], false).unwrap();
        let c1 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(1)), 1).unwrap();
        let c2 = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(2)), 2).unwrap();
        assert_ne!(c1, c2);
    }

    #[test]
    fn sixty_four_ring_is_properly_colored() {
        let g = ring(64).unwrap();
        let palette = palette_size(2, 64 * 64).unwrap();
        let colors: HashMap<VertexId, Color> = g
            .vertices()
            .iter()
            .map(|&v| {
                let mut s = ProbeSession::new(&g, Anchor::Vertex(v));
                let c = color_vertex(&mut s, v).unwrap();
                let rounds = graph_schedule(&s).unwrap().rounds();
                assert!(s.stats().radius < rounds.max(1));
                (v, c)
            })
            .collect();
        for e in g.edges() {
            assert_ne!(colors[&e.0], colors[&e.1]);
        }
        assert!(colors.values().all(|&c| c < palette));
    }

    #[test]
    fn orientation_goes_from_high_to_low_color() {
        assert!(points_to(5, 1, 2, 2));
        assert!(!points_to(2, 2, 5, 1));
        let g = ring(6).unwrap();
        for e in g.edges() {
            let mut s = ProbeSession::new(&g, Anchor::Edge(e));
            let d = orient_edge(&mut s, e).unwrap();
            let cf = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(d.from)), d.from).unwrap();
            let ct = color_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(d.to)), d.to).unwrap();
            assert!(cf > ct);
        }
    }

    proptest! {
        #[test]
        fn reduction_preserves_properness(
            delta in 1u64..6,
            colors in proptest::collection::vec(0u128..1_000_000, 2..8),
        ) {
            let schedule = ColorSchedule::new(delta, 1_000_000).unwrap();
            prop_assume!(!schedule.steps().is_empty());
            let step = schedule.steps()[0];
            let own = colors[0];
            let others: Vec<Color> = colors[1..]
                .iter()
                .copied()
                .filter(|&c| c != own)
                .take(delta as usize)
                .collect();
            let mine = step.reduce(own, &others).unwrap();
            prop_assert!(mine < step.palette());
            // Each neighbor, reducing against a set that contains `own`, lands
            // on a different color.
            for &c in &others {
                let theirs = step.reduce(c, &[own]).unwrap();
                let mine_vs = step.reduce(own, &[c]).unwrap();
                prop_assert_ne!(theirs, mine_vs);
            }
        }

        #[test]
        fn palette_monotone_in_degree(delta in 1u64..300, bits in 4u32..100) {
            let id_bound = 1u128 << bits;
            prop_assert!(palette_size(delta, id_bound).unwrap() <= palette_size(delta + 1, id_bound).unwrap());
        }
    }
}
