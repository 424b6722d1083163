//! `(1-ε)`-approximate maximum weight matching.
//!
//! Weights are normalized by the (globally known) maximum weight, edges below
//! `ε/n` are dropped and the rest are rounded down to powers of `x = 1 - ε/3`.
//! The matching is improved in `L` rounds; round `i` walks the gain ladder in
//! decreasing order and at gain `g` flips a maximal vertex-disjoint set of
//! augmenting structures (alternating paths or cycles with at most `k`
//! unmatched edges) of gain exactly `g`.
//!
//! Gains are exact: weight class `t` contributes `N_t = num^t · den^(t0-t)`,
//! i.e. `x^t` scaled by `D = den^t0`.

mod global;
mod oracle;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coloring::ColorSchedule;
use crate::error::{Error, Result};
use crate::graph::{Edge, GraphParams, LabeledGraph, ProbeSession, VertexId, Weight};
use crate::verify::to_big;

pub use global::{global_apx_mwm, matching_at, GlobalMwm};
pub use oracle::MwmOracle;

/// Rounds: `L = ⌈C_L · (1/ε) · ln(1/ε)⌉`, at least 1.
pub const C_L: f64 = 1.0;

/// Largest number of `(A, B)` multiset pairs [`enumerate_gains`] evaluates.
pub const LADDER_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MwmConfig {
    eps: Ratio<u64>,
    k: u32,
    rounds: u32,
}

impl MwmConfig {
    /// `eps` must lie in `(0, 1)`.
    pub fn new(eps: Ratio<u64>) -> Result<Self> {
        if *eps.numer() == 0 || eps >= Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(format!("eps = {eps} is outside (0, 1)")));
        }
        let k = (3 * eps.denom()).div_ceil(*eps.numer());
        if k > 31 {
            return Err(Error::Resource(format!("eps = {eps} needs k = {k} > 31")));
        }
        let inv = *eps.denom() as f64 / *eps.numer() as f64;
        let rounds = ((C_L * inv * inv.ln()).ceil() as u32).max(1);
        Ok(MwmConfig {
            eps,
            k: k as u32,
            rounds,
        })
    }

    pub fn eps(&self) -> Ratio<u64> {
        self.eps
    }

    /// Structures have at most `k` unmatched edges.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// `L`.
    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn max_path_edges(&self) -> usize {
        2 * self.k as usize + 1
    }

    pub fn max_cycle_edges(&self) -> usize {
        2 * self.k as usize
    }
}

/// Exact weight preprocessing shared by every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discretization {
    eps: Ratio<u64>,
    n: usize,
    wmax: Weight,
    threshold: BigRational,
    powers: Vec<BigRational>,
    class_gain: Vec<BigInt>,
    scale: BigInt,
}

impl Discretization {
    pub fn new(cfg: &MwmConfig, n: usize, wmax: Weight) -> Result<Self> {
        if *wmax.numer() == 0 {
            return Err(Error::InvalidParameter("maximum weight must be positive".into()));
        }
        let eps = to_big(cfg.eps);
        let three = BigRational::from_integer(3.into());
        let x = BigRational::one() - &eps / three;
        let threshold = eps / BigRational::from_integer(n.max(1).into());
        let mut powers = vec![BigRational::one()];
        while powers[powers.len() - 1] > threshold {
            let next = &powers[powers.len() - 1] * &x;
            powers.push(next);
        }
        let t0 = powers.len() - 1;
        let (num, den) = (x.numer().clone(), x.denom().clone());
        let class_gain = (0..=t0)
            .map(|t| num.pow(t as u32) * den.pow((t0 - t) as u32))
            .collect();
        Ok(Discretization {
            eps: cfg.eps,
            n,
            wmax,
            threshold,
            powers,
            class_gain,
            scale: den.pow(t0 as u32),
        })
    }

    pub fn for_graph(cfg: &MwmConfig, g: &LabeledGraph) -> Result<Self> {
        let wmax = g
            .edges()
            .map(|e| g.weight_or_one(e))
            .max()
            .unwrap_or_else(|| Ratio::from_integer(1));
        Self::new(cfg, g.n(), wmax)
    }

    pub fn wmax(&self) -> Weight {
        self.wmax
    }

    /// Number of weight classes `W = t0 + 1`.
    pub fn classes(&self) -> usize {
        self.powers.len()
    }

    /// Exponent `t` with `x^t ≤ w/wmax < x^(t-1)`, or `None` for a
    /// lightweight edge.
    pub fn class_of(&self, w: Weight) -> Option<u32> {
        let w = to_big(w) / to_big(self.wmax);
        if w < self.threshold {
            return None;
        }
        self.powers.iter().position(|p| *p <= w).map(|t| t as u32)
    }

    /// Number of classes a graph whose normalized minimum weight is `wmin`
    /// can use.
    pub fn classes_down_to(&self, wmin: &BigRational) -> usize {
        self.powers
            .iter()
            .position(|p| p <= wmin)
            .map_or(self.classes(), |t| t + 1)
    }

    /// `x^t`.
    pub fn discrete_weight(&self, class: u32) -> &BigRational {
        &self.powers[class as usize]
    }

    /// `x^t · D`, an integer.
    pub fn scaled_weight(&self, class: u32) -> &BigInt {
        &self.class_gain[class as usize]
    }

    /// `D`.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn unscale(&self, scaled: &BigInt) -> BigRational {
        BigRational::new(scaled.clone(), self.scale.clone())
    }

    /// `ε/n`.
    pub fn threshold(&self) -> &BigRational {
        &self.threshold
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> Ratio<u64> {
        self.eps
    }
}

/// Kept edges with their weight classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedGraph {
    pub kept: Vec<(Edge, u32)>,
    pub dropped: Vec<Edge>,
    /// `max{ε/n, min_e w(e)/wmax}`.
    pub wmin: BigRational,
}

pub fn preprocess(g: &LabeledGraph, disc: &Discretization) -> DiscretizedGraph {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut wmin: Option<BigRational> = None;
    for e in g.edges() {
        let w = g.weight_or_one(e);
        let normalized = to_big(w) / to_big(disc.wmax);
        wmin = Some(wmin.map_or(normalized.clone(), |m| m.min(normalized)));
        match disc.class_of(w) {
            Some(t) => kept.push((e, t)),
            None => dropped.push(e),
        }
    }
    let wmin = wmin.map_or_else(|| disc.threshold.clone(), |m| m.max(disc.threshold.clone()));
    DiscretizedGraph { kept, dropped, wmin }
}

/// Exact scaled gain of a structure: unmatched weight minus matched weight.
pub fn gain(disc: &Discretization, classes: &[u32], matched: &[bool]) -> BigInt {
    classes
        .iter()
        .zip(matched)
        .fold(BigInt::zero(), |acc, (&t, &m)| {
            if m {
                acc - disc.scaled_weight(t)
            } else {
                acc + disc.scaled_weight(t)
            }
        })
}

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Number of multiset pairs `(A, B)` over `w` classes with `1 ≤ |A| ≤ k` and
/// `|B| ≤ min(|A| + 1, k + 1)`; an upper bound on the ladder size `T`.
pub fn ladder_bound(w: usize, k: u32) -> BigUint {
    let w = w as u64;
    let multisets = |size: u64| binomial(w + size - 1, size);
    (1..=u64::from(k))
        .map(|a| {
            let b_sum: BigUint = (0..=(a + 1).min(u64::from(k) + 1)).map(multisets).sum();
            multisets(a) * b_sum
        })
        .sum()
}

/// The gain ladder: every positive scaled gain, strictly decreasing.
pub fn enumerate_gains(disc: &Discretization, k: u32) -> Result<Vec<BigInt>> {
    enumerate_gains_for(disc, k, disc.classes())
}

/// The gain ladder over the first `classes` weight classes.
pub fn enumerate_gains_for(disc: &Discretization, k: u32, classes: usize) -> Result<Vec<BigInt>> {
    let classes = classes.min(disc.classes());
    let pairs = ladder_bound(classes, k);
    if pairs > BigUint::from(LADDER_CAP) {
        return Err(Error::Resource(format!(
            "gain ladder needs {pairs} multiset pairs, cap is {LADDER_CAP}"
        )));
    }
    let sums = |max: u32| -> Vec<Vec<BigInt>> {
        // sums[s] = sums of all multisets of size s.
        let mut by_size = vec![vec![BigInt::zero()]];
        for size in 1..=max as usize {
            let mut next = BTreeSet::new();
            multiset_sums(disc, classes, size, 0, BigInt::zero(), &mut next);
            by_size.push(next.into_iter().collect());
        }
        by_size
    };
    let a_sums = sums(k);
    let b_sums = sums(k + 1);
    let mut gains = BTreeSet::new();
    for a in 1..=k as usize {
        for b in 0..=(a + 1).min(k as usize + 1) {
            for sa in &a_sums[a] {
                for sb in &b_sums[b] {
                    let g = sa - sb;
                    if g.is_positive() {
                        gains.insert(g);
                    }
                }
            }
        }
    }
    Ok(gains.into_iter().rev().collect())
}

fn multiset_sums(
    disc: &Discretization,
    classes: usize,
    left: usize,
    from: usize,
    acc: BigInt,
    out: &mut BTreeSet<BigInt>,
) {
    if left == 0 {
        out.insert(acc);
        return;
    }
    for t in from..classes {
        multiset_sums(disc, classes, left - 1, t, &acc + &disc.class_gain[t], out);
    }
}

/// `T`: the exact ladder size when it can be enumerated, otherwise
/// [`ladder_bound`].
pub fn ladder_size(disc: &Discretization, k: u32) -> BigUint {
    let classes = disc.classes();
    ladder_size_for(disc, k, classes).unwrap_or_else(|_| ladder_bound(classes, k))
}

/// Exact ladder size over the first `classes` classes, if enumerable.
pub fn ladder_size_for(disc: &Discretization, k: u32, classes: usize) -> Result<BigUint> {
    enumerate_gains_for(disc, k, classes).map(|g| BigUint::from(g.len()))
}

/// `Δ(G_k)`: a structure has at most `2k+2` vertices; through a fixed vertex
/// there are at most `(ℓ+1)Δ^ℓ` paths with `ℓ` edges and `Δ^(c-1)` cycles
/// with `c` edges.
pub fn gk_degree_bound(k: u32, max_degree: usize) -> Result<u64> {
    let overflow = || Error::Resource(format!("degree bound of G_{k} overflows"));
    let d = max_degree as u64;
    let mut through_vertex: u64 = 0;
    for len in 1..=2 * k + 1 {
        let paths = d
            .checked_pow(len)
            .and_then(|p| p.checked_mul(u64::from(len) + 1))
            .ok_or_else(overflow)?;
        through_vertex = through_vertex.checked_add(paths).ok_or_else(overflow)?;
    }
    for len in (4..=2 * k).step_by(2) {
        let cycles = d.checked_pow(len - 1).ok_or_else(overflow)?;
        through_vertex = through_vertex.checked_add(cycles).ok_or_else(overflow)?;
    }
    through_vertex
        .checked_mul(2 * u64::from(k) + 2)
        .ok_or_else(overflow)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Path,
    Cycle,
}

/// A simple path or simple cycle in canonical form: paths start at the
/// smaller endpoint, cycles at their least rotation or reflection. Cycle
/// vertices are listed once; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AugStructure {
    pub kind: Kind,
    pub vertices: Vec<VertexId>,
}

impl AugStructure {
    pub fn path(vertices: Vec<VertexId>) -> Self {
        AugStructure {
            kind: Kind::Path,
            vertices: crate::mcm::canonical_path(vertices),
        }
    }

    pub fn cycle(vertices: Vec<VertexId>) -> Self {
        let order = cycle_canonical_order(vertices.len(), |i| vertices[i]);
        AugStructure {
            kind: Kind::Cycle,
            vertices: order.into_iter().map(|(i, _)| vertices[i]).collect(),
        }
    }

    /// Edges in sequence order.
    pub fn edges(&self) -> Vec<Edge> {
        let v = &self.vertices;
        let mut out: Vec<Edge> = v.windows(2).map(|w| Edge::new(w[0], w[1])).collect();
        if self.kind == Kind::Cycle {
            out.push(Edge::new(v[v.len() - 1], v[0]));
        }
        out
    }
}

impl fmt::Display for AugStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        match self.kind {
            Kind::Path => write!(f, "path[{}]", v.join("-")),
            Kind::Cycle => write!(f, "cycle[{}]", v.join("-")),
        }
    }
}

/// Canonical traversal of a cycle of length `c` with vertex `at(i)` at
/// position `i`: returns `(position, forward)` pairs, where `forward` says
/// whether the canonical edge leaving this position is the cycle edge
/// `i -> i+1`.
pub(crate) fn cycle_canonical_order(c: usize, at: impl Fn(usize) -> VertexId) -> Vec<(usize, bool)> {
    let start = (0..c).min_by_key(|&i| at(i)).expect("cycles are non-empty");
    let forward = at((start + 1) % c) < at((start + c - 1) % c);
    (0..c)
        .map(|j| {
            if forward {
                ((start + j) % c, true)
            } else {
                ((start + c - j) % c, false)
            }
        })
        .collect()
}

/// Node ids of `G_k`: kind, edge count, start vertex and the port sequence
/// along the canonical traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureEncoding {
    base: u128,
    port_base: u128,
    max_edges: u32,
}

impl StructureEncoding {
    pub fn new(params: &GraphParams, k: u32) -> Result<Self> {
        let enc = StructureEncoding {
            base: u128::from(params.id_bound) + 1,
            port_base: params.max_degree as u128 + 1,
            max_edges: 2 * k + 1,
        };
        enc.id_bound()?;
        Ok(enc)
    }

    /// Largest id any structure can get.
    pub fn id_bound(&self) -> Result<u128> {
        let overflow = || Error::Resource("structure ids overflow 128 bits".into());
        self.port_base
            .checked_pow(self.max_edges)
            .and_then(|p| p.checked_mul(self.base))
            .and_then(|p| p.checked_mul(2 * (u128::from(self.max_edges) + 1)))
            .map(|p| p - 1)
            .ok_or_else(overflow)
    }

    /// `ports[i]` is the port at vertex `i` of the canonical sequence leading
    /// to vertex `i + 1` (cyclically for cycles).
    pub fn id(&self, kind: Kind, start: VertexId, ports: &[usize]) -> u128 {
        let kind = match kind {
            Kind::Path => 0,
            Kind::Cycle => 1,
        };
        let head = (kind * (u128::from(self.max_edges) + 1) + ports.len() as u128) * self.base + u128::from(start);
        let mut tail = 0u128;
        for j in 0..self.max_edges as usize {
            tail = tail * self.port_base + ports.get(j).map_or(0, |&p| p as u128);
        }
        head * self.port_base.pow(self.max_edges) + tail
    }
}

/// Position in the stage order: rounds ascending, gains descending. `gain`
/// is scaled by [`Discretization::scale`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StageIndex {
    /// `(1, 0)`: the empty matching.
    Initial,
    At { round: u32, gain: BigInt },
}

impl StageIndex {
    pub fn at(round: u32, gain: BigInt) -> Self {
        StageIndex::At { round, gain }
    }
}

impl PartialOrd for StageIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StageIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use StageIndex::*;
        match (self, other) {
            (Initial, Initial) => std::cmp::Ordering::Equal,
            (Initial, At { .. }) => std::cmp::Ordering::Less,
            (At { .. }, Initial) => std::cmp::Ordering::Greater,
            (At { round: r1, gain: g1 }, At { round: r2, gain: g2 }) => r1.cmp(r2).then_with(|| g2.cmp(g1)),
        }
    }
}

/// Everything a vertex knows before the first probe.
#[derive(Debug, Clone)]
pub struct MwmContext {
    pub cfg: MwmConfig,
    pub disc: Discretization,
    pub params: GraphParams,
    pub encoding: StructureEncoding,
    pub schedule: ColorSchedule,
}

impl MwmContext {
    pub fn new(cfg: MwmConfig, params: GraphParams, wmax: Weight) -> Result<Self> {
        let encoding = StructureEncoding::new(&params, cfg.k)?;
        let schedule = ColorSchedule::new(gk_degree_bound(cfg.k, params.max_degree)?, encoding.id_bound()?)?;
        Ok(MwmContext {
            disc: Discretization::new(&cfg, params.n, wmax)?,
            cfg,
            params,
            encoding,
            schedule,
        })
    }

    pub fn for_graph(g: &LabeledGraph, eps: Ratio<u64>) -> Result<Self> {
        let cfg = MwmConfig::new(eps)?;
        let disc = Discretization::for_graph(&cfg, g)?;
        Self::new(cfg, g.params(), disc.wmax())
    }

    /// The last stage `(L, g_T)`.
    pub fn final_stage(&self) -> StageIndex {
        StageIndex::At {
            round: self.cfg.rounds,
            gain: BigInt::zero(),
        }
    }

    /// `ρ = palette - 1 + rounds` of the `G_k` schedule.
    pub fn orientation_radius(&self) -> BigUint {
        BigUint::from(self.schedule.palette() - 1) + self.schedule.rounds()
    }

    /// Sound probe-radius bound for the final oracle:
    /// `2k + L·T·(4k + ρ(2k+1))`.
    pub fn probe_radius_bound(&self) -> BigUint {
        let k = BigUint::from(self.cfg.k);
        let per_stage = BigUint::from(4u32) * &k + self.orientation_radius() * (BigUint::from(2u32) * &k + 1u32);
        BigUint::from(2u32) * k + BigUint::from(self.cfg.rounds) * ladder_size(&self.disc, self.cfg.k) * per_stage
    }
}

fn check_edge(session: &mut ProbeSession<'_>, e: Edge) -> Result<()> {
    if session.neighbors(e.0)?.iter().any(|p| p.neighbor == e.1) {
        Ok(())
    } else {
        Err(Error::UnknownEdge(e.0, e.1))
    }
}

/// Is `e ∈ M_stage`?
pub fn oracle_mwm(session: &mut ProbeSession<'_>, ctx: &MwmContext, stage: &StageIndex, e: Edge) -> Result<bool> {
    check_edge(session, e)?;
    MwmOracle::new(session, ctx).matched_at(stage, e)
}

/// Does `e` lie on a structure of `P*_stage`?
pub fn a_ij(session: &mut ProbeSession<'_>, ctx: &MwmContext, stage: &StageIndex, e: Edge) -> Result<bool> {
    check_edge(session, e)?;
    match stage {
        StageIndex::Initial => Ok(false),
        StageIndex::At { round, gain } => MwmOracle::new(session, ctx).in_p_star(*round, gain, e),
    }
}

/// Neighbors of `p` in `H_stage`, ascending by id.
pub fn h_probe_w(
    session: &mut ProbeSession<'_>,
    ctx: &MwmContext,
    stage: &StageIndex,
    p: &AugStructure,
) -> Result<Vec<AugStructure>> {
    match stage {
        StageIndex::Initial => Err(Error::InvalidParameter("the initial stage has no structures".into())),
        StageIndex::At { round, gain } => MwmOracle::new(session, ctx).h_probe_structure(*round, gain, p),
    }
}

/// Membership of `e` in the final matching `M_{L,T}`.
pub fn apx_mwm_query(session: &mut ProbeSession<'_>, ctx: &MwmContext, e: Edge) -> Result<bool> {
    oracle_mwm(session, ctx, &ctx.final_stage(), e)
}

/// Scaled gain as an exact rational in `(0, k]`.
pub fn gain_value(ctx: &MwmContext, scaled: &BigInt) -> BigRational {
    ctx.disc.unscale(scaled)
}

pub fn gain_to_f64(ctx: &MwmContext, scaled: &BigInt) -> f64 {
    gain_value(ctx, scaled).to_f64().unwrap_or(f64::NAN)
}
