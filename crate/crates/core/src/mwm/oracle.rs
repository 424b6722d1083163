use std::collections::BTreeSet;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rustc_hash::FxHashMap as HashMap;

use super::{cycle_canonical_order, AugStructure, Kind, MwmContext, StageIndex};
use crate::coloring::{ColorSchedule, ColorView, Colorer};
use crate::error::{Error, Result};
use crate::graph::{Edge, ProbeSession, VertexId};
use crate::mis::{in_mis, ColorOriented, MisMemo};

type StructureId = u128;

#[derive(Debug, Clone, Copy)]
struct Neighbor {
    vertex: VertexId,
    /// `None` for a lightweight edge.
    class: Option<u32>,
    reverse_port: usize,
}

/// A structure through some edge together with the alternation pattern it
/// needs: bit `j` of `mask` says canonical edge `j` is matched.
#[derive(Debug)]
struct Shape {
    id: StructureId,
    kind: Kind,
    vertices: Rc<[VertexId]>,
    mask: u64,
    /// Canonical index of the edge whose candidate list holds this shape.
    at: usize,
}

impl Shape {
    fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let v = &self.vertices;
        let closing = (self.kind == Kind::Cycle).then(|| Edge::new(v[v.len() - 1], v[0]));
        v.windows(2).map(|w| Edge::new(w[0], w[1])).chain(closing)
    }

    fn matched(&self, j: usize) -> bool {
        self.mask >> j & 1 == 1
    }
}

/// Every gain at which an edge can change: the positive gains of all
/// structures through it, descending, with the shapes realising each gain.
struct Candidates {
    gains: Vec<BigInt>,
    ids: Vec<u32>,
    shapes: Vec<Rc<[Rc<Shape>]>>,
}

struct EdgeState {
    cand: Rc<Candidates>,
    /// `values[t]`: membership after the first `t + 1` of this edge's stages.
    values: Vec<bool>,
}

#[derive(Default)]
struct Stage {
    listings: HashMap<Edge, Rc<[StructureId]>>,
    structures: HashMap<StructureId, Rc<Shape>>,
    mis: Option<MisState>,
}

struct MisState {
    colorer: Colorer<StructureId>,
    memo: MisMemo<StructureId>,
    neighbors: HashMap<StructureId, Rc<[StructureId]>>,
}

/// A stage `(round, gain)` with the gain interned for hashing.
#[derive(Clone, Copy)]
struct At<'a> {
    round: u32,
    gid: u32,
    gain: &'a BigInt,
}

impl At<'_> {
    fn key(&self) -> (u32, u32) {
        (self.round, self.gid)
    }
}

/// Per-query state of the recursive weighted oracles.
///
/// An edge only changes at stages whose gain is one of its candidate gains,
/// so each edge evaluates just its own stages `(i, g)` for `g ∈ cand(e)`;
/// `O` at any other stage equals `O` at the latest candidate stage before it.
pub struct MwmOracle<'s, 'g> {
    session: &'s mut ProbeSession<'g>,
    ctx: &'s MwmContext,
    schedule: Rc<ColorSchedule>,
    adjacency: HashMap<VertexId, Rc<[Neighbor]>>,
    edges: HashMap<Edge, EdgeState>,
    gain_ids: HashMap<BigInt, u32>,
    stages: HashMap<(u32, u32), Stage>,
}

impl<'s, 'g> MwmOracle<'s, 'g> {
    pub fn new(session: &'s mut ProbeSession<'g>, ctx: &'s MwmContext) -> Self {
        MwmOracle {
            session,
            ctx,
            schedule: Rc::new(ctx.schedule.clone()),
            adjacency: HashMap::default(),
            edges: HashMap::default(),
            gain_ids: HashMap::default(),
            stages: HashMap::default(),
        }
    }

    fn intern(&mut self, gain: &BigInt) -> u32 {
        let next = self.gain_ids.len() as u32;
        *self.gain_ids.entry(gain.clone()).or_insert(next)
    }

    fn adjacent(&mut self, v: VertexId) -> Result<Rc<[Neighbor]>> {
        if let Some(a) = self.adjacency.get(&v) {
            return Ok(a.clone());
        }
        let a: Rc<[Neighbor]> = self
            .session
            .neighbors(v)?
            .iter()
            .map(|p| Neighbor {
                vertex: p.neighbor,
                class: self.ctx.disc.class_of(p.weight.unwrap_or_else(|| 1.into())),
                reverse_port: p.reverse_port,
            })
            .collect();
        self.adjacency.insert(v, a.clone());
        Ok(a)
    }

    /// Is `e` in the matching after `stage`?
    pub fn matched_at(&mut self, stage: &StageIndex, e: Edge) -> Result<bool> {
        match stage {
            StageIndex::Initial => Ok(false),
            StageIndex::At { round, gain } => {
                let cand = self.candidates(e)?;
                let count = (*round as usize - 1) * cand.gains.len() + cand.gains.partition_point(|c| c >= gain);
                self.value_after(e, count)
            }
        }
    }

    /// Is `e` in the matching just before stage `at`?
    fn before(&mut self, at: At<'_>, e: Edge) -> Result<bool> {
        let cand = self.candidates(e)?;
        let count = (at.round as usize - 1) * cand.gains.len() + cand.gains.partition_point(|c| c > at.gain);
        self.value_after(e, count)
    }

    fn value_after(&mut self, e: Edge, count: usize) -> Result<bool> {
        if count == 0 {
            return Ok(false);
        }
        loop {
            let state = &self.edges[&e];
            let done = state.values.len();
            if done >= count {
                return Ok(state.values[count - 1]);
            }
            let prev = done > 0 && state.values[done - 1];
            let cand = state.cand.clone();
            let width = cand.gains.len();
            let at = At {
                round: (done / width) as u32 + 1,
                gid: cand.ids[done % width],
                gain: &cand.gains[done % width],
            };
            let flip = self.stage_hits(at, e, Some((done % width, prev)))?;
            let values = &mut self.edges.get_mut(&e).expect("edge state exists").values;
            debug_assert_eq!(values.len(), done, "stages are evaluated in order");
            values.push(prev ^ flip);
        }
    }

    /// Does `e` lie on a structure of `P*_(round, gain)`?
    pub fn in_p_star(&mut self, round: u32, gain: &BigInt, e: Edge) -> Result<bool> {
        let gid = self.intern(gain);
        self.stage_hits(At { round, gid, gain }, e, None)
    }

    fn stage_hits(&mut self, at: At<'_>, e: Edge, own: Option<(usize, bool)>) -> Result<bool> {
        let listed = self.listing(at, e, own)?;
        for &p in listed.iter() {
            if self.structure_in_mis(at, p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn stage(&mut self, at: At<'_>) -> &mut Stage {
        let schedule = &self.schedule;
        self.stages.entry(at.key()).or_insert_with(|| Stage {
            mis: Some(MisState {
                colorer: Colorer::new(schedule.clone()),
                memo: MisMemo::new(),
                neighbors: HashMap::default(),
            }),
            ..Stage::default()
        })
    }

    /// Structures through `e` of gain exactly `at.gain` that are augmenting
    /// just before stage `at`, ascending by id. `own` carries the candidate
    /// index of the gain and `e`'s current status when already known.
    fn listing(&mut self, at: At<'_>, e: Edge, own: Option<(usize, bool)>) -> Result<Rc<[StructureId]>> {
        if let Some(l) = self.stage(at).listings.get(&e) {
            return Ok(l.clone());
        }
        let cand = self.candidates(e)?;
        let own = match own {
            Some(o) => Some(o),
            None => match cand.gains.binary_search_by(|c| at.gain.cmp(c)) {
                Ok(idx) => Some((idx, self.before(at, e)?)),
                Err(_) => None,
            },
        };
        let mut found = BTreeSet::new();
        if let Some((idx, status)) = own {
            for shape in cand.shapes[idx].iter() {
                if shape.matched(shape.at) == status && self.valid(at, shape)? {
                    found.insert(shape.id);
                    self.stage(at).structures.entry(shape.id).or_insert_with(|| shape.clone());
                }
            }
        }
        let listed: Rc<[StructureId]> = found.into_iter().collect();
        self.stage(at).listings.insert(e, listed.clone());
        Ok(listed)
    }

    fn valid(&mut self, at: At<'_>, shape: &Shape) -> Result<bool> {
        for (j, edge) in shape.edges().enumerate() {
            if j != shape.at && self.before(at, edge)? != shape.matched(j) {
                return Ok(false);
            }
        }
        if shape.kind == Kind::Path {
            let v = &shape.vertices;
            if !shape.matched(0) && !self.free(at, v[0])? {
                return Ok(false);
            }
            if !shape.matched(v.len() - 2) && !self.free(at, v[v.len() - 1])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn free(&mut self, at: At<'_>, x: VertexId) -> Result<bool> {
        for n in self.adjacent(x)?.iter() {
            if n.class.is_some() && self.before(at, Edge::new(x, n.vertex))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Neighbors of structure `p` in `H_at`, ascending by id.
    fn h_probe(&mut self, at: At<'_>, p: StructureId) -> Result<Rc<[StructureId]>> {
        let shape = self
            .stage(at)
            .structures
            .get(&p)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("structure {p} was never listed")))?;
        let mut out = BTreeSet::new();
        for &v in shape.vertices.iter() {
            for n in self.adjacent(v)?.iter() {
                if n.class.is_some() {
                    out.extend(self.listing(at, Edge::new(v, n.vertex), None)?.iter().copied());
                }
            }
        }
        out.remove(&p);
        Ok(out.into_iter().collect())
    }

    /// Public form of [`Self::h_probe`]: `p` need not be augmenting itself.
    pub fn h_probe_structure(&mut self, round: u32, gain: &BigInt, p: &AugStructure) -> Result<Vec<AugStructure>> {
        let at = At {
            round,
            gid: self.intern(gain),
            gain,
        };
        let canonical = match p.kind {
            Kind::Path => AugStructure::path(p.vertices.clone()),
            Kind::Cycle => AugStructure::cycle(p.vertices.clone()),
        };
        let closing = usize::from(canonical.kind == Kind::Cycle);
        let v = &canonical.vertices;
        let mut ports = Vec::new();
        for j in 0..v.len() - 1 + closing {
            let next = v[(j + 1) % v.len()];
            let port = self
                .adjacent(v[j])?
                .iter()
                .position(|n| n.vertex == next)
                .ok_or(Error::UnknownEdge(v[j], next))?;
            ports.push(port + 1);
        }
        let id = self.ctx.encoding.id(canonical.kind, v[0], &ports);
        let shape = Rc::new(Shape {
            id,
            kind: canonical.kind,
            vertices: canonical.vertices.clone().into(),
            mask: 0,
            at: 0,
        });
        self.stage(at).structures.entry(id).or_insert(shape);
        let neighbors = self.h_probe(at, id)?;
        let stage = self.stage(at);
        Ok(neighbors
            .iter()
            .map(|q| {
                let s = &stage.structures[q];
                AugStructure {
                    kind: s.kind,
                    vertices: s.vertices.to_vec(),
                }
            })
            .collect())
    }

    fn structure_in_mis(&mut self, at: At<'_>, p: StructureId) -> Result<bool> {
        let MisState {
            colorer,
            mut memo,
            neighbors,
        } = self.stage(at).mis.take().expect("stage MIS is never re-entered");
        let view = StageView {
            oracle: self,
            at,
            cache: neighbors,
        };
        let mut oriented = ColorOriented::new(view, colorer);
        let answer = in_mis(&mut oriented, &mut memo, p);
        let (view, colorer) = oriented.into_parts();
        let neighbors = view.cache;
        self.stage(at).mis = Some(MisState {
            colorer,
            memo,
            neighbors,
        });
        answer
    }

    fn candidates(&mut self, e: Edge) -> Result<Rc<Candidates>> {
        if let Some(s) = self.edges.get(&e) {
            return Ok(s.cand.clone());
        }
        let cand = Rc::new(self.enumerate(e)?);
        self.edges.insert(
            e,
            EdgeState {
                cand: cand.clone(),
                values: Vec::new(),
            },
        );
        Ok(cand)
    }

    /// All simple paths with at most `2k+1` edges and even cycles with at
    /// most `2k` edges through `e`, grouped by positive gain. The two
    /// alternation patterns of a structure have opposite gains, so each
    /// structure contributes at most once.
    fn enumerate(&mut self, e: Edge) -> Result<Candidates> {
        let adj = self.adjacent(e.0)?;
        let (i, n) = adj
            .iter()
            .enumerate()
            .find(|(_, n)| n.vertex == e.1)
            .ok_or(Error::UnknownEdge(e.0, e.1))?;
        let mut found = Vec::new();
        if let Some(class) = n.class {
            let mut walk = Walk {
                a: e.0,
                b: e.1,
                center: Step {
                    vertex: e.1,
                    class,
                    port_out: i + 1,
                    port_in: n.reverse_port,
                },
                center_gain: self.ctx.disc.scaled_weight(class).clone(),
                left: Vec::new(),
                right: Vec::new(),
                left_gain: vec![BigInt::zero()],
                right_gain: vec![BigInt::zero()],
                k: self.ctx.cfg.k() as usize,
                found: Vec::new(),
            };
            self.extend_right(&mut walk)?;
            found = walk.found;
        }
        found.sort_unstable_by(|x, y| y.0.cmp(&x.0));
        let mut gains = Vec::new();
        let mut ids = Vec::new();
        let mut shapes: Vec<Rc<[Rc<Shape>]>> = Vec::new();
        let mut group = Vec::new();
        for (idx, (gain, raw, e_matched)) in found.iter().enumerate() {
            group.push(Rc::new(self.shape(raw, *e_matched)));
            if found.get(idx + 1).is_none_or(|next| next.0 != *gain) {
                ids.push(self.intern(gain));
                gains.push(gain.clone());
                shapes.push(std::mem::take(&mut group).into());
            }
        }
        Ok(Candidates { gains, ids, shapes })
    }

    fn extend_right(&mut self, w: &mut Walk) -> Result<()> {
        let max_path = self.ctx.cfg.max_path_edges();
        let max_cycle = self.ctx.cfg.max_cycle_edges();
        let r = w.right.len();
        let end = w.right.last().map_or(w.b, |s| s.vertex);
        if r >= 2 && r % 2 == 0 && r + 2 <= max_cycle {
            let adj = self.adjacent(end)?;
            if let Some((i, n)) = adj.iter().enumerate().find(|(_, n)| n.vertex == w.a) {
                if let Some(class) = n.class {
                    w.close_cycle(
                        &self.ctx.disc,
                        Step {
                            vertex: w.a,
                            class,
                            port_out: i + 1,
                            port_in: n.reverse_port,
                        },
                    );
                }
            }
        }
        self.extend_left(w, max_path - 1 - r)?;
        if 1 + r == max_path {
            return Ok(());
        }
        for (i, n) in self.adjacent(end)?.iter().enumerate() {
            let Some(class) = n.class else { continue };
            if w.contains(n.vertex) {
                continue;
            }
            w.push(
                &self.ctx.disc,
                Side::Right,
                Step {
                    vertex: n.vertex,
                    class,
                    port_out: i + 1,
                    port_in: n.reverse_port,
                },
            );
            self.extend_right(w)?;
            w.pop(Side::Right);
        }
        Ok(())
    }

    fn extend_left(&mut self, w: &mut Walk, budget: usize) -> Result<()> {
        w.record_path();
        if budget == 0 {
            return Ok(());
        }
        let end = w.left.last().map_or(w.a, |s| s.vertex);
        for (i, n) in self.adjacent(end)?.iter().enumerate() {
            let Some(class) = n.class else { continue };
            if w.contains(n.vertex) {
                continue;
            }
            w.push(
                &self.ctx.disc,
                Side::Left,
                Step {
                    vertex: n.vertex,
                    class,
                    port_out: i + 1,
                    port_in: n.reverse_port,
                },
            );
            self.extend_left(w, budget - 1)?;
            w.pop(Side::Left);
        }
        Ok(())
    }

    /// Canonical shape of `raw`, whose edge `raw.center` is matched iff
    /// `e_matched` and whose other edges alternate around it.
    fn shape(&self, raw: &RawStructure, e_matched: bool) -> Shape {
        let len = raw.classes.len();
        let n = raw.vertices.len();
        let matched = |j: usize| (j.abs_diff(raw.center) % 2 == 1) != e_matched;
        // `order[c] = (raw position, raw edge of canonical edge c, forward)`.
        let order: Vec<(usize, usize, bool)> = match raw.kind {
            Kind::Path => {
                if raw.vertices[0] <= raw.vertices[n - 1] {
                    (0..n).map(|i| (i, i, true)).collect()
                } else {
                    (0..n).map(|i| (n - 1 - i, (n - 1 - i).wrapping_sub(1), false)).collect()
                }
            }
            Kind::Cycle => cycle_canonical_order(n, |i| raw.vertices[i])
                .into_iter()
                .map(|(i, fwd)| (i, if fwd { i } else { (i + n - 1) % n }, fwd))
                .collect(),
        };
        let mut vertices = Vec::with_capacity(n);
        let mut ports = Vec::with_capacity(len);
        let mut mask = 0u64;
        let mut at = 0;
        for (c, &(pos, edge, forward)) in order.iter().enumerate() {
            vertices.push(raw.vertices[pos]);
            if c < len {
                let (out, inn) = raw.ports[edge];
                ports.push(if forward { out } else { inn });
                if matched(edge) {
                    mask |= 1 << c;
                }
                if edge == raw.center {
                    at = c;
                }
            }
        }
        Shape {
            id: self.ctx.encoding.id(raw.kind, vertices[0], &ports),
            kind: raw.kind,
            vertices: vertices.into(),
            mask,
            at,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    vertex: VertexId,
    class: u32,
    /// Port at the previous vertex leading here.
    port_out: usize,
    /// Port here leading back.
    port_in: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// A structure in traversal order; edge `j` joins vertices `j` and `j+1`
/// (cyclically for cycles), `ports[j]` holds the ports at both ends and
/// `center` indexes the enumerating edge.
struct RawStructure {
    kind: Kind,
    vertices: Vec<VertexId>,
    classes: Vec<u32>,
    ports: Vec<(usize, usize)>,
    center: usize,
}

/// Depth-first state: `e = (a, b)` extended by `right` from `b` and `left`
/// from `a`. The gain stacks hold signed sums for the pattern in which `e`
/// is unmatched; an edge at distance `d` from `e` counts positively iff `d`
/// is even.
struct Walk {
    a: VertexId,
    b: VertexId,
    center: Step,
    center_gain: BigInt,
    left: Vec<Step>,
    right: Vec<Step>,
    left_gain: Vec<BigInt>,
    right_gain: Vec<BigInt>,
    k: usize,
    found: Vec<(BigInt, RawStructure, bool)>,
}

impl Walk {
    fn contains(&self, v: VertexId) -> bool {
        v == self.a || v == self.b || self.left.iter().chain(&self.right).any(|s| s.vertex == v)
    }

    fn push(&mut self, disc: &super::Discretization, side: Side, step: Step) {
        let (steps, sums) = match side {
            Side::Left => (&mut self.left, &mut self.left_gain),
            Side::Right => (&mut self.right, &mut self.right_gain),
        };
        let w = disc.scaled_weight(step.class);
        let last = sums.last().expect("stacks start non-empty");
        // The new edge is at distance `steps.len() + 1` from `e`.
        let next = if steps.len() % 2 == 1 { last + w } else { last - w };
        sums.push(next);
        steps.push(step);
    }

    fn pop(&mut self, side: Side) {
        match side {
            Side::Left => {
                self.left.pop();
                self.left_gain.pop();
            }
            Side::Right => {
                self.right.pop();
                self.right_gain.pop();
            }
        }
    }

    /// Picks the pattern with positive gain, if any, within the `k` limit on
    /// unmatched edges.
    fn pick(&self, gain: BigInt, even_edges: usize, odd_edges: usize) -> Option<(BigInt, bool)> {
        if gain.is_positive() && even_edges <= self.k {
            Some((gain, false))
        } else if gain.is_negative() && odd_edges <= self.k && odd_edges > 0 {
            Some((-gain, true))
        } else {
            None
        }
    }

    fn record_path(&mut self) {
        let (l, r) = (self.left.len(), self.right.len());
        let gain = &self.center_gain + &self.left_gain[l] + &self.right_gain[r];
        // Edges at even distance from `e` (including `e`) and at odd distance.
        let even = 1 + l / 2 + r / 2;
        let odd = l.div_ceil(2) + r.div_ceil(2);
        let Some((gain, e_matched)) = self.pick(gain, even, odd) else {
            return;
        };
        let mut vertices = Vec::with_capacity(l + r + 2);
        let mut classes = Vec::with_capacity(l + r + 1);
        let mut ports = Vec::with_capacity(l + r + 1);
        for s in self.left.iter().rev() {
            vertices.push(s.vertex);
            classes.push(s.class);
            ports.push((s.port_in, s.port_out));
        }
        vertices.extend([self.a, self.b]);
        classes.push(self.center.class);
        ports.push((self.center.port_out, self.center.port_in));
        for s in &self.right {
            vertices.push(s.vertex);
            classes.push(s.class);
            ports.push((s.port_out, s.port_in));
        }
        let raw = RawStructure {
            kind: Kind::Path,
            vertices,
            classes,
            ports,
            center: l,
        };
        self.found.push((gain, raw, e_matched));
    }

    /// Records the cycle `a, b, right..., a`; `closing` leads from the right
    /// end back to `a`.
    fn close_cycle(&mut self, disc: &super::Discretization, closing: Step) {
        let r = self.right.len();
        // The closing edge is at odd distance `r + 1`.
        let gain = &self.center_gain + &self.right_gain[r] - disc.scaled_weight(closing.class);
        let half = (r + 2) / 2;
        let Some((gain, e_matched)) = self.pick(gain, half, half) else {
            return;
        };
        let mut vertices = vec![self.a, self.b];
        let mut classes = vec![self.center.class];
        let mut ports = vec![(self.center.port_out, self.center.port_in)];
        for s in &self.right {
            vertices.push(s.vertex);
            classes.push(s.class);
            ports.push((s.port_out, s.port_in));
        }
        classes.push(closing.class);
        ports.push((closing.port_out, closing.port_in));
        let raw = RawStructure {
            kind: Kind::Cycle,
            vertices,
            classes,
            ports,
            center: 0,
        };
        self.found.push((gain, raw, e_matched));
    }
}

/// `H_at` as a probe-able view.
struct StageView<'o, 's, 'g, 'x> {
    oracle: &'o mut MwmOracle<'s, 'g>,
    at: At<'x>,
    cache: HashMap<StructureId, Rc<[StructureId]>>,
}

impl ColorView for StageView<'_, '_, '_, '_> {
    type Node = StructureId;

    fn node_id(&self, node: StructureId) -> u128 {
        node
    }

    fn neighbors(&mut self, node: StructureId) -> Result<Rc<[StructureId]>> {
        if let Some(n) = self.cache.get(&node) {
            return Ok(n.clone());
        }
        let n = self.oracle.h_probe(self.at, node)?;
        self.cache.insert(node, n.clone());
        Ok(n)
    }
}
