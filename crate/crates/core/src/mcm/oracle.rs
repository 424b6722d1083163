use std::collections::BTreeSet;
use std::rc::Rc;

use rustc_hash::FxHashMap as HashMap;

use super::{canonical_path, encode_path, level_schedule, path_base, AugPath};
use crate::coloring::{ColorSchedule, ColorView, Colorer};
use crate::error::{Error, Result};
use crate::graph::{Edge, ProbeSession, VertexId};
use crate::mis::{in_mis, ColorOriented, MisMemo};

type PathId = u128;

/// Per-query state of the recursive oracles `O_i`, `A_i` and `probe(i, ·)`.
///
/// Every cache lives only as long as the oracle, which is created for a
/// single top-level query.
pub struct McmOracle<'s, 'g> {
    session: &'s mut ProbeSession<'g>,
    base: u128,
    adjacency: HashMap<VertexId, Rc<[VertexId]>>,
    levels: Vec<Level>,
}

struct Level {
    schedule: Rc<ColorSchedule>,
    matched: HashMap<Edge, bool>,
    listings: HashMap<Edge, Rc<[PathId]>>,
    paths: HashMap<PathId, Rc<[VertexId]>>,
    mis: Option<MisState>,
}

struct MisState {
    colorer: Colorer<PathId>,
    memo: MisMemo<PathId>,
    neighbors: HashMap<PathId, Rc<[PathId]>>,
}

impl<'s, 'g> McmOracle<'s, 'g> {
    pub fn new(session: &'s mut ProbeSession<'g>) -> Self {
        let base = path_base(&session.params());
        McmOracle {
            session,
            base,
            adjacency: HashMap::default(),
            levels: Vec::new(),
        }
    }

    fn level(&mut self, i: u32) -> Result<&mut Level> {
        let params = self.session.params();
        while self.levels.len() < i as usize {
            let next = self.levels.len() as u32 + 1;
            let schedule = Rc::new(level_schedule(next, &params)?);
            self.levels.push(Level {
                mis: Some(MisState {
                    colorer: Colorer::new(schedule.clone()),
                    memo: MisMemo::new(),
                    neighbors: HashMap::default(),
                }),
                schedule,
                matched: HashMap::default(),
                listings: HashMap::default(),
                paths: HashMap::default(),
            });
        }
        Ok(&mut self.levels[i as usize - 1])
    }

    pub fn schedule(&mut self, i: u32) -> Result<Rc<ColorSchedule>> {
        Ok(self.level(i)?.schedule.clone())
    }

    fn adjacent(&mut self, v: VertexId) -> Result<Rc<[VertexId]>> {
        if let Some(a) = self.adjacency.get(&v) {
            return Ok(a.clone());
        }
        let a: Rc<[VertexId]> = self.session.neighbors(v)?.iter().map(|p| p.neighbor).collect();
        self.adjacency.insert(v, a.clone());
        Ok(a)
    }

    /// `O_i(e)`: is `e ∈ M_i`?
    pub fn matched(&mut self, i: u32, e: Edge) -> Result<bool> {
        if i == 0 {
            return Ok(false);
        }
        if let Some(&m) = self.level(i)?.matched.get(&e) {
            return Ok(m);
        }
        let tau = self.matched(i - 1, e)?;
        let rho = self.in_p_star(i, e)?;
        self.level(i)?.matched.insert(e, tau ^ rho);
        Ok(tau ^ rho)
    }

    /// `A_i(e)`: does `e` lie on a path of `P*_i`?
    pub fn in_p_star(&mut self, i: u32, e: Edge) -> Result<bool> {
        let listed = self.list_edge(i, e)?;
        for &p in listed.iter() {
            if self.path_in_mis(i, p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn free(&mut self, j: u32, x: VertexId) -> Result<bool> {
        if j == 0 {
            return Ok(true);
        }
        for &y in self.adjacent(x)?.iter() {
            if self.matched(j, Edge::new(x, y))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `P_i(e)`: ids of the `M_{i-1}`-augmenting paths with `2i-1` edges
    /// through `e`, in ascending order.
    fn list_edge(&mut self, i: u32, e: Edge) -> Result<Rc<[PathId]>> {
        if let Some(l) = self.level(i)?.listings.get(&e) {
            return Ok(l.clone());
        }
        let len = 2 * i as usize - 1;
        let (a, b) = (e.0, e.1);
        let e_matched = self.matched(i - 1, e)?;
        let mut found = BTreeSet::new();
        // `left` edges precede `e`, which then sits at index `left`; edges at
        // odd indices are the matched ones.
        for left in 0..len {
            if e_matched != (left % 2 == 1) {
                continue;
            }
            let right = len - 1 - left;
            let rights = self.walks(i - 1, b, [a, b], right, (left + 1) % 2 == 1)?;
            if rights.is_empty() {
                continue;
            }
            let lefts = self.walks(i - 1, a, [a, b], left, left % 2 == 0)?;
            for l in &lefts {
                for r in &rights {
                    if l.iter().any(|v| r.contains(v)) {
                        continue;
                    }
                    let mut vertices: Vec<VertexId> = l.iter().rev().copied().collect();
                    vertices.extend([a, b]);
                    vertices.extend(r.iter().copied());
                    let (first, last) = (vertices[0], vertices[vertices.len() - 1]);
                    if self.free(i - 1, first)? && self.free(i - 1, last)? {
                        found.insert(self.register(i, canonical_path(vertices))?);
                    }
                }
            }
        }
        let listed: Rc<[PathId]> = found.into_iter().collect();
        self.level(i)?.listings.insert(e, listed.clone());
        Ok(listed)
    }

    fn register(&mut self, i: u32, vertices: Vec<VertexId>) -> Result<PathId> {
        let id = encode_path(&vertices, self.base)?;
        self.level(i)?.paths.entry(id).or_insert_with(|| vertices.into());
        Ok(id)
    }

    /// Simple walks of `steps` edges from `start` avoiding `avoid`, whose
    /// edges alternate between `M_j` and non-`M_j`, the first being matched
    /// iff `matched_first`. Returned without `start`.
    fn walks(
        &mut self,
        j: u32,
        start: VertexId,
        avoid: [VertexId; 2],
        steps: usize,
        matched_first: bool,
    ) -> Result<Vec<Vec<VertexId>>> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(steps);
        self.walk(j, start, &avoid, steps, matched_first, &mut current, &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        j: u32,
        at: VertexId,
        avoid: &[VertexId; 2],
        remaining: usize,
        want_matched: bool,
        current: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) -> Result<()> {
        if remaining == 0 {
            out.push(current.clone());
            return Ok(());
        }
        for &y in self.adjacent(at)?.iter() {
            if avoid.contains(&y) || current.contains(&y) {
                continue;
            }
            if self.matched(j, Edge::new(at, y))? != want_matched {
                continue;
            }
            current.push(y);
            self.walk(j, y, avoid, remaining - 1, !want_matched, current, out)?;
            current.pop();
        }
        Ok(())
    }

    fn path_vertices(&mut self, i: u32, p: PathId) -> Result<Rc<[VertexId]>> {
        self.level(i)?
            .paths
            .get(&p)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("path {p} was never listed at level {i}")))
    }

    /// `probe(i, p)`: every level-`i` path sharing a vertex with `p`, except
    /// `p` itself, ascending by id.
    fn h_probe(&mut self, i: u32, p: PathId) -> Result<Rc<[PathId]>> {
        let vertices = self.path_vertices(i, p)?;
        let mut out = BTreeSet::new();
        for &v in vertices.iter() {
            for &y in self.adjacent(v)?.iter() {
                out.extend(self.list_edge(i, Edge::new(v, y))?.iter().copied());
            }
        }
        out.remove(&p);
        Ok(out.into_iter().collect())
    }

    /// Public form of [`Self::h_probe`] over explicit paths.
    pub fn h_probe_path(&mut self, p: &AugPath) -> Result<Vec<AugPath>> {
        let i = p.level;
        if i == 0 || p.vertices.len() != 2 * i as usize {
            return Err(Error::InvalidParameter(format!("{p:?} is not a level-{i} path")));
        }
        let id = self.register(i, canonical_path(p.vertices.clone()))?;
        let neighbors = self.h_probe(i, id)?;
        neighbors
            .iter()
            .map(|&q| Ok(AugPath::new(i, self.path_vertices(i, q)?.to_vec())))
            .collect()
    }

    fn path_in_mis(&mut self, i: u32, p: PathId) -> Result<bool> {
        let MisState {
            colorer,
            mut memo,
            neighbors,
        } = self.level(i)?.mis.take().expect("level MIS is never re-entered");
        let view = LevelView {
            oracle: self,
            level: i,
            cache: neighbors,
        };
        let mut oriented = ColorOriented::new(view, colorer);
        let answer = in_mis(&mut oriented, &mut memo, p);
        let (view, colorer) = oriented.into_parts();
        let neighbors = view.cache;
        self.levels[i as usize - 1].mis = Some(MisState {
            colorer,
            memo,
            neighbors,
        });
        answer
    }
}

/// `H_i` as a probe-able view; each neighbor list is one `probe(i, p)`.
struct LevelView<'o, 's, 'g> {
    oracle: &'o mut McmOracle<'s, 'g>,
    level: u32,
    cache: HashMap<PathId, Rc<[PathId]>>,
}

impl ColorView for LevelView<'_, '_, '_> {
    type Node = PathId;

    fn node_id(&self, node: PathId) -> u128 {
        node
    }

    fn neighbors(&mut self, node: PathId) -> Result<Rc<[PathId]>> {
        if let Some(n) = self.cache.get(&node) {
            return Ok(n.clone());
        }
        let n = self.oracle.h_probe(self.level, node)?;
        self.cache.insert(node, n.clone());
        Ok(n)
    }
}
