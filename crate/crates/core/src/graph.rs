//! Explicit graphs, paths, worlds and evaluation states.
//!
//! Graphs are undirected: an edge `(u, v)` is traversable in both directions
//! under a single edge id. Edge ids are dense (`0..edge_count`), which lets
//! worlds and evaluation states be plain per-edge vectors.
//!
//! Length comparisons use an absolute tolerance of [`LENGTH_EPS`]. For
//! integer-valued lengths, `f64` sums are exact well past desk scale, so the
//! tolerance only matters for irrational (e.g. Euclidean) lengths.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Absolute tolerance for path-length comparisons.
pub const LENGTH_EPS: f64 = 1e-9;

/// Default cap on the number of paths the exhaustive enumerator may return.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// Smallest accepted edge length. Keeping lengths well above [`LENGTH_EPS`]
/// guarantees the tie-breaking walk in [`ExplicitGraph::shortest_path`]
/// makes strict progress.
pub const MIN_EDGE_LENGTH: f64 = 1e-6;

/// `a` is strictly shorter than `b` beyond the length tolerance.
pub fn strictly_shorter(a: f64, b: f64) -> bool {
    a < b - LENGTH_EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub length: f64,
}

/// An undirected graph with a fixed start/goal pair.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    edges: Vec<Edge>,
    start: VertexId,
    goal: VertexId,
    /// Adjacency per vertex, sorted by (neighbor id, edge id) so that every
    /// traversal is deterministic.
    adjacency: HashMap<VertexId, Vec<(VertexId, EdgeId)>>,
    /// Optional planar coordinates, used by obstacle rasterization.
    coords: HashMap<VertexId, (f64, f64)>,
    total_length: f64,
}

impl ExplicitGraph {
    /// Builds a graph and validates its invariants: dense edge ids, strictly
    /// positive lengths, endpoints that exist, and `start != goal`.
    pub fn new(
        vertices: Vec<VertexId>,
        edges: Vec<Edge>,
        start: VertexId,
        goal: VertexId,
    ) -> Result<Self> {
        let vertex_set: HashSet<VertexId> = vertices.iter().copied().collect();
        if vertex_set.len() != vertices.len() {
            return Err(Error::InvalidGraph("duplicate vertex id".into()));
        }
        if start == goal {
            return Err(Error::InvalidGraph("start and goal must differ".into()));
        }
        for &endpoint in &[start, goal] {
            if !vertex_set.contains(&endpoint) {
                return Err(Error::InvalidGraph(format!(
                    "start/goal vertex {endpoint} not in vertex set"
                )));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidGraph(format!(
                    "edge ids must be dense 0..{}; edge at index {i} has id {}",
                    edges.len(),
                    e.id
                )));
            }
            if !vertex_set.contains(&e.u) || !vertex_set.contains(&e.v) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} references missing vertex"
                )));
            }
            if !(e.length.is_finite() && e.length >= MIN_EDGE_LENGTH) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has non-positive or sub-tolerance length {}",
                    e.length
                )));
            }
        }

        let mut adjacency: HashMap<VertexId, Vec<(VertexId, EdgeId)>> =
            vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in &edges {
            adjacency.get_mut(&e.u).unwrap().push((e.v, e.id));
            if e.u != e.v {
                adjacency.get_mut(&e.v).unwrap().push((e.u, e.id));
            }
        }
        for list in adjacency.values_mut() {
            list.sort_unstable();
        }
        let total_length = edges.iter().map(|e| e.length).sum();

        Ok(Self {
            edges,
            start,
            goal,
            adjacency,
            coords: HashMap::new(),
            total_length,
        })
    }

    pub fn with_coords(mut self, coords: impl IntoIterator<Item = (VertexId, (f64, f64))>) -> Self {
        self.coords = coords.into_iter().collect();
        self
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn goal(&self) -> VertexId {
        self.goal
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        let mut ids: Vec<VertexId> = self.adjacency.keys().copied().collect();
        ids.sort_unstable();
        ids.into_iter()
    }

    pub fn coord(&self, v: VertexId) -> Option<(f64, f64)> {
        self.coords.get(&v).copied()
    }

    /// Finite sentinel used in place of an infinite detour length: an order
    /// of magnitude above the total edge mass, so no real path can reach it.
    pub fn delta_length_sentinel(&self) -> f64 {
        10.0 * self.total_length
    }

    /// Distance from every vertex to `target` over edges not in `removed`.
    /// Unreachable vertices are absent from the map.
    fn distances_to(&self, target: VertexId, removed: &HashSet<EdgeId>) -> HashMap<VertexId, f64> {
        #[derive(PartialEq)]
        struct Item {
            dist: f64,
            vertex: VertexId,
        }
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                // min-heap on (dist, vertex); dist is always finite
                other
                    .dist
                    .partial_cmp(&self.dist)
                    .unwrap()
                    .then_with(|| other.vertex.cmp(&self.vertex))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut dist: HashMap<VertexId, f64> = HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(target, 0.0);
        heap.push(Item {
            dist: 0.0,
            vertex: target,
        });
        while let Some(Item { dist: d, vertex: u }) = heap.pop() {
            if d > dist[&u] {
                continue;
            }
            for &(v, eid) in &self.adjacency[&u] {
                if removed.contains(&eid) {
                    continue;
                }
                let nd = d + self.edges[eid].length;
                if dist.get(&v).map_or(true, |&cur| nd < cur) {
                    dist.insert(v, nd);
                    heap.push(Item { dist: nd, vertex: v });
                }
            }
        }
        dist
    }

    /// Minimum-length start-to-goal path avoiding `removed` edges, or `None`
    /// when the goal is unreachable.
    ///
    /// Ties among equal-length paths are broken lexicographically on the
    /// vertex-id sequence (then edge id for parallel edges), so results are
    /// identical across platforms and runs.
    pub fn shortest_path(&self, removed: &HashSet<EdgeId>) -> Option<Path> {
        let dist = self.distances_to(self.goal, removed);
        let total = *dist.get(&self.start)?;

        // Walk the shortest-path DAG from the start, always taking the
        // smallest eligible (neighbor, edge). This yields the
        // lexicographically smallest vertex sequence among optimal paths.
        let mut vertices = vec![self.start];
        let mut edge_ids = Vec::new();
        let mut length = 0.0;
        let mut u = self.start;
        let step_cap = self.adjacency.len() + 1;
        for _ in 0..step_cap {
            if u == self.goal {
                return Some(Path {
                    vertices,
                    edges: edge_ids,
                    length: total,
                });
            }
            let du = dist[&u];
            let mut next: Option<(VertexId, EdgeId)> = None;
            for &(v, eid) in &self.adjacency[&u] {
                if removed.contains(&eid) {
                    continue;
                }
                if let Some(&dv) = dist.get(&v) {
                    if (du - (self.edges[eid].length + dv)).abs() <= LENGTH_EPS {
                        next = Some((v, eid));
                        break; // adjacency is sorted; first hit is smallest
                    }
                }
            }
            let (v, eid) = next.expect("shortest-path walk must progress toward the goal");
            length += self.edges[eid].length;
            vertices.push(v);
            edge_ids.push(eid);
            u = v;
        }
        // Unreachable with positive edge lengths; tolerated lengths are
        // bounded away from LENGTH_EPS by construction.
        unreachable!("tie-break walk exceeded vertex count (length so far {length})")
    }

    /// All simple start-to-goal paths with length strictly below `bound`
    /// that avoid `removed`, each listed once, in DFS order.
    ///
    /// Errs with [`Error::PathCapExceeded`] when more than `cap` paths
    /// qualify; the graph is then too large for exhaustive reasoning.
    pub fn paths_shorter_than_capped(
        &self,
        bound: f64,
        removed: &HashSet<EdgeId>,
        cap: usize,
    ) -> Result<Vec<Path>> {
        // Admissible lower bound on remaining distance prunes the DFS
        // without affecting which paths qualify.
        let lb = self.distances_to(self.goal, removed);
        let mut out = Vec::new();
        if lb.get(&self.start).is_none() {
            return Ok(out);
        }

        struct Dfs<'g> {
            graph: &'g ExplicitGraph,
            removed: &'g HashSet<EdgeId>,
            lb: &'g HashMap<VertexId, f64>,
            bound: f64,
            cap: usize,
            on_path: HashSet<VertexId>,
            vertices: Vec<VertexId>,
            edges: Vec<EdgeId>,
        }
        impl Dfs<'_> {
            fn go(&mut self, u: VertexId, len: f64, out: &mut Vec<Path>) -> Result<()> {
                if u == self.graph.goal {
                    if out.len() >= self.cap {
                        return Err(Error::PathCapExceeded { cap: self.cap });
                    }
                    out.push(Path {
                        vertices: self.vertices.clone(),
                        edges: self.edges.clone(),
                        length: len,
                    });
                    return Ok(());
                }
                for &(v, eid) in &self.graph.adjacency[&u] {
                    if self.removed.contains(&eid) || self.on_path.contains(&v) {
                        continue;
                    }
                    let new_len = len + self.graph.edges[eid].length;
                    match self.lb.get(&v) {
                        Some(&rest) if strictly_shorter(new_len + rest, self.bound) => {}
                        _ => continue,
                    }
                    self.on_path.insert(v);
                    self.vertices.push(v);
                    self.edges.push(eid);
                    self.go(v, new_len, out)?;
                    self.edges.pop();
                    self.vertices.pop();
                    self.on_path.remove(&v);
                }
                Ok(())
            }
        }

        let mut dfs = Dfs {
            graph: self,
            removed,
            lb: &lb,
            bound,
            cap,
            on_path: HashSet::from([self.start]),
            vertices: vec![self.start],
            edges: Vec::new(),
        };
        dfs.go(self.start, 0.0, &mut out)?;
        Ok(out)
    }

    /// [`Self::paths_shorter_than_capped`] with the default cap.
    pub fn paths_shorter_than(&self, bound: f64, removed: &HashSet<EdgeId>) -> Result<Vec<Path>> {
        self.paths_shorter_than_capped(bound, removed, DEFAULT_PATH_CAP)
    }
}

/// A start-to-goal path: the vertex sequence, the edge ids joining
/// consecutive vertices, and the summed length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub length: f64,
}

impl Path {
    /// True iff every edge of the path is valid in `world`.
    pub fn feasible_in(&self, world: &World) -> bool {
        self.edges.iter().all(|&e| world.is_valid(e))
    }

    pub fn contains_edge(&self, edge: EdgeId) -> bool {
        self.edges.contains(&edge)
    }
}

/// A total assignment of every edge to valid (`true`) or invalid (`false`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct World {
    bits: Vec<bool>,
}

impl World {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn all_valid(n_edges: usize) -> Self {
        Self {
            bits: vec![true; n_edges],
        }
    }

    /// Builds a world in which exactly the listed edges are invalid.
    pub fn with_invalid(n_edges: usize, invalid: &[EdgeId]) -> Self {
        let mut bits = vec![true; n_edges];
        for &e in invalid {
            bits[e] = false;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_valid(&self, edge: EdgeId) -> bool {
        self.bits[edge]
    }

    pub fn invalid_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| i)
    }

    /// Encodes the world as a '0'/'1' string indexed by edge id.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::InvalidWorld(format!(
                        "unexpected character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(Self { bits })
    }
}

/// Evaluation status of a single edge during a search episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeMark {
    Unevaluated,
    Valid,
    Invalid,
}

/// The state of a search episode: one mark per edge. Marks only ever move
/// from `Unevaluated` to `Valid` or `Invalid`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalState {
    marks: Vec<EdgeMark>,
}

impl EvalState {
    pub fn new(n_edges: usize) -> Self {
        Self {
            marks: vec![EdgeMark::Unevaluated; n_edges],
        }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn mark(&self, edge: EdgeId) -> EdgeMark {
        self.marks[edge]
    }

    pub fn is_evaluated(&self, edge: EdgeId) -> bool {
        self.marks[edge] != EdgeMark::Unevaluated
    }

    /// Records an evaluation outcome. Re-marking an edge is a contract
    /// violation: outcomes are permanent.
    pub fn record(&mut self, edge: EdgeId, valid: bool) -> Result<()> {
        if self.is_evaluated(edge) {
            return Err(Error::ContractViolation(format!(
                "edge {edge} was already evaluated"
            )));
        }
        self.marks[edge] = if valid { EdgeMark::Valid } else { EdgeMark::Invalid };
        Ok(())
    }

    /// Reverts an edge to unevaluated. Backtracking helper for exhaustive
    /// solvers; episode semantics never un-evaluate.
    pub(crate) fn unrecord(&mut self, edge: EdgeId) {
        self.marks[edge] = EdgeMark::Unevaluated;
    }

    pub fn num_evaluated(&self) -> usize {
        self.marks
            .iter()
            .filter(|&&m| m != EdgeMark::Unevaluated)
            .count()
    }

    pub fn valid_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == EdgeMark::Valid)
            .map(|(i, _)| i)
    }

    pub fn invalid_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == EdgeMark::Invalid)
            .map(|(i, _)| i)
    }

    pub fn invalid_set(&self) -> HashSet<EdgeId> {
        self.invalid_edges().collect()
    }

    /// True iff every recorded outcome matches `world`.
    pub fn consistent_with(&self, world: &World) -> bool {
        self.marks.iter().enumerate().all(|(i, &m)| match m {
            EdgeMark::Unevaluated => true,
            EdgeMark::Valid => world.is_valid(i),
            EdgeMark::Invalid => !world.is_valid(i),
        })
    }

    /// Base-3 encoding of the marks; unique per state for up to 80 edges.
    pub fn encode(&self) -> u128 {
        assert!(self.marks.len() <= 80, "state encoding overflows past 80 edges");
        let mut code: u128 = 0;
        for &m in self.marks.iter().rev() {
            code = code * 3
                + match m {
                    EdgeMark::Unevaluated => 0,
                    EdgeMark::Valid => 1,
                    EdgeMark::Invalid => 2,
                };
        }
        code
    }

    /// Compact digest for traces: one character per edge,
    /// `u` / `v` / `i`.
    pub fn digest(&self) -> String {
        self.marks
            .iter()
            .map(|m| match m {
                EdgeMark::Unevaluated => 'u',
                EdgeMark::Valid => 'v',
                EdgeMark::Invalid => 'i',
            })
            .collect()
    }
}

/// Unevaluated edges of `path`, in path order.
pub fn unevaluated_on_path(path: &Path, state: &EvalState) -> Vec<EdgeId> {
    path.edges
        .iter()
        .copied()
        .filter(|&e| !state.is_evaluated(e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_corridor() -> ExplicitGraph {
        // start 0, goal 3; short corridor 0-1-3 (len 2), long corridor 0-2-3 (len 3)
        ExplicitGraph::new(
            vec![0, 1, 2, 3],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },
                Edge { id: 1, u: 1, v: 3, length: 1.0 },
                Edge { id: 2, u: 0, v: 2, length: 1.5 },
                Edge { id: 3, u: 2, v: 3, length: 1.5 },
            ],
            0,
            3,
        )
        .unwrap()
    }

    #[test]
    fn single_edge_graph() {
        let g = ExplicitGraph::new(
            vec![0, 1],
            vec![Edge { id: 0, u: 0, v: 1, length: 1.0 }],
            0,
            1,
        )
        .unwrap();
        let p = g.shortest_path(&HashSet::new()).unwrap();
        assert_eq!(p.vertices, vec![0, 1]);
        assert_eq!(p.edges, vec![0]);
        assert!((p.length - 1.0).abs() < 1e-12);
        assert!(g.shortest_path(&HashSet::from([0])).is_none());
    }

    #[test]
    fn rejects_bad_graphs() {
        let e = |id, u, v, length| Edge { id, u, v, length };
        assert!(ExplicitGraph::new(vec![0, 1], vec![e(0, 0, 1, 1.0)], 0, 0).is_err());
        assert!(ExplicitGraph::new(vec![0, 1], vec![e(1, 0, 1, 1.0)], 0, 1).is_err());
        assert!(ExplicitGraph::new(vec![0, 1], vec![e(0, 0, 2, 1.0)], 0, 1).is_err());
        assert!(ExplicitGraph::new(vec![0, 1], vec![e(0, 0, 1, 0.0)], 0, 1).is_err());
        assert!(ExplicitGraph::new(vec![0, 1], vec![e(0, 0, 1, -1.0)], 0, 1).is_err());
    }

    #[test]
    fn shortest_path_prefers_short_corridor_then_detours() {
        let g = two_corridor();
        let p = g.shortest_path(&HashSet::new()).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 3]);
        let p2 = g.shortest_path(&HashSet::from([0])).unwrap();
        assert_eq!(p2.vertices, vec![0, 2, 3]);
        assert!((p2.length - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lexicographic_tie_break() {
        // two equal-length corridors; tie must go to the smaller middle vertex
        let g = ExplicitGraph::new(
            vec![0, 1, 2, 9],
            vec![
                Edge { id: 0, u: 0, v: 2, length: 1.0 },
                Edge { id: 1, u: 2, v: 9, length: 1.0 },
                Edge { id: 2, u: 0, v: 1, length: 1.0 },
                Edge { id: 3, u: 1, v: 9, length: 1.0 },
            ],
            0,
            9,
        )
        .unwrap();
        let p = g.shortest_path(&HashSet::new()).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 9]);
    }

    #[test]
    fn feasibility_is_per_edge_conjunction() {
        let g = two_corridor();
        let p = g.shortest_path(&HashSet::new()).unwrap();
        assert!(p.feasible_in(&World::all_valid(4)));
        assert!(!p.feasible_in(&World::with_invalid(4, &[1])));
        assert!(p.feasible_in(&World::with_invalid(4, &[2])));
    }

    #[test]
    fn paths_shorter_than_bounds() {
        let g = two_corridor();
        // nothing strictly shorter than the optimum
        assert!(g.paths_shorter_than(2.0, &HashSet::new()).unwrap().is_empty());
        // both corridors sit below 3.5
        let all = g.paths_shorter_than(3.5, &HashSet::new()).unwrap();
        assert_eq!(all.len(), 2);
        // removal is respected
        let one = g.paths_shorter_than(3.5, &HashSet::from([0])).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].vertices, vec![0, 2, 3]);
    }

    #[test]
    fn parallel_two_edge_paths_both_enumerated() {
        let g = ExplicitGraph::new(
            vec![0, 1, 2, 3],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },
                Edge { id: 1, u: 1, v: 3, length: 1.0 },
                Edge { id: 2, u: 0, v: 2, length: 1.0 },
                Edge { id: 3, u: 2, v: 3, length: 1.0 },
            ],
            0,
            3,
        )
        .unwrap();
        let all = g.paths_shorter_than(2.5, &HashSet::new()).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let g = two_corridor();
        let err = g.paths_shorter_than_capped(10.0, &HashSet::new(), 1).unwrap_err();
        assert!(matches!(err, Error::PathCapExceeded { cap: 1 }));
    }

    #[test]
    fn eval_state_transitions() {
        let mut s = EvalState::new(3);
        s.record(1, true).unwrap();
        assert!(s.record(1, false).is_err());
        s.record(2, false).unwrap();
        assert_eq!(s.num_evaluated(), 2);
        assert_eq!(s.valid_edges().collect::<Vec<_>>(), vec![1]);
        assert_eq!(s.invalid_edges().collect::<Vec<_>>(), vec![2]);
        assert_eq!(s.digest(), "uvi");
        assert!(s.consistent_with(&World::new(vec![true, true, false])));
        assert!(!s.consistent_with(&World::all_valid(3)));
    }

    #[test]
    fn world_bit_strings_round_trip() {
        let w = World::with_invalid(5, &[0, 3]);
        assert_eq!(w.to_bit_string(), "01101");
        assert_eq!(World::from_bit_string("01101").unwrap(), w);
        assert!(World::from_bit_string("01x").is_err());
    }

    /// Independent brute-force enumerator used as the oracle for the
    /// shortest-path and enumeration tests below. No pruning, no shared
    /// code with the implementation.
    fn enumerate_all_simple_paths(g: &ExplicitGraph, removed: &HashSet<EdgeId>) -> Vec<Path> {
        fn rec(
            g: &ExplicitGraph,
            removed: &HashSet<EdgeId>,
            u: VertexId,
            visited: &mut Vec<VertexId>,
            edges: &mut Vec<EdgeId>,
            len: f64,
            out: &mut Vec<Path>,
        ) {
            if u == g.goal() {
                out.push(Path {
                    vertices: visited.clone(),
                    edges: edges.clone(),
                    length: len,
                });
                return;
            }
            for e in g.edges() {
                if removed.contains(&e.id) {
                    continue;
                }
                let next = if e.u == u {
                    Some(e.v)
                } else if e.v == u {
                    Some(e.u)
                } else {
                    None
                };
                if let Some(v) = next {
                    if visited.contains(&v) {
                        continue;
                    }
                    visited.push(v);
                    edges.push(e.id);
                    rec(g, removed, v, visited, edges, len + e.length, out);
                    edges.pop();
                    visited.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(
            g,
            removed,
            g.start(),
            &mut vec![g.start()],
            &mut Vec::new(),
            0.0,
            &mut out,
        );
        out
    }

    fn grid_graph(w: usize, h: usize) -> ExplicitGraph {
        let vid = |x: usize, y: usize| y * w + x;
        let vertices: Vec<VertexId> = (0..w * h).collect();
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push(Edge {
                        id: edges.len(),
                        u: vid(x, y),
                        v: vid(x + 1, y),
                        length: 1.0,
                    });
                }
                if y + 1 < h {
                    edges.push(Edge {
                        id: edges.len(),
                        u: vid(x, y),
                        v: vid(x, y + 1),
                        length: 1.0,
                    });
                }
            }
        }
        ExplicitGraph::new(vertices, edges, 0, w * h - 1).unwrap()
    }

    #[test]
    fn grid_shortest_path_matches_exhaustive_enumeration() {
        use rand::Rng;
        let g = grid_graph(4, 4);
        let mut rng = crate::rng::rng_from_seed(11);
        for _ in 0..40 {
            let mut removed = HashSet::new();
            while removed.len() < 5 {
                removed.insert(rng.gen_range(0..g.edge_count()));
            }
            let brute = enumerate_all_simple_paths(&g, &removed);
            let best = brute.iter().map(|p| p.length).fold(f64::INFINITY, f64::min);
            match g.shortest_path(&removed) {
                Some(p) => assert!((p.length - best).abs() <= LENGTH_EPS),
                None => assert!(brute.is_empty()),
            }
        }
    }

    #[test]
    fn grid_enumeration_matches_exhaustive_enumeration() {
        let g = grid_graph(3, 3);
        let removed = HashSet::new();
        for bound in [4.0, 6.0, 8.0] {
            let ours = g.paths_shorter_than(bound, &removed).unwrap();
            let brute: Vec<Path> = enumerate_all_simple_paths(&g, &removed)
                .into_iter()
                .filter(|p| strictly_shorter(p.length, bound))
                .collect();
            assert_eq!(ours.len(), brute.len(), "bound {bound}");
            let key = |p: &Path| p.vertices.clone();
            let mut a: Vec<_> = ours.iter().map(key).collect();
            let mut b: Vec<_> = brute.iter().map(key).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    proptest! {
        /// Removing more edges can never shorten the shortest path.
        #[test]
        fn removal_is_monotone(seed in 0u64..500) {
            use rand::Rng;
            let g = grid_graph(4, 3);
            let mut rng = crate::rng::rng_from_seed(seed);
            let mut removed: HashSet<EdgeId> = HashSet::new();
            let mut prev = g.shortest_path(&removed).map(|p| p.length);
            for _ in 0..6 {
                removed.insert(rng.gen_range(0..g.edge_count()));
                let cur = g.shortest_path(&removed).map(|p| p.length);
                match (prev, cur) {
                    (Some(a), Some(b)) => prop_assert!(b + LENGTH_EPS >= a),
                    (None, Some(_)) => prop_assert!(false, "path reappeared after removal"),
                    _ => {}
                }
                prev = cur;
            }
        }

        /// Enumeration output is exactly the strictly-shorter set.
        #[test]
        fn enumeration_is_exact(bound in 2.0f64..8.0, mask in 0u32..64) {
            let g = grid_graph(3, 3);
            let removed: HashSet<EdgeId> =
                (0..6).filter(|i| mask & (1 << i) != 0).map(|i| i * 2).collect();
            let ours = g.paths_shorter_than(bound, &removed).unwrap();
            for p in &ours {
                prop_assert!(strictly_shorter(p.length, bound));
                prop_assert!(p.edges.iter().all(|e| !removed.contains(e)));
            }
            let brute = enumerate_all_simple_paths(&g, &removed)
                .into_iter()
                .filter(|p| strictly_shorter(p.length, bound))
                .count();
            prop_assert_eq!(ours.len(), brute);
        }
    }
}
