//! World distributions: two small hand-built environments with explicit
//! support, and seedable 2D-grid obstacle generators for benchmark-scale
//! datasets.
//!
//! Every distribution is immutable; sampling takes an explicit seed, so
//! concurrent use is race-free and runs reproduce bit-for-bit.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, ExplicitGraph, VertexId, World};
use crate::rng::{child_seed, rng_from_seed};

/// Probabilities of an explicit support must sum to 1 within this.
pub const PROB_EPS: f64 = 1e-12;

/// A distribution over worlds for a fixed graph: either an explicit,
/// enumerable support or a parameterized obstacle sampler.
#[derive(Debug, Clone)]
pub struct WorldDistribution {
    graph: Arc<ExplicitGraph>,
    kind: DistKind,
}

#[derive(Debug, Clone)]
enum DistKind {
    Explicit(Vec<(World, f64)>),
    Sampler(GridSampler),
}

#[derive(Debug, Clone)]
struct GridSampler {
    kind: DatasetKind,
    grid_size: usize,
}

impl WorldDistribution {
    pub fn explicit(graph: Arc<ExplicitGraph>, support: Vec<(World, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Config("explicit support must be nonempty".into()));
        }
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_EPS {
            return Err(Error::Config(format!(
                "support probabilities sum to {total}, not 1"
            )));
        }
        for (w, p) in &support {
            if w.len() != graph.edge_count() {
                return Err(Error::InvalidWorld(format!(
                    "support world has {} bits, graph has {} edges",
                    w.len(),
                    graph.edge_count()
                )));
            }
            if *p < 0.0 {
                return Err(Error::Config("negative support probability".into()));
            }
        }
        Ok(Self {
            graph,
            kind: DistKind::Explicit(support),
        })
    }

    /// Uniform empirical distribution over a list of worlds (duplicates act
    /// as multiplicity).
    pub fn uniform_over(graph: Arc<ExplicitGraph>, worlds: Vec<World>) -> Result<Self> {
        let p = 1.0 / worlds.len() as f64;
        // renormalize the last entry so rounding never violates PROB_EPS
        let n = worlds.len();
        let mut support: Vec<(World, f64)> = worlds.into_iter().map(|w| (w, p)).collect();
        if n > 0 {
            let partial: f64 = p * (n as f64 - 1.0);
            support.last_mut().unwrap().1 = 1.0 - partial;
        }
        Self::explicit(graph, support)
    }

    /// A sampler-backed distribution over obstacle worlds on an
    /// eight-connected grid.
    pub fn grid_sampler(kind: DatasetKind, grid_size: usize) -> Result<Self> {
        if grid_size < 4 {
            return Err(Error::Config("grid_size must be at least 4".into()));
        }
        Ok(Self {
            graph: Arc::new(eight_connected_grid(grid_size)),
            kind: DistKind::Sampler(GridSampler { kind, grid_size }),
        })
    }

    pub fn graph(&self) -> &Arc<ExplicitGraph> {
        &self.graph
    }

    /// The explicit support, or an error for sampler-backed distributions.
    pub fn enumerate_support(&self) -> Result<&[(World, f64)]> {
        match &self.kind {
            DistKind::Explicit(support) => Ok(support),
            DistKind::Sampler(_) => Err(Error::Unsupported(
                "cannot enumerate the support of a sampler-backed distribution".into(),
            )),
        }
    }

    /// Draws one world. A fixed seed always yields the same world.
    pub fn sample_world(&self, seed: u64) -> World {
        match &self.kind {
            DistKind::Explicit(support) => {
                let u: f64 = rng_from_seed(seed).gen();
                let mut acc = 0.0;
                for (w, p) in support {
                    acc += p;
                    if u < acc {
                        return w.clone();
                    }
                }
                support.last().unwrap().0.clone()
            }
            DistKind::Sampler(s) => {
                let mut rng = rng_from_seed(seed);
                let obstacles = s.kind.sample_obstacles(s.grid_size, &mut rng);
                rasterize(&self.graph, &obstacles)
            }
        }
    }

    /// Exact per-edge invalidity marginals (explicit support only).
    pub fn marginal_invalidity(&self) -> Result<Vec<f64>> {
        let support = self.enumerate_support()?;
        let n = self.graph.edge_count();
        let mut m = vec![0.0; n];
        for (w, p) in support {
            for e in 0..n {
                if !w.is_valid(e) {
                    m[e] += p;
                }
            }
        }
        Ok(m)
    }
}

/// Edge ids of the three-corridor environment built by
/// [`env1_distribution`].
pub mod env1_edges {
    use crate::graph::EdgeId;
    pub const TOP_LEFT: EdgeId = 0;
    pub const TOP_RIGHT: EdgeId = 1;
    pub const MIDDLE_LEFT: EdgeId = 2;
    pub const MIDDLE_RIGHT: EdgeId = 3;
    pub const BOTTOM_LEFT: EdgeId = 4;
    pub const BOTTOM_RIGHT: EdgeId = 5;
}

/// Edge ids of the four-corridor environment built by
/// [`env2_distribution`].
pub mod env2_edges {
    use crate::graph::EdgeId;
    pub const TOP_LEFT: EdgeId = 0;
    pub const TOP_RIGHT: EdgeId = 1;
    pub const MIDDLE_LEFT: EdgeId = 2;
    pub const MIDDLE_RIGHT: EdgeId = 3;
    pub const BOTTOM_LEFT: EdgeId = 4;
    pub const BOTTOM_RIGHT: EdgeId = 5;
    pub const FOURTH_LEFT: EdgeId = 6;
    pub const FOURTH_RIGHT: EdgeId = 7;
}

/// `corridors` parallel two-edge start-to-goal paths with unit edges.
/// Corridor `i` uses edges `2i` (left half) and `2i + 1` (right half).
fn parallel_corridors(corridors: usize) -> ExplicitGraph {
    let goal = corridors + 1;
    let vertices: Vec<VertexId> = (0..=goal).collect();
    let mut edges = Vec::with_capacity(2 * corridors);
    for i in 0..corridors {
        edges.push(Edge { id: 2 * i, u: 0, v: i + 1, length: 1.0 });
        edges.push(Edge { id: 2 * i + 1, u: i + 1, v: goal, length: 1.0 });
    }
    ExplicitGraph::new(vertices, edges, 0, goal).unwrap()
}

/// Three parallel corridors (6 edges) with correlated failures:
///
/// - 70%: `top_left` and `middle_right` invalid, all else valid.
/// - 30%: `top_left` valid; within that, 50% all edges valid, and 50%
///   `top_right` invalid plus exactly one of the remaining four edges
///   invalid (uniform over the four).
pub fn env1_distribution() -> WorldDistribution {
    use env1_edges::*;
    let graph = Arc::new(parallel_corridors(3));
    let n = graph.edge_count();
    let mut support = vec![(World::with_invalid(n, &[TOP_LEFT, MIDDLE_RIGHT]), 0.70)];
    for other in [MIDDLE_LEFT, MIDDLE_RIGHT, BOTTOM_LEFT, BOTTOM_RIGHT] {
        support.push((World::with_invalid(n, &[TOP_RIGHT, other]), 0.30 * 0.5 / 4.0));
    }
    support.push((World::all_valid(n), 0.30 * 0.5));
    WorldDistribution::explicit(graph, support).unwrap()
}

/// Four parallel corridors (8 edges) with two failure modes:
///
/// - 60%: `top_left`, `middle_right` and `bottom_left` invalid.
/// - 40%: `top_right` and `middle_right` invalid.
pub fn env2_distribution() -> WorldDistribution {
    use env2_edges::*;
    let graph = Arc::new(parallel_corridors(4));
    let n = graph.edge_count();
    let support = vec![
        (World::with_invalid(n, &[TOP_LEFT, MIDDLE_RIGHT, BOTTOM_LEFT]), 0.60),
        (World::with_invalid(n, &[TOP_RIGHT, MIDDLE_RIGHT]), 0.40),
    ];
    WorldDistribution::explicit(graph, support).unwrap()
}

/// Obstacle layout families for generated grid datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    OneWall,
    TwoWall,
    Forest,
    Gate,
    Maze,
    Baffle,
    Bugtrap,
    Blob,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 8] = [
        DatasetKind::OneWall,
        DatasetKind::TwoWall,
        DatasetKind::Forest,
        DatasetKind::Gate,
        DatasetKind::Maze,
        DatasetKind::Baffle,
        DatasetKind::Bugtrap,
        DatasetKind::Blob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::OneWall => "onewall",
            DatasetKind::TwoWall => "twowall",
            DatasetKind::Forest => "forest",
            DatasetKind::Gate => "gate",
            DatasetKind::Maze => "maze",
            DatasetKind::Baffle => "baffle",
            DatasetKind::Bugtrap => "bugtrap",
            DatasetKind::Blob => "blob",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Samples one obstacle layout in the coordinate square
    /// `[0, grid_size - 1]^2`. Obstacles never cover the start or goal
    /// vertex, so worlds stay feasible unless walls close completely.
    fn sample_obstacles(self, grid_size: usize, rng: &mut impl Rng) -> Vec<Obstacle> {
        let w = (grid_size - 1) as f64; // coordinate extent
        let mid = w / 2.0;
        let mut obstacles = Vec::new();
        match self {
            DatasetKind::OneWall => {
                let x = rng.gen_range(0.25 * w..0.75 * w);
                wall_with_gaps(x, w, &[rng.gen_range(1.0..w - 1.0)], 0.9, &mut obstacles);
            }
            DatasetKind::TwoWall => {
                let x1 = rng.gen_range(0.18 * w..0.38 * w);
                let x2 = rng.gen_range(0.62 * w..0.82 * w);
                wall_with_gaps(x1, w, &[rng.gen_range(1.0..w - 1.0)], 0.9, &mut obstacles);
                wall_with_gaps(x2, w, &[rng.gen_range(1.0..w - 1.0)], 0.9, &mut obstacles);
            }
            DatasetKind::Forest => {
                let lambda = 0.12 * (grid_size * grid_size) as f64;
                let count = poisson(lambda, rng);
                for _ in 0..count {
                    let side = rng.gen_range(0.5..1.2);
                    let cx = rng.gen_range(0.0..w);
                    let cy = rng.gen_range(0.0..w);
                    obstacles.push(Obstacle::centered(cx, cy, side, side));
                }
            }
            DatasetKind::Gate => {
                // fixed wall column; 1-3 randomly placed gaps
                let n_gaps = rng.gen_range(1..=3usize);
                let gaps: Vec<f64> = (0..n_gaps)
                    .map(|_| rng.gen_range(1.0..w - 1.0))
                    .collect();
                let half = rng.gen_range(0.7..1.1);
                wall_with_gaps(mid, w, &gaps, half, &mut obstacles);
            }
            DatasetKind::Maze => {
                let n_walls = rng.gen_range(2..=4usize);
                for i in 0..n_walls {
                    let x = w * (i + 1) as f64 / (n_walls + 1) as f64;
                    wall_with_gaps(x, w, &[rng.gen_range(1.0..w - 1.0)], 0.9, &mut obstacles);
                }
            }
            DatasetKind::Baffle => {
                // serpentine: walls alternately anchored bottom / top
                for (i, frac) in [0.25, 0.5, 0.75].iter().enumerate() {
                    let x = frac * w;
                    let len = rng.gen_range(0.55..0.8) * w;
                    let rect = if i % 2 == 0 {
                        Obstacle::new(x - 0.25, -0.5, x + 0.25, len - 0.5)
                    } else {
                        Obstacle::new(x - 0.25, w - len + 0.5, x + 0.25, w + 0.5)
                    };
                    obstacles.push(rect);
                }
            }
            DatasetKind::Bugtrap => {
                let half = rng.gen_range(0.18 * w..0.28 * w);
                let (cx, cy) = (mid + rng.gen_range(-0.08 * w..0.08 * w), mid);
                let t = 0.5; // wall thickness
                let opening = rng.gen_range(1.2..2.0);
                // closed box minus an opening on the left or right side
                let open_right = rng.gen::<bool>();
                obstacles.push(Obstacle::new(cx - half, cy - half, cx + half, cy - half + t)); // bottom
                obstacles.push(Obstacle::new(cx - half, cy + half - t, cx + half, cy + half)); // top
                let side = |x0: f64, x1: f64, obstacles: &mut Vec<Obstacle>, open: bool| {
                    if open {
                        obstacles.push(Obstacle::new(x0, cy - half, x1, cy - opening / 2.0));
                        obstacles.push(Obstacle::new(x0, cy + opening / 2.0, x1, cy + half));
                    } else {
                        obstacles.push(Obstacle::new(x0, cy - half, x1, cy + half));
                    }
                };
                side(cx - half, cx - half + t, &mut obstacles, !open_right);
                side(cx + half - t, cx + half, &mut obstacles, open_right);
            }
            DatasetKind::Blob => {
                let n_blobs = rng.gen_range(2..=4usize);
                for _ in 0..n_blobs {
                    let cx = rng.gen_range(0.15 * w..0.85 * w);
                    let cy = rng.gen_range(0.15 * w..0.85 * w);
                    let pieces = rng.gen_range(3..=6usize);
                    for _ in 0..pieces {
                        let side = rng.gen_range(0.8..1.6);
                        let dx = rng.gen_range(-1.0..1.0);
                        let dy = rng.gen_range(-1.0..1.0);
                        obstacles.push(Obstacle::centered(cx + dx, cy + dy, side, side));
                    }
                }
            }
        }
        // never swallow the endpoints
        let start = (0.0, mid);
        let goal = (w, mid);
        obstacles.retain(|o| !o.contains(start.0, start.1) && !o.contains(goal.0, goal.1));
        obstacles
    }
}

/// Axis-aligned rectangular obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Obstacle {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn centered(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        Self::new(cx - width / 2.0, cy - height / 2.0, cx + width / 2.0, cy + height / 2.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Inclusive segment/rectangle intersection via Liang-Barsky clipping.
    /// An endpoint inside the rectangle counts, so a vertex inside an
    /// obstacle invalidates all its incident edges.
    pub fn intersects_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (p, q) in [
            (-dx, a.0 - self.x0),
            (dx, self.x1 - a.0),
            (-dy, a.1 - self.y0),
            (dy, self.y1 - a.1),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Vertical wall of thickness 0.5 at column `x`, spanning the full height,
/// minus a gap of half-height `gap_half` around each entry of `gaps`.
fn wall_with_gaps(x: f64, extent: f64, gaps: &[f64], gap_half: f64, out: &mut Vec<Obstacle>) {
    let mut cuts: Vec<(f64, f64)> = gaps
        .iter()
        .map(|&g| (g - gap_half, g + gap_half))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut y = -0.5;
    for (lo, hi) in cuts {
        if lo > y {
            out.push(Obstacle::new(x - 0.25, y, x + 0.25, lo));
        }
        y = y.max(hi);
    }
    if y < extent + 0.5 {
        out.push(Obstacle::new(x - 0.25, y, x + 0.25, extent + 0.5));
    }
}

fn poisson(lambda: f64, rng: &mut impl Rng) -> usize {
    let limit = (-lambda).exp();
    let mut k = 0usize;
    let mut p = 1.0f64;
    loop {
        p *= rng.gen::<f64>();
        if p <= limit {
            return k;
        }
        k += 1;
    }
}

/// Eight-connected `n x n` grid with unit/diagonal Euclidean lengths.
/// Start is the middle of the left column, goal the middle of the right.
pub fn eight_connected_grid(n: usize) -> ExplicitGraph {
    let vid = |x: usize, y: usize| y * n + x;
    let vertices: Vec<VertexId> = (0..n * n).collect();
    let mut edges = Vec::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    for y in 0..n {
        for x in 0..n {
            if x + 1 < n {
                edges.push(Edge { id: edges.len(), u: vid(x, y), v: vid(x + 1, y), length: 1.0 });
            }
            if y + 1 < n {
                edges.push(Edge { id: edges.len(), u: vid(x, y), v: vid(x, y + 1), length: 1.0 });
            }
            if x + 1 < n && y + 1 < n {
                edges.push(Edge {
                    id: edges.len(),
                    u: vid(x, y),
                    v: vid(x + 1, y + 1),
                    length: sqrt2,
                });
            }
            if x + 1 < n && y > 0 {
                edges.push(Edge {
                    id: edges.len(),
                    u: vid(x, y),
                    v: vid(x + 1, y - 1),
                    length: sqrt2,
                });
            }
        }
    }
    let start = vid(0, n / 2);
    let goal = vid(n - 1, n / 2);
    let coords = (0..n * n).map(|i| (i, ((i % n) as f64, (i / n) as f64)));
    ExplicitGraph::new(vertices, edges, start, goal)
        .unwrap()
        .with_coords(coords)
}

/// Rasterizes obstacles to edge validity: an edge is invalid iff its
/// segment intersects any obstacle.
pub fn rasterize(graph: &ExplicitGraph, obstacles: &[Obstacle]) -> World {
    let bits = graph
        .edges()
        .iter()
        .map(|e| {
            let a = graph.coord(e.u).expect("grid vertices carry coordinates");
            let b = graph.coord(e.v).expect("grid vertices carry coordinates");
            !obstacles.iter().any(|o| o.intersects_segment(a, b))
        })
        .collect();
    World::new(bits)
}

/// Provenance of a generated dataset: enough to regenerate it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub grid_size: usize,
    pub n_worlds: usize,
    pub seed: u64,
    pub split: (f64, f64),
}

/// An in-memory dataset: one graph, many worlds, disjoint index splits.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub graph: Arc<ExplicitGraph>,
    pub worlds: Vec<World>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub generator: GeneratorSpec,
}

impl GeneratedDataset {
    pub fn worlds_for<'a>(&'a self, indices: &[usize]) -> Vec<World> {
        indices.iter().map(|&i| self.worlds[i].clone()).collect()
    }

    pub fn train_worlds(&self) -> Vec<World> {
        self.worlds_for(&self.train)
    }

    pub fn validation_worlds(&self) -> Vec<World> {
        self.worlds_for(&self.validation)
    }

    pub fn test_worlds(&self) -> Vec<World> {
        self.worlds_for(&self.test)
    }
}

/// Generates an obstacle dataset with the default 50/25/25 split.
pub fn grid_dataset(
    kind: DatasetKind,
    grid_size: usize,
    n_worlds: usize,
    seed: u64,
) -> Result<GeneratedDataset> {
    grid_dataset_with_split(kind, grid_size, n_worlds, seed, (0.5, 0.25))
}

/// Generates an obstacle dataset. `split` gives the train and validation
/// fractions; the remainder is the test split. World `i` is a pure function
/// of `(kind, grid_size, seed, i)`.
pub fn grid_dataset_with_split(
    kind: DatasetKind,
    grid_size: usize,
    n_worlds: usize,
    seed: u64,
    split: (f64, f64),
) -> Result<GeneratedDataset> {
    if n_worlds < 1 {
        return Err(Error::Config("n_worlds must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&split.0)
        || !(0.0..=1.0).contains(&split.1)
        || split.0 + split.1 > 1.0
    {
        return Err(Error::Config("split fractions must be in [0,1] and sum to at most 1".into()));
    }
    let dist = WorldDistribution::grid_sampler(kind, grid_size)?;
    let worlds: Vec<World> = (0..n_worlds)
        .map(|i| dist.sample_world(child_seed(seed, i as u64)))
        .collect();
    let n_train = (n_worlds as f64 * split.0).floor() as usize;
    let n_val = (n_worlds as f64 * split.1).floor() as usize;
    Ok(GeneratedDataset {
        graph: dist.graph().clone(),
        worlds,
        train: (0..n_train).collect(),
        validation: (n_train..n_train + n_val).collect(),
        test: (n_train + n_val..n_worlds).collect(),
        generator: GeneratorSpec {
            name: kind.name().to_string(),
            grid_size,
            n_worlds,
            seed,
            split,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;
    use std::collections::HashSet;

    #[test]
    fn env1_support_satisfies_the_stated_conditionals() {
        use env1_edges::*;
        let dist = env1_distribution();
        let support = dist.enumerate_support().unwrap();
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < PROB_EPS);

        // the stated construction enumerates to 6 distinct worlds:
        // 1 (both-corridor failure) + 4 (top_right plus one other) + 1 (all valid)
        assert_eq!(support.len(), 6);

        let p = |pred: &dyn Fn(&World) -> bool| -> f64 {
            support
                .iter()
                .filter(|(w, _)| pred(w))
                .map(|(_, p)| p)
                .sum()
        };
        let p_tl_invalid = p(&|w| !w.is_valid(TOP_LEFT));
        assert!((p_tl_invalid - 0.70).abs() < PROB_EPS);
        // middle_right always fails alongside top_left
        let p_both = p(&|w| !w.is_valid(TOP_LEFT) && !w.is_valid(MIDDLE_RIGHT));
        assert!((p_both / p_tl_invalid - 1.0).abs() < PROB_EPS);
        // given top_left valid: half the mass is all-valid, half has
        // top_right invalid plus exactly one other edge
        let p_tl_valid = p(&|w| w.is_valid(TOP_LEFT));
        let p_all_valid = p(&|w| w.invalid_edges().count() == 0);
        assert!((p_all_valid / p_tl_valid - 0.5).abs() < PROB_EPS);
        let p_tr_branch = p(&|w| w.is_valid(TOP_LEFT) && !w.is_valid(TOP_RIGHT));
        assert!((p_tr_branch / p_tl_valid - 0.5).abs() < PROB_EPS);
        for (w, _) in support.iter().filter(|(w, _)| w.is_valid(TOP_LEFT) && !w.is_valid(TOP_RIGHT))
        {
            assert_eq!(w.invalid_edges().count(), 2);
        }
        // validity marginal of top_left is 0.30, the minimum on the top corridor
        let m = dist.marginal_invalidity().unwrap();
        assert!((m[TOP_LEFT] - 0.70).abs() < PROB_EPS);
        assert!((m[TOP_RIGHT] - 0.15).abs() < PROB_EPS);
    }

    #[test]
    fn env2_support_is_the_two_stated_modes() {
        use env2_edges::*;
        let dist = env2_distribution();
        let support = dist.enumerate_support().unwrap();
        assert_eq!(support.len(), 2);
        assert!((support[0].1 - 0.6).abs() < PROB_EPS);
        assert!((support[1].1 - 0.4).abs() < PROB_EPS);
        // middle_right is invalid in both modes
        assert!(support.iter().all(|(w, _)| !w.is_valid(MIDDLE_RIGHT)));
        let m = dist.marginal_invalidity().unwrap();
        assert!((m[MIDDLE_RIGHT] - 1.0).abs() < PROB_EPS);
        assert!((m[TOP_LEFT] - 0.6).abs() < PROB_EPS);
        assert!((m[TOP_RIGHT] - 0.4).abs() < PROB_EPS);
    }

    #[test]
    fn env2_sampler_matches_support_frequencies() {
        let dist = env2_distribution();
        let support = dist.enumerate_support().unwrap();
        let case1 = &support[0].0;
        let n = 100_000;
        let hits = (0..n)
            .filter(|&i| &dist.sample_world(child_seed(99, i)) == case1)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.60).abs() < 0.01, "empirical frequency {freq}");
    }

    #[test]
    fn env1_sampler_chi_square_against_support() {
        let dist = env1_distribution();
        let support = dist.enumerate_support().unwrap();
        let n = 100_000usize;
        let mut counts = vec![0usize; support.len()];
        for i in 0..n {
            let w = dist.sample_world(child_seed(4242, i as u64));
            let idx = support.iter().position(|(sw, _)| sw == &w).unwrap();
            counts[idx] += 1;
        }
        let chi2: f64 = support
            .iter()
            .zip(&counts)
            .map(|((_, p), &c)| {
                let expected = p * n as f64;
                (c as f64 - expected).powi(2) / expected
            })
            .sum();
        // 5 degrees of freedom; 99.9th percentile is ~20.5
        assert!(chi2 < 20.5, "chi-square statistic {chi2}");
    }

    #[test]
    fn sampler_distribution_rejects_enumeration() {
        let dist = WorldDistribution::grid_sampler(DatasetKind::Forest, 6).unwrap();
        assert!(matches!(dist.enumerate_support(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn datasets_are_deterministic_and_split_disjointly() {
        let a = grid_dataset(DatasetKind::Gate, 8, 30, 7).unwrap();
        let b = grid_dataset(DatasetKind::Gate, 8, 30, 7).unwrap();
        assert_eq!(a.worlds, b.worlds);
        let c = grid_dataset(DatasetKind::Gate, 8, 30, 8).unwrap();
        assert_ne!(a.worlds, c.worlds);

        let mut seen = HashSet::new();
        for idx in a.train.iter().chain(&a.validation).chain(&a.test) {
            assert!(seen.insert(*idx), "split indices overlap at {idx}");
        }
        assert_eq!(seen.len(), 30);
        for w in &a.worlds {
            assert_eq!(w.len(), a.graph.edge_count());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(grid_dataset(DatasetKind::Forest, 3, 10, 0).is_err());
        assert!(grid_dataset(DatasetKind::Forest, 8, 0, 0).is_err());
        assert!(grid_dataset_with_split(DatasetKind::Forest, 8, 10, 0, (0.9, 0.9)).is_err());
    }

    /// Horizontal edge (x,y)-(x+1,y) id lookup on an n-grid.
    fn horiz_edge(g: &ExplicitGraph, n: usize, x: usize, y: usize) -> EdgeId {
        let (u, v) = (y * n + x, y * n + x + 1);
        g.edges()
            .iter()
            .find(|e| (e.u, e.v) == (u, v) || (e.u, e.v) == (v, u))
            .unwrap()
            .id
    }

    fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|b| (b - my).powi(2)).sum();
        if vx == 0.0 || vy == 0.0 {
            return 0.0;
        }
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn gate_wall_edges_are_correlated_forest_edges_are_not() {
        let n = 10usize;
        let n_worlds = 300usize;
        let gate = grid_dataset(DatasetKind::Gate, n, n_worlds, 21).unwrap();
        let forest = grid_dataset(DatasetKind::Forest, n, n_worlds, 22).unwrap();

        // wall column is fixed at (n-1)/2 = 4.5: edges x=4 -> x=5 cross it
        let invalid = |ds: &GeneratedDataset, e: EdgeId| -> Vec<f64> {
            ds.worlds
                .iter()
                .map(|w| if w.is_valid(e) { 0.0 } else { 1.0 })
                .collect()
        };
        let mut gate_corrs = Vec::new();
        for y in 0..n - 1 {
            let a = invalid(&gate, horiz_edge(&gate.graph, n, 4, y));
            let b = invalid(&gate, horiz_edge(&gate.graph, n, 4, y + 1));
            gate_corrs.push(correlation(&a, &b));
        }
        let gate_mean = gate_corrs.iter().sum::<f64>() / gate_corrs.len() as f64;
        assert!(gate_mean > 0.10, "gate adjacent wall-edge correlation {gate_mean}");

        // forest: distant edge pairs should be near-independent
        let mut forest_corrs = Vec::new();
        for y in 0..n - 1 {
            let a = invalid(&forest, horiz_edge(&forest.graph, n, 1, y));
            let b = invalid(&forest, horiz_edge(&forest.graph, n, 7, n - 1 - y));
            forest_corrs.push(correlation(&a, &b).abs());
        }
        let forest_mean = forest_corrs.iter().sum::<f64>() / forest_corrs.len() as f64;
        assert!(forest_mean < 0.10, "forest distant-edge |correlation| {forest_mean}");
    }

    #[test]
    fn generated_grid_worlds_are_mostly_feasible() {
        for kind in DatasetKind::ALL {
            let ds = grid_dataset(kind, 10, 40, 5).unwrap();
            let feasible = ds
                .worlds
                .iter()
                .filter(|w| {
                    let removed: HashSet<EdgeId> = w.invalid_edges().collect();
                    ds.graph.shortest_path(&removed).is_some()
                })
                .count();
            assert!(
                feasible * 10 >= ds.worlds.len() * 7,
                "{}: only {feasible}/40 worlds feasible",
                kind.name()
            );
        }
    }
}
