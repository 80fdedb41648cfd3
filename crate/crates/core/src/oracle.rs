//! Clairvoyant edge selectors: given full knowledge of the world, which
//! invalid edges eliminate every path shorter than the shortest feasible
//! one with the fewest evaluations?
//!
//! Finding the minimal such set is a set cover, so [`exact_oracle_cover`]
//! runs the classic greedy approximation over explicitly enumerated paths.
//! That is affordable only on small graphs; [`approx_oracle_action`] is the
//! cheap per-step surrogate used to label training data: restrict attention
//! to invalid edges on the current candidate path and rank them by the
//! marginal increase in shortest-path length their removal causes.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{
    unevaluated_on_path, EdgeId, EvalState, ExplicitGraph, Path, World,
    DEFAULT_PATH_CAP,
};
use crate::search::{Selector, SelectorContext, TraceStep};

/// A set-cover instance over not-yet-invalidated paths shorter than the
/// optimum: the universe of paths and, per invalid edge, the paths it
/// covers.
#[derive(Debug, Clone)]
pub struct CoverInstance {
    pub universe: Vec<Path>,
    /// Invalid edges available as covers.
    pub candidates: Vec<EdgeId>,
    /// `membership[i]` lists universe indices covered by `candidates[i]`.
    pub membership: Vec<Vec<usize>>,
}

impl CoverInstance {
    /// Builds the cover instance for `state` in `world`: the universe is
    /// every surviving simple path strictly shorter than the shortest
    /// feasible path, and covers are the invalid edges.
    pub fn build(graph: &ExplicitGraph, world: &World, state: &EvalState) -> Result<Self> {
        Self::build_capped(graph, world, state, DEFAULT_PATH_CAP)
    }

    pub fn build_capped(
        graph: &ExplicitGraph,
        world: &World,
        state: &EvalState,
        cap: usize,
    ) -> Result<Self> {
        let valid_removed: HashSet<EdgeId> = world.invalid_edges().collect();
        let optimal = graph
            .shortest_path(&valid_removed)
            .ok_or(Error::NoFeasiblePath)?;
        let already_invalid = state.invalid_set();
        let universe =
            graph.paths_shorter_than_capped(optimal.length, &already_invalid, cap)?;

        let candidates: Vec<EdgeId> = world
            .invalid_edges()
            .filter(|e| !already_invalid.contains(e))
            .collect();
        let membership = candidates
            .iter()
            .map(|&e| {
                universe
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.contains_edge(e))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Ok(Self {
            universe,
            candidates,
            membership,
        })
    }
}

/// Greedy set cover: repeatedly pick the invalid edge covering the most
/// surviving shorter paths (smallest edge id on ties) until none survive.
/// Returns the selection order; its length is within `1 + ln(universe)` of
/// the optimal cover.
pub fn exact_oracle_cover(
    graph: &ExplicitGraph,
    world: &World,
    state: &EvalState,
) -> Result<Vec<EdgeId>> {
    let instance = CoverInstance::build(graph, world, state)?;
    let mut alive: Vec<bool> = vec![true; instance.universe.len()];
    let mut remaining = alive.len();
    let mut used: Vec<bool> = vec![false; instance.candidates.len()];
    let mut order = Vec::new();

    while remaining > 0 {
        let mut best: Option<(usize, usize)> = None; // (candidate index, gain)
        for (ci, covered) in instance.membership.iter().enumerate() {
            if used[ci] {
                continue;
            }
            let gain = covered.iter().filter(|&&pi| alive[pi]).count();
            let better = match best {
                None => gain > 0,
                Some((bi, bg)) => {
                    gain > bg || (gain == bg && instance.candidates[ci] < instance.candidates[bi])
                }
            };
            if better {
                best = Some((ci, gain));
            }
        }
        let (ci, _) = best.ok_or_else(|| {
            Error::Inconsistent(
                "surviving shorter paths cannot be covered by invalid edges; \
                 the state or world is corrupt"
                    .into(),
            )
        })?;
        used[ci] = true;
        order.push(instance.candidates[ci]);
        for &pi in &instance.membership[ci] {
            if alive[pi] {
                alive[pi] = false;
                remaining -= 1;
            }
        }
    }
    Ok(order)
}

/// One clairvoyant action for the current candidate path.
///
/// Among invalid edges on the path, returns the one whose removal increases
/// the shortest-path length the most (disconnection counts as the sentinel
/// length; ties go to the smallest edge id). A path with no invalid edge is
/// the final answer, so the cheapest move is to verify it front-to-back:
/// the first unevaluated edge.
pub fn approx_oracle_action(
    state: &EvalState,
    path: &Path,
    world: &World,
    graph: &ExplicitGraph,
) -> Result<EdgeId> {
    let open = unevaluated_on_path(path, state);
    if open.is_empty() {
        return Err(Error::ContractViolation(
            "oracle asked to act on a fully evaluated path".into(),
        ));
    }
    let invalid_open: Vec<EdgeId> = open
        .iter()
        .copied()
        .filter(|&e| !world.is_valid(e))
        .collect();
    if invalid_open.is_empty() {
        return Ok(open[0]);
    }

    let already_invalid = state.invalid_set();
    let sentinel = graph.delta_length_sentinel();
    let mut best_edge = EdgeId::MAX;
    let mut best_gain = f64::NEG_INFINITY;
    for &e in &invalid_open {
        let mut removed = already_invalid.clone();
        removed.insert(e);
        let gain = match graph.shortest_path(&removed) {
            Some(alt) => alt.length - path.length,
            None => sentinel,
        };
        if gain > best_gain + 1e-12 || (gain > best_gain - 1e-12 && e < best_edge) {
            best_gain = gain;
            best_edge = e;
        }
    }
    Ok(best_edge)
}

/// The approximate clairvoyant oracle as a drop-in [`Selector`]. Carries
/// the world it is clairvoyant about.
pub struct OracleSelector {
    world: World,
}

impl OracleSelector {
    pub fn new(world: World) -> Self {
        Self { world }
    }
}

impl Selector for OracleSelector {
    fn name(&self) -> &str {
        "oracle"
    }
    fn select(
        &self,
        state: &EvalState,
        path: &Path,
        ctx: &mut SelectorContext<'_>,
    ) -> Result<EdgeId> {
        approx_oracle_action(state, path, &self.world, ctx.graph)
    }
}

/// A trace step annotated with the oracle's pick for that state.
#[derive(Debug, Clone)]
pub struct LabeledStep {
    pub state: EvalState,
    pub path: Path,
    pub oracle_edge: EdgeId,
}

/// Labels every visited state of a trace with the clairvoyant action,
/// producing imitation-learning rows. The trace must have been recorded in
/// `world`; disagreement is an integrity error.
pub fn oracle_label_stream(
    trace: &[TraceStep],
    world: &World,
    graph: &ExplicitGraph,
) -> Result<Vec<LabeledStep>> {
    let mut out = Vec::with_capacity(trace.len());
    for step in trace {
        if world.is_valid(step.selected) != step.outcome || !step.state.consistent_with(world) {
            return Err(Error::Inconsistent(
                "trace outcomes disagree with the world they were recorded in".into(),
            ));
        }
        let oracle_edge = approx_oracle_action(&step.state, &step.path, world, graph)?;
        out.push(LabeledStep {
            state: step.state.clone(),
            path: step.path.clone(),
            oracle_edge,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::search::{run_lazysp, SelectForward};

    /// Three corridors with lengths 2, 3, 4 built from unit-ish edges.
    fn laddered() -> ExplicitGraph {
        ExplicitGraph::new(
            vec![0, 1, 2, 3, 9],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },
                Edge { id: 1, u: 1, v: 9, length: 1.0 },
                Edge { id: 2, u: 0, v: 2, length: 1.5 },
                Edge { id: 3, u: 2, v: 9, length: 1.5 },
                Edge { id: 4, u: 0, v: 3, length: 2.0 },
                Edge { id: 5, u: 3, v: 9, length: 2.0 },
            ],
            0,
            9,
        )
        .unwrap()
    }

    #[test]
    fn feasible_first_candidate_needs_no_cover() {
        let g = laddered();
        let world = World::all_valid(6);
        let cover = exact_oracle_cover(&g, &world, &EvalState::new(6)).unwrap();
        assert!(cover.is_empty());
    }

    #[test]
    fn shared_invalid_edge_dominates() {
        // corridors 2 and 3 are both shorter than the feasible corridor 4;
        // both pass through a shared first segment in this variant
        let g = ExplicitGraph::new(
            vec![0, 1, 2, 3, 9],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },  // shared stem
                Edge { id: 1, u: 1, v: 9, length: 1.0 },  // short finish A
                Edge { id: 2, u: 1, v: 2, length: 0.5 },  // detour hop
                Edge { id: 3, u: 2, v: 9, length: 1.0 },  // short finish B
                Edge { id: 4, u: 0, v: 3, length: 2.0 },  // feasible corridor
                Edge { id: 5, u: 3, v: 9, length: 2.0 },
            ],
            0,
            9,
        )
        .unwrap();
        // stem edge 0 is invalid and covers both short paths; edges 1 and 3
        // are private invalid edges of each short path
        let world = World::with_invalid(6, &[0, 1, 3]);
        let cover = exact_oracle_cover(&g, &world, &EvalState::new(6)).unwrap();
        assert_eq!(cover, vec![0]);
    }

    #[test]
    fn cover_eliminates_all_shorter_paths() {
        let g = laddered();
        // corridor 1 broken, corridor 2 broken, corridor 3 feasible
        let world = World::with_invalid(6, &[1, 2]);
        let state = EvalState::new(6);
        let cover = exact_oracle_cover(&g, &world, &state).unwrap();
        let removed: HashSet<EdgeId> = cover.iter().copied().collect();
        let optimal_len = 4.0;
        let survivors = g.paths_shorter_than(optimal_len, &removed).unwrap();
        assert!(survivors.is_empty());
        for &e in &cover {
            assert!(!world.is_valid(e));
        }
    }

    #[test]
    fn no_feasible_path_is_an_error() {
        let g = laddered();
        let world = World::with_invalid(6, &[0, 2, 4]);
        assert!(matches!(
            exact_oracle_cover(&g, &world, &EvalState::new(6)),
            Err(Error::NoFeasiblePath)
        ));
    }

    #[test]
    fn single_invalid_edge_on_path_is_selected() {
        let g = laddered();
        let world = World::with_invalid(6, &[1]);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        let a = approx_oracle_action(&EvalState::new(6), &path, &world, &g).unwrap();
        assert_eq!(a, 1);
    }

    #[test]
    fn larger_detour_wins() {
        // removing edge 0 forces corridor 2 (detour +1.0);
        // removing edge 1 forces corridor 2 as well, equal gain -> tie by id;
        // build asymmetric case instead: invalidate 0 and 3 so the
        // hallucinated removals differ
        let g = ExplicitGraph::new(
            vec![0, 1, 2, 9],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },
                Edge { id: 1, u: 1, v: 9, length: 1.0 },
                Edge { id: 2, u: 0, v: 9, length: 2.5 },
                Edge { id: 3, u: 0, v: 2, length: 1.2 },
                Edge { id: 4, u: 2, v: 9, length: 1.2 },
            ],
            0,
            9,
        )
        .unwrap();
        // candidate path is 0-1 (length 2.0); both its edges invalid.
        // removing edge 0: next best is 3-4 (2.4), gain 0.4
        // removing edge 1: identical, gain 0.4 -> tie, then smaller id 0.
        let world = World::with_invalid(5, &[0, 1]);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        assert_eq!(path.edges, vec![0, 1]);
        let a = approx_oracle_action(&EvalState::new(5), &path, &world, &g).unwrap();
        assert_eq!(a, 0);

        // now make removing edge 1 strictly worse for the searcher
        // (bigger detour) by letting edge 0 also serve the 2.4 corridor:
        // 0-2 via vertex 1: edges 0 (0-1), 5 (1-2), 4 (2-9)
        let g2 = ExplicitGraph::new(
            vec![0, 1, 2, 9],
            vec![
                Edge { id: 0, u: 0, v: 1, length: 1.0 },
                Edge { id: 1, u: 1, v: 9, length: 1.0 },
                Edge { id: 2, u: 0, v: 9, length: 5.0 },
                Edge { id: 3, u: 0, v: 2, length: 1.2 },
                Edge { id: 4, u: 2, v: 9, length: 1.2 },
                Edge { id: 5, u: 1, v: 2, length: 0.1 },
            ],
            0,
            9,
        )
        .unwrap();
        // candidate: 0-1 (2.0). invalid: {1, 3}.
        // remove 1: best = 0,5,4 = 2.3 (gain 0.3)
        // remove 3: candidate unchanged... 3 not on path, so only 1 counts.
        // Make both on path: invalid {0, 1}:
        // remove 0: best = 3,4 = 2.4 (gain .4); remove 1: 0,5,4 = 2.3 (gain .3)
        let world2 = World::with_invalid(6, &[0, 1]);
        let path2 = g2.shortest_path(&HashSet::new()).unwrap();
        assert_eq!(path2.edges, vec![0, 1]);
        let a2 = approx_oracle_action(&EvalState::new(6), &path2, &world2, &g2).unwrap();
        assert_eq!(a2, 0);
    }

    #[test]
    fn feasible_candidate_enters_verification_order() {
        let g = laddered();
        let world = World::all_valid(6);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        let a = approx_oracle_action(&EvalState::new(6), &path, &world, &g).unwrap();
        assert_eq!(a, path.edges[0]);

        // and LazySP with the oracle terminates right after verification
        let mut ctx = SelectorContext::new(&g, 0);
        let res = run_lazysp(&g, &world, &OracleSelector::new(world.clone()), &mut ctx).unwrap();
        assert_eq!(res.num_evaluations(), 2);
        assert_eq!(res.path.unwrap().edges, vec![0, 1]);
    }

    #[test]
    fn oracle_never_wastes_valid_evaluations_off_the_final_path() {
        let g = laddered();
        for invalid in [vec![0], vec![1, 3], vec![0, 2], vec![5], vec![]] {
            let world = World::with_invalid(6, &invalid);
            let mut ctx = SelectorContext::new(&g, 0);
            let res =
                run_lazysp(&g, &world, &OracleSelector::new(world.clone()), &mut ctx).unwrap();
            let final_path = res.path.expect("all these worlds are feasible");
            for &(e, outcome) in &res.evaluated {
                if outcome {
                    assert!(
                        final_path.contains_edge(e),
                        "valid edge {e} evaluated off the returned path"
                    );
                }
            }
        }
    }

    #[test]
    fn label_stream_self_consistency_and_off_policy_divergence() {
        let g = laddered();

        // rolling in the oracle itself: labels equal actions taken
        let world = World::with_invalid(6, &[1, 2]);
        let mut ctx = SelectorContext::new(&g, 0);
        let res = run_lazysp(&g, &world, &OracleSelector::new(world.clone()), &mut ctx).unwrap();
        let labels = oracle_label_stream(&res.trace, &world, &g).unwrap();
        for (step, label) in res.trace.iter().zip(&labels) {
            assert_eq!(step.selected, label.oracle_edge);
        }

        // rolling in forward: the first candidate is [0, 1] with edge 1
        // invalid; forward evaluates 0, the oracle labels 1
        let mut ctx = SelectorContext::new(&g, 0);
        let res = run_lazysp(&g, &world, &SelectForward, &mut ctx).unwrap();
        let labels = oracle_label_stream(&res.trace, &world, &g).unwrap();
        assert_eq!(res.trace[0].selected, 0);
        assert_eq!(labels[0].oracle_edge, 1);

        // empty trace -> empty labels
        assert!(oracle_label_stream(&[], &world, &g).unwrap().is_empty());

        // a trace replayed against the wrong world is rejected
        let wrong = World::all_valid(6);
        assert!(matches!(
            oracle_label_stream(&res.trace, &wrong, &g),
            Err(Error::Inconsistent(_))
        ));
    }

    /// Exhaustive minimum set cover used as the oracle for the greedy
    /// guarantee test: try all subsets of candidate edges.
    fn brute_force_min_cover(instance: &CoverInstance) -> Option<usize> {
        let n = instance.candidates.len();
        let m = instance.universe.len();
        if m == 0 {
            return Some(0);
        }
        let mut best: Option<usize> = None;
        for mask in 0u32..(1 << n) {
            let mut covered = vec![false; m];
            for ci in 0..n {
                if mask & (1 << ci) != 0 {
                    for &pi in &instance.membership[ci] {
                        covered[pi] = true;
                    }
                }
            }
            if covered.iter().all(|&c| c) {
                let size = mask.count_ones() as usize;
                best = Some(best.map_or(size, |b: usize| b.min(size)));
            }
        }
        best
    }

    #[test]
    fn greedy_cover_is_within_the_log_bound_of_optimal() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(17);
        let mut tested = 0;
        while tested < 60 {
            // random graphs with 5 vertices and up to 10 edges
            let n_vertices = 5usize;
            let n_edges = rng.gen_range(6..=10usize);
            let mut edges = Vec::new();
            for id in 0..n_edges {
                let u = rng.gen_range(0..n_vertices);
                let mut v = rng.gen_range(0..n_vertices);
                while v == u {
                    v = rng.gen_range(0..n_vertices);
                }
                let length = rng.gen_range(1..=4) as f64;
                edges.push(Edge { id, u, v, length });
            }
            let g = match ExplicitGraph::new((0..n_vertices).collect(), edges, 0, n_vertices - 1) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let world = World::new((0..n_edges).map(|_| rng.gen::<f64>() > 0.45).collect());
            let valid_removed: HashSet<EdgeId> = world.invalid_edges().collect();
            if g.shortest_path(&valid_removed).is_none() {
                continue;
            }
            let state = EvalState::new(n_edges);
            let greedy = exact_oracle_cover(&g, &world, &state).unwrap();
            let instance = CoverInstance::build(&g, &world, &state).unwrap();
            let opt = brute_force_min_cover(&instance).expect("solvable by construction");
            let universe = instance.universe.len();
            if universe > 0 {
                let bound = (1.0 + (universe as f64).ln()) * opt as f64;
                assert!(
                    greedy.len() as f64 <= bound + 1e-9,
                    "greedy {} vs bound {bound} (opt {opt}, universe {universe})",
                    greedy.len()
                );
            } else {
                assert!(greedy.is_empty());
            }
            tested += 1;
        }
    }
}
