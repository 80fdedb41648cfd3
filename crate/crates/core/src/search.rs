//! The lazy shortest-path evaluation loop and its edge selectors.
//!
//! Each iteration computes the shortest path over every edge not yet known
//! to be invalid, asks the [`Selector`] for one unevaluated edge on that
//! path, and records the outcome. The loop terminates when a candidate path
//! is fully verified (or no candidate remains). Total reward is minus the
//! number of evaluations, so better selectors have higher reward.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features;
use crate::graph::{unevaluated_on_path, EdgeId, EvalState, ExplicitGraph, Path, World};
use crate::rng::rng_from_seed;

/// Read-mostly episode context handed to selectors: the graph, optional
/// per-edge invalidity estimates, optional training worlds for posterior
/// selectors, the episode step counter and a seeded RNG.
pub struct SelectorContext<'a> {
    pub graph: &'a ExplicitGraph,
    /// Estimated probability that each edge is invalid.
    pub priors: Option<Vec<f64>>,
    pub training_worlds: Option<&'a [World]>,
    pub step: usize,
    pub rng: ChaCha8Rng,
}

impl<'a> SelectorContext<'a> {
    pub fn new(graph: &'a ExplicitGraph, seed: u64) -> Self {
        Self {
            graph,
            priors: None,
            training_worlds: None,
            step: 0,
            rng: rng_from_seed(seed),
        }
    }

    pub fn with_priors(mut self, invalidity: Vec<f64>) -> Self {
        self.priors = Some(invalidity);
        self
    }

    /// Attaches training worlds; also derives empirical invalidity priors
    /// from them unless priors were set explicitly.
    pub fn with_training_worlds(mut self, worlds: &'a [World]) -> Self {
        if self.priors.is_none() {
            self.priors = Some(features::empirical_invalidity(worlds));
        }
        self.training_worlds = Some(worlds);
        self
    }
}

/// What a selector would do in a given state: either a single edge or a
/// probability distribution over edges. The distribution form drives exact
/// expected-reward computations for stochastic selectors.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionDistribution {
    Single(EdgeId),
    Weighted(Vec<(EdgeId, f64)>),
}

/// Chooses which unevaluated edge on the candidate path to evaluate next.
///
/// Contract: the returned edge must lie on `path` and be unevaluated in
/// `state`. [`run_lazysp`] fails fast on violations.
pub trait Selector {
    fn name(&self) -> &str;

    fn select(&self, state: &EvalState, path: &Path, ctx: &mut SelectorContext<'_>)
        -> Result<EdgeId>;

    /// Action distribution at this state. The default covers deterministic
    /// selectors; stochastic ones must override it (and must not draw from
    /// `ctx.rng` when doing so).
    fn action_distribution(
        &self,
        state: &EvalState,
        path: &Path,
        ctx: &mut SelectorContext<'_>,
    ) -> Result<ActionDistribution> {
        Ok(ActionDistribution::Single(self.select(state, path, ctx)?))
    }
}

/// One step of an episode, recorded before the evaluation takes effect.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub state: EvalState,
    pub path: Path,
    pub selected: EdgeId,
    pub outcome: bool,
}

/// Outcome of one episode.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// The verified shortest feasible path, or `None` when the goal is
    /// unreachable in this world (an infeasible verdict, not an error).
    pub path: Option<Path>,
    /// Evaluated edges with outcomes, in evaluation order.
    pub evaluated: Vec<(EdgeId, bool)>,
    pub trace: Vec<TraceStep>,
    /// Always `-(evaluated.len())`.
    pub reward: f64,
}

impl SearchResult {
    pub fn num_evaluations(&self) -> usize {
        self.evaluated.len()
    }
}

/// Runs the lazy shortest-path loop on `world` with the given selector.
///
/// On return either `path` is a fully verified shortest feasible path and
/// every strictly shorter path contains an evaluated-invalid edge, or
/// `path` is `None` and the invalidated edges disconnect start from goal.
pub fn run_lazysp(
    graph: &ExplicitGraph,
    world: &World,
    selector: &dyn Selector,
    ctx: &mut SelectorContext<'_>,
) -> Result<SearchResult> {
    if world.len() != graph.edge_count() {
        return Err(Error::InvalidWorld(format!(
            "world has {} bits, graph has {} edges",
            world.len(),
            graph.edge_count()
        )));
    }
    ctx.step = 0;
    let mut state = EvalState::new(graph.edge_count());
    let mut evaluated = Vec::new();
    let mut trace = Vec::new();

    loop {
        let candidate = match graph.shortest_path(&state.invalid_set()) {
            Some(p) => p,
            None => {
                let reward = -(evaluated.len() as f64);
                return Ok(SearchResult {
                    path: None,
                    evaluated,
                    trace,
                    reward,
                });
            }
        };
        if candidate.edges.iter().all(|&e| state.is_evaluated(e)) {
            // every edge on the candidate is evaluated-valid: done
            let reward = -(evaluated.len() as f64);
            return Ok(SearchResult {
                path: Some(candidate),
                evaluated,
                trace,
                reward,
            });
        }

        let edge = selector.select(&state, &candidate, ctx)?;
        if !candidate.contains_edge(edge) {
            return Err(Error::ContractViolation(format!(
                "selector {} returned edge {edge} off the candidate path",
                selector.name()
            )));
        }
        if state.is_evaluated(edge) {
            return Err(Error::ContractViolation(format!(
                "selector {} returned already-evaluated edge {edge}",
                selector.name()
            )));
        }

        let outcome = world.is_valid(edge);
        trace.push(TraceStep {
            state: state.clone(),
            path: candidate,
            selected: edge,
            outcome,
        });
        state.record(edge, outcome)?;
        evaluated.push((edge, outcome));
        ctx.step += 1;
    }
}

fn require_unevaluated(path: &Path, state: &EvalState) -> Result<Vec<EdgeId>> {
    let open = unevaluated_on_path(path, state);
    if open.is_empty() {
        return Err(Error::ContractViolation(
            "selector invoked on a fully evaluated path".into(),
        ));
    }
    Ok(open)
}

/// First unevaluated edge along the path. Effective when invalid edges
/// cluster near the start.
pub struct SelectForward;

impl Selector for SelectForward {
    fn name(&self) -> &str {
        "forward"
    }
    fn select(&self, state: &EvalState, path: &Path, _ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        Ok(require_unevaluated(path, state)?[0])
    }
}

/// Last unevaluated edge along the path.
pub struct SelectBackward;

impl Selector for SelectBackward {
    fn name(&self) -> &str {
        "backward"
    }
    fn select(&self, state: &EvalState, path: &Path, _ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        Ok(*require_unevaluated(path, state)?.last().unwrap())
    }
}

/// Alternates between the first and last unevaluated edge. Parity follows
/// the episode step counter (first on even steps, starting at 0).
pub struct SelectAlternate;

impl Selector for SelectAlternate {
    fn name(&self) -> &str {
        "alternate"
    }
    fn select(&self, state: &EvalState, path: &Path, ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        let open = require_unevaluated(path, state)?;
        if ctx.step % 2 == 0 {
            Ok(open[0])
        } else {
            Ok(*open.last().unwrap())
        }
    }
}

/// Uniformly random unevaluated edge on the path.
pub struct SelectRandom;

impl Selector for SelectRandom {
    fn name(&self) -> &str {
        "random"
    }
    fn select(&self, state: &EvalState, path: &Path, ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        let open = require_unevaluated(path, state)?;
        let i = ctx.rng.gen_range(0..open.len());
        Ok(open[i])
    }
    fn action_distribution(
        &self,
        state: &EvalState,
        path: &Path,
        _ctx: &mut SelectorContext<'_>,
    ) -> Result<ActionDistribution> {
        let open = require_unevaluated(path, state)?;
        let p = 1.0 / open.len() as f64;
        Ok(ActionDistribution::Weighted(
            open.into_iter().map(|e| (e, p)).collect(),
        ))
    }
}

/// Edge least likely to be valid according to the prior invalidity
/// estimates in the context. Ties go to path order.
pub struct SelectFailFast;

impl Selector for SelectFailFast {
    fn name(&self) -> &str {
        "failfast"
    }
    fn select(&self, state: &EvalState, path: &Path, ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        let open = require_unevaluated(path, state)?;
        let priors = ctx
            .priors
            .as_ref()
            .ok_or_else(|| Error::Config("failfast selector needs per-edge priors".into()))?;
        // argmin validity == argmax invalidity; strict > keeps the first
        // (path-order) edge on ties
        let mut best = open[0];
        let mut best_inv = priors[open[0]];
        for &e in &open[1..] {
            if priors[e] > best_inv {
                best = e;
                best_inv = priors[e];
            }
        }
        Ok(best)
    }
}

/// Edge least likely to be valid under the posterior computed from the
/// training worlds and the evaluations made so far.
pub struct SelectPostFailFast;

impl Selector for SelectPostFailFast {
    fn name(&self) -> &str {
        "postfailfast"
    }
    fn select(&self, state: &EvalState, path: &Path, ctx: &mut SelectorContext<'_>) -> Result<EdgeId> {
        let open = require_unevaluated(path, state)?;
        let worlds = ctx.training_worlds.ok_or_else(|| {
            Error::Config("postfailfast selector needs training worlds".into())
        })?;
        let posterior = features::world_posterior(state, worlds)?;
        let mut best = open[0];
        let mut best_valid = features::edge_posterior_given(&posterior, open[0], worlds);
        for &e in &open[1..] {
            let p_valid = features::edge_posterior_given(&posterior, e, worlds);
            if p_valid < best_valid {
                best = e;
                best_valid = p_valid;
            }
        }
        Ok(best)
    }
}

/// The baseline selectors by name, used by harness code and CLI parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Forward,
    Backward,
    Alternate,
    Random,
    FailFast,
    PostFailFast,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Forward,
        BaselineKind::Backward,
        BaselineKind::Alternate,
        BaselineKind::Random,
        BaselineKind::FailFast,
        BaselineKind::PostFailFast,
    ];

    /// The four uninformed baselines (no priors or training worlds needed).
    pub const UNINFORMED: [BaselineKind; 4] = [
        BaselineKind::Forward,
        BaselineKind::Backward,
        BaselineKind::Alternate,
        BaselineKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Forward => "forward",
            BaselineKind::Backward => "backward",
            BaselineKind::Alternate => "alternate",
            BaselineKind::Random => "random",
            BaselineKind::FailFast => "failfast",
            BaselineKind::PostFailFast => "postfailfast",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn build(self) -> Box<dyn Selector> {
        match self {
            BaselineKind::Forward => Box::new(SelectForward),
            BaselineKind::Backward => Box::new(SelectBackward),
            BaselineKind::Alternate => Box::new(SelectAlternate),
            BaselineKind::Random => Box::new(SelectRandom),
            BaselineKind::FailFast => Box::new(SelectFailFast),
            BaselineKind::PostFailFast => Box::new(SelectPostFailFast),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use std::collections::HashSet;

    fn chain_graph(lengths: &[f64]) -> ExplicitGraph {
        let n = lengths.len();
        let vertices: Vec<_> = (0..=n).collect();
        let edges: Vec<_> = lengths
            .iter()
            .enumerate()
            .map(|(i, &length)| Edge { id: i, u: i, v: i + 1, length })
            .collect();
        ExplicitGraph::new(vertices, edges, 0, n).unwrap()
    }

    #[test]
    fn all_valid_world_evaluates_exactly_the_first_candidate() {
        let g = chain_graph(&[1.0, 1.0, 1.0]);
        let world = World::all_valid(3);
        let mut ctx = SelectorContext::new(&g, 0);
        let res = run_lazysp(&g, &world, &SelectForward, &mut ctx).unwrap();
        let path = res.path.unwrap();
        assert_eq!(path.edges, vec![0, 1, 2]);
        let mut evaluated: Vec<_> = res.evaluated.iter().map(|&(e, _)| e).collect();
        evaluated.sort_unstable();
        assert_eq!(evaluated, vec![0, 1, 2]);
        assert_eq!(res.reward, -3.0);
    }

    #[test]
    fn infeasible_world_returns_verdict_not_error() {
        let g = chain_graph(&[1.0, 1.0]);
        let world = World::with_invalid(2, &[1]);
        let mut ctx = SelectorContext::new(&g, 0);
        let res = run_lazysp(&g, &world, &SelectForward, &mut ctx).unwrap();
        assert!(res.path.is_none());
        assert_eq!(res.reward, -(res.evaluated.len() as f64));
    }

    #[test]
    fn forward_backward_pick_ends() {
        let g = chain_graph(&[1.0, 1.0, 1.0]);
        let state = EvalState::new(3);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        let mut ctx = SelectorContext::new(&g, 0);
        assert_eq!(SelectForward.select(&state, &path, &mut ctx).unwrap(), 0);
        assert_eq!(SelectBackward.select(&state, &path, &mut ctx).unwrap(), 2);
    }

    #[test]
    fn alternate_flips_with_step_parity() {
        let g = chain_graph(&[1.0, 1.0, 1.0]);
        let state = EvalState::new(3);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        let mut ctx = SelectorContext::new(&g, 0);
        ctx.step = 0;
        assert_eq!(SelectAlternate.select(&state, &path, &mut ctx).unwrap(), 0);
        ctx.step = 1;
        assert_eq!(SelectAlternate.select(&state, &path, &mut ctx).unwrap(), 2);
    }

    #[test]
    fn random_is_reproducible_and_uniform_in_distribution() {
        let g = chain_graph(&[1.0, 1.0, 1.0]);
        let state = EvalState::new(3);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        let pick = |seed| {
            let mut ctx = SelectorContext::new(&g, seed);
            SelectRandom.select(&state, &path, &mut ctx).unwrap()
        };
        assert_eq!(pick(7), pick(7));
        let mut ctx = SelectorContext::new(&g, 7);
        match SelectRandom.action_distribution(&state, &path, &mut ctx).unwrap() {
            ActionDistribution::Weighted(probs) => {
                assert_eq!(probs.len(), 3);
                assert!(probs.iter().all(|&(_, p)| (p - 1.0 / 3.0).abs() < 1e-12));
            }
            other => panic!("expected weighted distribution, got {other:?}"),
        }
    }

    #[test]
    fn failfast_picks_lowest_validity_prior() {
        let g = chain_graph(&[1.0, 1.0, 1.0]);
        let state = EvalState::new(3);
        let path = g.shortest_path(&HashSet::new()).unwrap();
        // validity priors (0.9, 0.2, 0.5) -> invalidity (0.1, 0.8, 0.5)
        let mut ctx = SelectorContext::new(&g, 0).with_priors(vec![0.1, 0.8, 0.5]);
        assert_eq!(SelectFailFast.select(&state, &path, &mut ctx).unwrap(), 1);
        // uniform priors tie-break to path order == forward
        let mut ctx = SelectorContext::new(&g, 0).with_priors(vec![0.5, 0.5, 0.5]);
        assert_eq!(SelectFailFast.select(&state, &path, &mut ctx).unwrap(), 0);
        // missing priors is a configuration error
        let mut ctx = SelectorContext::new(&g, 0);
        assert!(matches!(
            SelectFailFast.select(&state, &path, &mut ctx),
            Err(Error::Config(_))
        ));
    }

    struct OffPathSelector;
    impl Selector for OffPathSelector {
        fn name(&self) -> &str {
            "offpath"
        }
        fn select(&self, _: &EvalState, _: &Path, _: &mut SelectorContext<'_>) -> Result<EdgeId> {
            Ok(usize::MAX - 1)
        }
    }

    struct RepeatSelector;
    impl Selector for RepeatSelector {
        fn name(&self) -> &str {
            "repeat"
        }
        fn select(&self, _: &EvalState, path: &Path, _: &mut SelectorContext<'_>) -> Result<EdgeId> {
            Ok(path.edges[0])
        }
    }

    #[test]
    fn contract_violations_fail_fast() {
        let g = chain_graph(&[1.0, 1.0]);
        let world = World::all_valid(2);
        let mut ctx = SelectorContext::new(&g, 0);
        assert!(matches!(
            run_lazysp(&g, &world, &OffPathSelector, &mut ctx),
            Err(Error::ContractViolation(_))
        ));
        let mut ctx = SelectorContext::new(&g, 0);
        assert!(matches!(
            run_lazysp(&g, &world, &RepeatSelector, &mut ctx),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn reward_is_minus_evaluation_count_and_terminates() {
        let g = chain_graph(&[1.0, 1.0, 1.0, 1.0]);
        for bits in 0..16u32 {
            let world = World::new((0..4).map(|i| bits & (1 << i) != 0).collect());
            let mut ctx = SelectorContext::new(&g, 3);
            let res = run_lazysp(&g, &world, &SelectRandom, &mut ctx).unwrap();
            assert!(res.evaluated.len() <= g.edge_count());
            assert_eq!(res.reward, -(res.evaluated.len() as f64));
            // chain graph: feasible iff all edges valid
            assert_eq!(res.path.is_some(), bits == 0b1111);
            if let Some(p) = &res.path {
                assert!(p.feasible_in(&world));
            }
        }
    }
}
