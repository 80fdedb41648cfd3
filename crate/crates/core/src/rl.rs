//! Solving the edge-selection MDP exactly on small instances, and learning
//! it with tabular Q-learning.
//!
//! The MDP: states are evaluation states (one of unevaluated/valid/invalid
//! per edge, so `3^|E|` states), actions are the unevaluated edges on the
//! current candidate path, every action costs 1, and states whose candidate
//! path is fully verified absorb with value 0. With the world latent, the
//! transition on an action mixes over the posterior of support worlds
//! consistent with the state, which [`exact_value_iteration`] evaluates
//! exactly by backward induction (each action evaluates a new edge, so the
//! recursion is acyclic).
//!
//! This module also hosts the generic selector evaluation utilities: exact
//! expected reward over an explicit support (handling stochastic selectors
//! through their action distributions) and Monte Carlo with bootstrap
//! confidence intervals.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{unevaluated_on_path, EdgeId, EvalState, ExplicitGraph, World};
use crate::rng::{child_seed, rng_from_seed};
use crate::search::{run_lazysp, ActionDistribution, Selector, SelectorContext};
use crate::worlds::WorldDistribution;

/// Largest edge count for which the `3^|E|` state space is enumerated.
pub const MAX_EXACT_EDGES: usize = 12;

/// Per-(state, action) learning-rate decay exponent: the effective rate at
/// the n-th visit is `learning_rate / n^LEARNING_RATE_DECAY`. Satisfies the
/// Robbins-Monro conditions, so the table settles almost surely instead of
/// oscillating with the sampled worlds.
pub const LEARNING_RATE_DECAY: f64 = 0.7;

const LABEL_WORLD: u64 = 0x57;
const LABEL_ACTION: u64 = 0xAC;

fn guard_exact(graph: &ExplicitGraph) -> Result<()> {
    if graph.edge_count() > MAX_EXACT_EDGES {
        return Err(Error::SizeGuard(format!(
            "exact MDP routines support at most {MAX_EXACT_EDGES} edges, graph has {}",
            graph.edge_count()
        )));
    }
    Ok(())
}

/// Exact optimal values for an explicit-support distribution.
#[derive(Debug, Clone)]
pub struct ValueIteration {
    values: HashMap<u128, f64>,
    actions: HashMap<u128, EdgeId>,
    root_value: f64,
}

impl ValueIteration {
    /// `V*` of the empty state; minus this is the minimal expected number
    /// of evaluations.
    pub fn root_value(&self) -> f64 {
        self.root_value
    }

    pub fn value(&self, state: &EvalState) -> Option<f64> {
        self.values.get(&state.encode()).copied()
    }

    pub fn best_action(&self, state: &EvalState) -> Option<EdgeId> {
        self.actions.get(&state.encode()).copied()
    }

    /// Every memoized non-terminal state, for residual checks.
    pub fn visited_states(&self) -> impl Iterator<Item = u128> + '_ {
        self.values.keys().copied()
    }

    pub fn stored(&self, code: u128) -> (Option<f64>, Option<EdgeId>) {
        (self.values.get(&code).copied(), self.actions.get(&code).copied())
    }
}

/// Computes `V*` by backward induction over all states reachable from the
/// empty state under any play, mixing transitions over the renormalized
/// prior of support worlds consistent with each state.
pub fn exact_value_iteration(dist: &WorldDistribution) -> Result<ValueIteration> {
    let graph = dist.graph();
    guard_exact(graph)?;
    let support = dist.enumerate_support()?.to_vec();

    struct Solver<'a> {
        graph: &'a ExplicitGraph,
        support: &'a [(World, f64)],
        values: HashMap<u128, f64>,
        actions: HashMap<u128, EdgeId>,
    }

    impl Solver<'_> {
        fn solve(&mut self, state: &mut EvalState) -> f64 {
            let code = state.encode();
            if let Some(&v) = self.values.get(&code) {
                return v;
            }
            let candidate = match self.graph.shortest_path(&state.invalid_set()) {
                Some(p) => p,
                None => {
                    self.values.insert(code, 0.0);
                    return 0.0;
                }
            };
            let open = unevaluated_on_path(&candidate, state);
            if open.is_empty() {
                self.values.insert(code, 0.0);
                return 0.0;
            }

            let consistent: Vec<&(World, f64)> = self
                .support
                .iter()
                .filter(|(w, p)| *p > 0.0 && state.consistent_with(w))
                .collect();
            let total: f64 = consistent.iter().map(|(_, p)| p).sum();

            let mut best = f64::NEG_INFINITY;
            let mut best_action = open[0];
            for &a in &open {
                let mass_valid: f64 = consistent
                    .iter()
                    .filter(|(w, _)| w.is_valid(a))
                    .map(|(_, p)| p)
                    .sum();
                let mut q = -1.0;
                for (outcome, mass) in [(true, mass_valid), (false, total - mass_valid)] {
                    if mass <= 0.0 {
                        continue;
                    }
                    state.record(a, outcome).expect("edge is unevaluated");
                    q += mass / total * self.solve(state);
                    state.unrecord(a);
                }
                if q > best + 1e-15 {
                    best = q;
                    best_action = a;
                }
            }
            self.values.insert(code, best);
            self.actions.insert(code, best_action);
            best
        }
    }

    let mut solver = Solver {
        graph,
        support: &support,
        values: HashMap::new(),
        actions: HashMap::new(),
    };
    let root_value = solver.solve(&mut EvalState::new(graph.edge_count()));
    Ok(ValueIteration {
        values: solver.values,
        actions: solver.actions,
        root_value,
    })
}

/// The optimal policy read off a value iteration table.
pub struct OptimalSelector {
    vi: Arc<ValueIteration>,
}

impl OptimalSelector {
    pub fn new(vi: Arc<ValueIteration>) -> Self {
        Self { vi }
    }
}

impl Selector for OptimalSelector {
    fn name(&self) -> &str {
        "optimal"
    }
    fn select(
        &self,
        state: &EvalState,
        _path: &crate::graph::Path,
        _ctx: &mut SelectorContext<'_>,
    ) -> Result<EdgeId> {
        self.vi.best_action(state).ok_or_else(|| {
            Error::Inconsistent(
                "state outside the value-iteration table; was the world drawn from the support?"
                    .into(),
            )
        })
    }
}

/// Q-learning hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QLearnParams {
    pub episodes: usize,
    /// Episodes with exploration pinned at `epsilon0` before the linear
    /// decay to 0.05 begins.
    pub exploration_episodes: usize,
    pub epsilon0: f64,
    pub discount: f64,
    pub learning_rate: f64,
}

impl QLearnParams {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.exploration_episodes == 0 {
            return Err(Error::Config("episode counts must be positive".into()));
        }
        if !(0.0 < self.epsilon0 && self.epsilon0 <= 1.0) || !(0.0 < self.discount && self.discount <= 1.0) {
            return Err(Error::Config("epsilon0 and discount must lie in (0, 1]".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }

    fn epsilon_at(&self, episode: usize) -> f64 {
        if episode < self.exploration_episodes {
            return self.epsilon0;
        }
        let decay_span = self.episodes.saturating_sub(self.exploration_episodes).max(1);
        let progress = (episode - self.exploration_episodes) as f64 / decay_span as f64;
        let floor = 0.05;
        (self.epsilon0 + (floor - self.epsilon0) * progress).max(floor)
    }
}

/// Learned action values, keyed by (state code, edge).
#[derive(Debug, Clone, Default)]
pub struct QTable {
    table: HashMap<(u128, EdgeId), f64>,
}

impl QTable {
    pub fn get(&self, state: &EvalState, action: EdgeId) -> f64 {
        self.table.get(&(state.encode(), action)).copied().unwrap_or(0.0)
    }

    fn get_code(&self, code: u128, action: EdgeId) -> f64 {
        self.table.get(&(code, action)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Greedy action over the given candidates (smallest edge id on ties).
    pub fn greedy(&self, state: &EvalState, candidates: &[EdgeId]) -> EdgeId {
        let code = state.encode();
        let mut best = candidates[0];
        let mut best_q = self.get_code(code, best);
        for &a in &candidates[1..] {
            let q = self.get_code(code, a);
            if q > best_q + 1e-15 {
                best = a;
                best_q = q;
            }
        }
        best
    }

    /// Sorted snapshot for serialization.
    pub fn entries(&self) -> Vec<(u128, EdgeId, f64)> {
        let mut rows: Vec<_> = self.table.iter().map(|(&(s, a), &q)| (s, a, q)).collect();
        rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        rows
    }
}

/// Greedy-over-Q selector.
pub struct GreedyQSelector {
    q: Arc<QTable>,
}

impl GreedyQSelector {
    pub fn new(q: Arc<QTable>) -> Self {
        Self { q }
    }
}

impl Selector for GreedyQSelector {
    fn name(&self) -> &str {
        "qlearn"
    }
    fn select(
        &self,
        state: &EvalState,
        path: &crate::graph::Path,
        _ctx: &mut SelectorContext<'_>,
    ) -> Result<EdgeId> {
        let open = unevaluated_on_path(path, state);
        if open.is_empty() {
            return Err(Error::ContractViolation(
                "greedy Q selector invoked on a fully evaluated path".into(),
            ));
        }
        Ok(self.q.greedy(state, &open))
    }
}

#[derive(Debug, Clone)]
pub struct QLearnOutput {
    pub qtable: Arc<QTable>,
    /// Training reward per episode (under the epsilon-greedy behavior).
    pub curve: Vec<f64>,
    /// Exact greedy-policy reward at checkpoints (every 100 episodes over
    /// the last 20% of training), for convergence monitoring.
    pub checkpoints: Vec<(usize, f64)>,
}

impl QLearnOutput {
    pub fn greedy_selector(&self) -> GreedyQSelector {
        GreedyQSelector::new(self.qtable.clone())
    }
}

/// Tabular Q-learning with an epsilon-greedy behavior policy and one-step
/// backups, on an explicit-support distribution.
pub fn tabular_qlearn(
    dist: &WorldDistribution,
    params: &QLearnParams,
    seed: u64,
) -> Result<QLearnOutput> {
    params.validate()?;
    let graph = dist.graph();
    guard_exact(graph)?;
    dist.enumerate_support()?;

    let mut q = QTable::default();
    let mut visits: HashMap<(u128, EdgeId), f64> = HashMap::new();
    let mut curve = Vec::with_capacity(params.episodes);
    let mut checkpoints = Vec::new();
    let mut action_rng = rng_from_seed(child_seed(seed, LABEL_ACTION));
    let world_seed = child_seed(seed, LABEL_WORLD);
    let checkpoint_start = params.episodes - params.episodes / 5;

    for episode in 0..params.episodes {
        let world = dist.sample_world(child_seed(world_seed, episode as u64));
        let epsilon = params.epsilon_at(episode);
        let mut state = EvalState::new(graph.edge_count());
        let mut steps = 0usize;

        loop {
            let candidate = match graph.shortest_path(&state.invalid_set()) {
                Some(p) => p,
                None => break,
            };
            let open = unevaluated_on_path(&candidate, &state);
            if open.is_empty() {
                break;
            }
            let action = if action_rng.gen::<f64>() < epsilon {
                open[action_rng.gen_range(0..open.len())]
            } else {
                q.greedy(&state, &open)
            };

            let code = state.encode();
            let outcome = world.is_valid(action);
            state.record(action, outcome)?;
            steps += 1;

            // one-step backup toward r + gamma * max_a' Q(s', a')
            let next_value = match graph.shortest_path(&state.invalid_set()) {
                Some(next_candidate) => {
                    let next_open = unevaluated_on_path(&next_candidate, &state);
                    if next_open.is_empty() {
                        0.0
                    } else {
                        let next_code = state.encode();
                        next_open
                            .iter()
                            .map(|&a| q.get_code(next_code, a))
                            .fold(f64::NEG_INFINITY, f64::max)
                    }
                }
                None => 0.0,
            };
            let target = -1.0 + params.discount * next_value;
            let n = visits.entry((code, action)).or_insert(0.0);
            *n += 1.0;
            // Robbins-Monro: the configured rate is the first-visit rate and
            // decays harmonically per (state, action) visit, so the table
            // settles instead of oscillating with the sampled worlds
            let rate = params.learning_rate / n.powf(LEARNING_RATE_DECAY);
            let entry = q.table.entry((code, action)).or_insert(0.0);
            *entry += rate * (target - *entry);
        }
        curve.push(-(steps as f64));

        if episode >= checkpoint_start && (episode - checkpoint_start) % 100 == 0 {
            let snapshot = GreedyQSelector::new(Arc::new(q.clone()));
            let reward = exact_expected_reward(dist, &snapshot, &mut SelectorContext::new(graph, 0))?;
            checkpoints.push((episode, reward));
        }
    }

    Ok(QLearnOutput {
        qtable: Arc::new(q),
        curve,
        checkpoints,
    })
}

/// Exact expected reward of a selector under `world`: follows the
/// selector's action distribution through the deterministic transitions, so
/// deterministic selectors cost one pass and stochastic selectors branch
/// with memoization.
pub fn exact_world_reward(
    graph: &ExplicitGraph,
    world: &World,
    selector: &dyn Selector,
    ctx: &mut SelectorContext<'_>,
) -> Result<f64> {
    fn rec(
        graph: &ExplicitGraph,
        world: &World,
        selector: &dyn Selector,
        ctx: &mut SelectorContext<'_>,
        state: &mut EvalState,
        memo: &mut HashMap<u128, f64>,
    ) -> Result<f64> {
        let code = state.encode();
        if let Some(&v) = memo.get(&code) {
            return Ok(v);
        }
        let candidate = match graph.shortest_path(&state.invalid_set()) {
            Some(p) => p,
            None => {
                memo.insert(code, 0.0);
                return Ok(0.0);
            }
        };
        if candidate.edges.iter().all(|&e| state.is_evaluated(e)) {
            memo.insert(code, 0.0);
            return Ok(0.0);
        }
        ctx.step = state.num_evaluated();
        let dist = selector.action_distribution(state, &candidate, ctx)?;
        let choices: Vec<(EdgeId, f64)> = match dist {
            ActionDistribution::Single(e) => vec![(e, 1.0)],
            ActionDistribution::Weighted(w) => w,
        };
        let mut value = -1.0;
        for (edge, prob) in choices {
            if prob == 0.0 {
                continue;
            }
            if !candidate.contains_edge(edge) || state.is_evaluated(edge) {
                return Err(Error::ContractViolation(format!(
                    "selector {} proposed an illegal edge {edge}",
                    selector.name()
                )));
            }
            state.record(edge, world.is_valid(edge))?;
            value += prob * rec(graph, world, selector, ctx, state, memo)?;
            state.unrecord(edge);
        }
        memo.insert(code, value);
        Ok(value)
    }

    let mut memo = HashMap::new();
    rec(
        graph,
        world,
        selector,
        ctx,
        &mut EvalState::new(graph.edge_count()),
        &mut memo,
    )
}

/// Exact expected reward over an explicit support:
/// `sum_w P(w) * E[reward | w]`.
pub fn exact_expected_reward(
    dist: &WorldDistribution,
    selector: &dyn Selector,
    ctx: &mut SelectorContext<'_>,
) -> Result<f64> {
    let support = dist.enumerate_support()?.to_vec();
    let mut total = 0.0;
    for (world, p) in &support {
        if *p == 0.0 {
            continue;
        }
        total += p * exact_world_reward(dist.graph(), world, selector, ctx)?;
    }
    Ok(total)
}

/// Summary statistics for a batch of episode rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorStats {
    pub episodes: usize,
    pub mean: f64,
    pub median: f64,
    /// 95% bootstrap interval for the mean.
    pub ci_mean: (f64, f64),
    /// 95% bootstrap interval for the median.
    pub ci_median: (f64, f64),
    /// Exact expectation, present when the distribution is enumerable.
    pub exact: Option<f64>,
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

const BOOTSTRAP_RESAMPLES: usize = 1000;

fn bootstrap_ci(values: &[f64], stat: impl Fn(&[f64]) -> f64, seed: u64) -> (f64, f64) {
    if values.len() < 2 {
        let v = if values.is_empty() { f64::NAN } else { values[0] };
        return (v, v);
    }
    let mut rng = rng_from_seed(seed);
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut sample = vec![0.0; values.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in &mut sample {
            *slot = values[rng.gen_range(0..values.len())];
        }
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        stats.push(stat(&sample));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |q: f64| stats[((stats.len() - 1) as f64 * q).round() as usize];
    (pick(0.025), pick(0.975))
}

/// Summarizes a reward sample: mean, median, and bootstrap CIs for both.
pub fn summarize_rewards(rewards: &[f64], seed: u64) -> SelectorStats {
    let mut sorted = rewards.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    SelectorStats {
        episodes: sorted.len(),
        mean,
        median: median(&sorted),
        ci_mean: bootstrap_ci(&sorted, |s| s.iter().sum::<f64>() / s.len() as f64, child_seed(seed, 1)),
        ci_median: bootstrap_ci(&sorted, median, child_seed(seed, 2)),
        exact: None,
    }
}

/// Runs one episode per world and summarizes the rewards. `ctx_builder`
/// creates the per-episode context (priors, training worlds) from the
/// episode seed.
pub fn evaluate_on_worlds<'a>(
    graph: &'a ExplicitGraph,
    worlds: &[World],
    selector: &dyn Selector,
    ctx_builder: &dyn Fn(u64) -> SelectorContext<'a>,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rewards = Vec::with_capacity(worlds.len());
    for (i, world) in worlds.iter().enumerate() {
        let mut ctx = ctx_builder(child_seed(seed, i as u64));
        let result = run_lazysp(graph, world, selector, &mut ctx)?;
        rewards.push(result.reward);
    }
    Ok(rewards)
}

/// Monte Carlo evaluation: samples `n_episodes` worlds from the
/// distribution, runs one episode each, and attaches the exact expectation
/// when the support is enumerable.
pub fn evaluate_selector<'a>(
    dist: &'a WorldDistribution,
    selector: &dyn Selector,
    n_episodes: usize,
    seed: u64,
    ctx_builder: &dyn Fn(u64) -> SelectorContext<'a>,
) -> Result<SelectorStats> {
    let worlds: Vec<World> = (0..n_episodes)
        .map(|i| dist.sample_world(child_seed(child_seed(seed, LABEL_WORLD), i as u64)))
        .collect();
    let rewards = evaluate_on_worlds(dist.graph(), &worlds, selector, ctx_builder, seed)?;
    let mut stats = summarize_rewards(&rewards, child_seed(seed, 3));
    if dist.enumerate_support().is_ok() {
        let mut ctx = ctx_builder(child_seed(seed, 4));
        stats.exact = Some(exact_expected_reward(dist, selector, &mut ctx)?);
    }
    Ok(stats)
}
