//! Training a linear edge-scoring policy by imitating the clairvoyant
//! oracle (DAgger-style iterative dataset aggregation).
//!
//! Each iteration rolls in a mixture of a base policy and the current
//! learner, labels every visited state with the oracle's pick, aggregates
//! the labeled states into a growing classification dataset, and refits a
//! multiclass classifier over the candidate edges of each state. The best
//! iterate on a held-out validation set is returned.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    empirical_invalidity, features_for_path, FeatureVector, FEATURE_COUNT,
};
use crate::graph::{EdgeId, EvalState, ExplicitGraph, Path, World};
use crate::oracle::{approx_oracle_action, OracleSelector};
use crate::rl::{evaluate_on_worlds, median};
use crate::rng::{child_seed, rng_from_seed};
use crate::search::{
    run_lazysp, ActionDistribution, BaselineKind, Selector, SelectorContext,
};
use crate::worlds::WorldDistribution;

use std::sync::Arc;

const LABEL_EPISODE: u64 = 0xE9;
const LABEL_VALIDATE: u64 = 0x7A;
const LABEL_TRAINSET: u64 = 0x31;

/// A linear scorer over the six per-edge features. Acts as a selector by
/// taking the argmax of `w . f(edge) + b` over the unevaluated edges of the
/// candidate path, with ties going to path order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPolicy {
    pub weights: [f64; FEATURE_COUNT],
    pub bias: f64,
}

impl LinearPolicy {
    pub fn zero() -> Self {
        Self {
            weights: [0.0; FEATURE_COUNT],
            bias: 0.0,
        }
    }

    pub fn new(weights: [f64; FEATURE_COUNT], bias: f64) -> Result<Self> {
        if !weights.iter().all(|w| w.is_finite()) || !bias.is_finite() {
            return Err(Error::Config("policy weights must be finite".into()));
        }
        Ok(Self { weights, bias })
    }

    /// Weight 1 on the posterior-invalidity feature: reproduces the
    /// posterior fail-fast selector inside this policy class.
    pub fn posterior_fail_fast() -> Self {
        let mut weights = [0.0; FEATURE_COUNT];
        weights[1] = 1.0;
        Self { weights, bias: 0.0 }
    }

    pub fn score(&self, f: &FeatureVector) -> f64 {
        let x = f.as_array();
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

impl Selector for LinearPolicy {
    fn name(&self) -> &str {
        "policy"
    }
    fn select(
        &self,
        state: &EvalState,
        path: &Path,
        ctx: &mut SelectorContext<'_>,
    ) -> Result<EdgeId> {
        let worlds = ctx
            .training_worlds
            .ok_or_else(|| Error::Config("linear policy needs training worlds for features".into()))?;
        let priors = ctx
            .priors
            .as_ref()
            .ok_or_else(|| Error::Config("linear policy needs per-edge priors".into()))?;
        let feats = features_for_path(state, path, ctx.graph, priors, worlds)?;
        if feats.is_empty() {
            return Err(Error::ContractViolation(
                "linear policy invoked on a fully evaluated path".into(),
            ));
        }
        let mut best = feats[0].0;
        let mut best_score = self.score(&feats[0].1);
        for (edge, f) in &feats[1..] {
            let s = self.score(f);
            if s > best_score {
                best_score = s;
                best = *edge;
            }
        }
        Ok(best)
    }
}

/// One labeled state: the feature vectors of every candidate edge on the
/// path, and which candidate the oracle picked.
#[derive(Debug, Clone)]
pub struct DatasetRow {
    pub candidates: Vec<(EdgeId, FeatureVector)>,
    pub oracle_index: usize,
    pub iteration: usize,
}

/// Rows aggregated across iterations; rows are append-only.
#[derive(Debug, Clone, Default)]
pub struct AggregatedDataset {
    pub rows: Vec<DatasetRow>,
}

impl AggregatedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Mixing schedule for the roll-in policy across iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BetaSchedule {
    /// `beta_1 = 1`, `beta_i = 0` for `i > 1`.
    FirstIterationOnly,
    Constant(f64),
    /// One value per iteration; reused cyclically if shorter than N.
    Custom(Vec<f64>),
}

impl BetaSchedule {
    pub fn beta(&self, iteration: usize) -> f64 {
        match self {
            BetaSchedule::FirstIterationOnly => {
                if iteration <= 1 {
                    1.0
                } else {
                    0.0
                }
            }
            BetaSchedule::Constant(b) => *b,
            BetaSchedule::Custom(v) => v[(iteration - 1) % v.len()],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            BetaSchedule::FirstIterationOnly => true,
            BetaSchedule::Constant(b) => (0.0..=1.0).contains(b),
            BetaSchedule::Custom(v) => {
                !v.is_empty() && v.iter().all(|b| (0.0..=1.0).contains(b))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("beta values must lie in [0, 1]".into()))
        }
    }
}

/// Which policy generates the visited-state distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RollInMode {
    /// The clairvoyant oracle itself.
    Oracle,
    /// A fixed baseline selector.
    Heuristic(BaselineKind),
    /// The baseline with the best mean training reward, chosen up front.
    BestHeuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub beta: BetaSchedule,
    pub rollin: RollInMode,
    pub regularization: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Single supervised pass over oracle roll-ins (no aggregation
    /// iterations): plain behavior cloning.
    pub fn behavior_clone(episodes: usize, regularization: f64, seed: u64) -> Self {
        Self {
            iterations: 1,
            episodes_per_iteration: episodes,
            beta: BetaSchedule::FirstIterationOnly,
            rollin: RollInMode::Oracle,
            regularization,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.episodes_per_iteration == 0 {
            return Err(Error::Config("iterations and episodes must be positive".into()));
        }
        if self.regularization < 0.0 {
            return Err(Error::Config("regularization must be non-negative".into()));
        }
        self.beta.validate()
    }
}

/// Training inputs: the graph plus train/validation world sets. The train
/// worlds double as the feature posterior's reference set.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub graph: Arc<ExplicitGraph>,
    pub train: Vec<World>,
    pub validation: Vec<World>,
}

impl TrainSet {
    pub fn new(graph: Arc<ExplicitGraph>, train: Vec<World>, validation: Vec<World>) -> Result<Self> {
        if train.is_empty() || validation.is_empty() {
            return Err(Error::Config("train and validation sets must be nonempty".into()));
        }
        Ok(Self {
            graph,
            train,
            validation,
        })
    }

    /// Draws train/validation worlds from a distribution.
    pub fn from_distribution(
        dist: &WorldDistribution,
        n_train: usize,
        n_validation: usize,
        seed: u64,
    ) -> Result<Self> {
        let root = child_seed(seed, LABEL_TRAINSET);
        let train = (0..n_train)
            .map(|i| dist.sample_world(child_seed(root, i as u64)))
            .collect();
        let validation = (0..n_validation)
            .map(|i| dist.sample_world(child_seed(root, (n_train + i) as u64)))
            .collect();
        Self::new(dist.graph().clone(), train, validation)
    }
}

/// Per-step stochastic blend: with probability `beta` the roll-in policy
/// acts, otherwise the learner does.
pub struct MixtureSelector {
    rollin: Box<dyn Selector>,
    learner: Box<dyn Selector>,
    beta: f64,
}

impl MixtureSelector {
    pub fn new(rollin: Box<dyn Selector>, learner: Box<dyn Selector>, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Config(format!("beta {beta} outside [0, 1]")));
        }
        Ok(Self {
            rollin,
            learner,
            beta,
        })
    }
}

impl Selector for MixtureSelector {
    fn name(&self) -> &str {
        "mixture"
    }
    fn select(
        &self,
        state: &EvalState,
        path: &Path,
        ctx: &mut SelectorContext<'_>,
    ) -> Result<EdgeId> {
        let use_rollin = match self.beta {
            b if b >= 1.0 => true,
            b if b <= 0.0 => false,
            b => ctx.rng.gen::<f64>() < b,
        };
        if use_rollin {
            self.rollin.select(state, path, ctx)
        } else {
            self.learner.select(state, path, ctx)
        }
    }
    fn action_distribution(
        &self,
        state: &EvalState,
        path: &Path,
        ctx: &mut SelectorContext<'_>,
    ) -> Result<ActionDistribution> {
        let merge = |acc: &mut Vec<(EdgeId, f64)>, dist: ActionDistribution, scale: f64| {
            let pairs = match dist {
                ActionDistribution::Single(e) => vec![(e, 1.0)],
                ActionDistribution::Weighted(w) => w,
            };
            for (e, p) in pairs {
                match acc.iter_mut().find(|(ae, _)| *ae == e) {
                    Some((_, ap)) => *ap += scale * p,
                    None => acc.push((e, scale * p)),
                }
            }
        };
        let mut acc = Vec::new();
        if self.beta > 0.0 {
            merge(&mut acc, self.rollin.action_distribution(state, path, ctx)?, self.beta);
        }
        if self.beta < 1.0 {
            merge(
                &mut acc,
                self.learner.action_distribution(state, path, ctx)?,
                1.0 - self.beta,
            );
        }
        Ok(ActionDistribution::Weighted(acc))
    }
}

/// Picks the baseline with the best mean reward over the training worlds.
/// Ties go to list order.
pub fn select_best_heuristic(
    graph: &ExplicitGraph,
    train_worlds: &[World],
    candidates: &[BaselineKind],
    seed: u64,
) -> Result<BaselineKind> {
    if candidates.is_empty() {
        return Err(Error::Config("candidate list must be nonempty".into()));
    }
    let priors = empirical_invalidity(train_worlds);
    let mut best = candidates[0];
    let mut best_reward = f64::NEG_INFINITY;
    for &kind in candidates {
        let selector = kind.build();
        let rewards = evaluate_on_worlds(
            graph,
            train_worlds,
            selector.as_ref(),
            &|episode_seed| {
                SelectorContext::new(graph, episode_seed)
                    .with_priors(priors.clone())
                    .with_training_worlds(train_worlds)
            },
            child_seed(seed, kind as u64),
        )?;
        let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
        if mean > best_reward {
            best_reward = mean;
            best = kind;
        }
    }
    Ok(best)
}

/// Feature standardization frozen from first-iteration data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: [f64; FEATURE_COUNT],
    pub std: [f64; FEATURE_COUNT],
}

impl Standardization {
    fn from_rows<'a>(rows: impl Iterator<Item = &'a DatasetRow> + Clone) -> Self {
        let mut mean = [0.0; FEATURE_COUNT];
        let mut count = 0.0;
        for row in rows.clone() {
            for (_, f) in &row.candidates {
                for (m, v) in mean.iter_mut().zip(f.as_array()) {
                    *m += v;
                }
                count += 1.0;
            }
        }
        for m in &mut mean {
            *m /= count;
        }
        let mut var = [0.0; FEATURE_COUNT];
        for row in rows {
            for (_, f) in &row.candidates {
                for ((s, v), m) in var.iter_mut().zip(f.as_array()).zip(mean) {
                    *s += (v - m) * (v - m);
                }
            }
        }
        let mut std = [0.0; FEATURE_COUNT];
        for (s, v) in std.iter_mut().zip(var) {
            let sd = (v / count).sqrt();
            *s = if sd > 1e-12 { sd } else { 1.0 };
        }
        Self { mean, std }
    }

    fn apply(&self, f: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let mut x = f.as_array();
        for ((v, m), s) in x.iter_mut().zip(self.mean).zip(self.std) {
            *v = (*v - m) / s;
        }
        x
    }

    /// Rewrites standardized-space weights as raw-feature weights plus a
    /// bias, so the stored policy applies directly to raw features.
    fn fold(&self, w: &[f64; FEATURE_COUNT]) -> LinearPolicy {
        let mut weights = [0.0; FEATURE_COUNT];
        let mut bias = 0.0;
        for j in 0..FEATURE_COUNT {
            weights[j] = w[j] / self.std[j];
            bias -= w[j] * self.mean[j] / self.std[j];
        }
        LinearPolicy { weights, bias }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub train_accuracy: f64,
    pub newton_iterations: usize,
    pub gradient_norm: f64,
    /// True when every row had a single candidate, leaving nothing to fit.
    pub degenerate: bool,
    pub standardization: Standardization,
}

fn solve_6x6(mut a: [[f64; FEATURE_COUNT]; FEATURE_COUNT], mut b: [f64; FEATURE_COUNT]) -> Option<[f64; FEATURE_COUNT]> {
    let n = FEATURE_COUNT;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; FEATURE_COUNT];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Loss, gradient and Hessian of the regularized multiclass objective at
/// `w` (standardized feature space): mean cross-entropy of the softmax over
/// each row's candidate scores against the oracle pick, plus
/// `reg/2 * |w|^2`.
fn objective(
    rows: &[DatasetRow],
    standardization: &Standardization,
    w: &[f64; FEATURE_COUNT],
    reg: f64,
) -> (f64, [f64; FEATURE_COUNT], [[f64; FEATURE_COUNT]; FEATURE_COUNT]) {
    let mut loss = 0.0;
    let mut grad = [0.0; FEATURE_COUNT];
    let mut hess = [[0.0; FEATURE_COUNT]; FEATURE_COUNT];
    let r = rows.len() as f64;

    for row in rows {
        let xs: Vec<[f64; FEATURE_COUNT]> = row
            .candidates
            .iter()
            .map(|(_, f)| standardization.apply(f))
            .collect();
        let scores: Vec<f64> = xs
            .iter()
            .map(|x| x.iter().zip(w).map(|(v, wj)| v * wj).sum())
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let probs: Vec<f64> = exps.iter().map(|e| e / z).collect();

        loss -= (probs[row.oracle_index].max(1e-300)).ln() / r;

        let mut expected = [0.0; FEATURE_COUNT];
        for (x, p) in xs.iter().zip(&probs) {
            for j in 0..FEATURE_COUNT {
                expected[j] += p * x[j];
            }
        }
        let label = &xs[row.oracle_index];
        for j in 0..FEATURE_COUNT {
            grad[j] += (expected[j] - label[j]) / r;
        }
        // E[x x^T] - E[x] E[x]^T
        for (x, p) in xs.iter().zip(&probs) {
            for j in 0..FEATURE_COUNT {
                for k in 0..FEATURE_COUNT {
                    hess[j][k] += p * x[j] * x[k] / r;
                }
            }
        }
        for j in 0..FEATURE_COUNT {
            for k in 0..FEATURE_COUNT {
                hess[j][k] -= expected[j] * expected[k] / r;
            }
        }
    }

    for j in 0..FEATURE_COUNT {
        loss += 0.5 * reg * w[j] * w[j];
        grad[j] += reg * w[j];
        hess[j][j] += reg;
    }
    (loss, grad, hess)
}

const GRAD_TOL: f64 = 1e-6;
const MAX_NEWTON_ITERS: usize = 200;

/// Fits the multiclass classifier by damped Newton iteration (deterministic;
/// the objective is convex). Standardization comes from the rows of the
/// earliest iteration present and is folded into the returned weights.
pub fn fit_classifier_detailed(
    dataset: &AggregatedDataset,
    reg: f64,
) -> Result<(LinearPolicy, FitReport)> {
    if dataset.rows.is_empty() {
        return Err(Error::Config("cannot fit a classifier on an empty dataset".into()));
    }
    let first_iteration = dataset.rows.iter().map(|r| r.iteration).min().unwrap();
    let standardization = Standardization::from_rows(
        dataset.rows.iter().filter(|r| r.iteration == first_iteration),
    );

    let informative = dataset.rows.iter().any(|r| r.candidates.len() > 1);
    let mut w = [0.0; FEATURE_COUNT];
    let mut iters = 0;
    let mut grad_norm = 0.0;

    if informative {
        let (mut loss, mut grad, mut hess) = objective(&dataset.rows, &standardization, &w, reg);
        loop {
            grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if grad_norm <= GRAD_TOL || iters >= MAX_NEWTON_ITERS {
                break;
            }
            let neg = {
                let mut g = grad;
                for v in &mut g {
                    *v = -*v;
                }
                g
            };
            let Some(direction) = solve_6x6(hess, neg) else {
                break;
            };
            // backtracking keeps the iteration monotone
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut candidate = w;
                for j in 0..FEATURE_COUNT {
                    candidate[j] += step * direction[j];
                }
                let (new_loss, new_grad, new_hess) =
                    objective(&dataset.rows, &standardization, &candidate, reg);
                if new_loss <= loss + 1e-15 {
                    w = candidate;
                    loss = new_loss;
                    grad = new_grad;
                    hess = new_hess;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            iters += 1;
            if !accepted {
                break;
            }
        }
    }

    // training 0/1 accuracy under the fitted weights
    let mut correct = 0usize;
    for row in &dataset.rows {
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (i, (_, f)) in row.candidates.iter().enumerate() {
            let x = standardization.apply(f);
            let s: f64 = x.iter().zip(&w).map(|(v, wj)| v * wj).sum();
            if s > best_score {
                best_score = s;
                best = i;
            }
        }
        if best == row.oracle_index {
            correct += 1;
        }
    }

    let policy = standardization.fold(&w);
    Ok((
        policy,
        FitReport {
            train_accuracy: correct as f64 / dataset.rows.len() as f64,
            newton_iterations: iters,
            gradient_norm: grad_norm,
            degenerate: !informative,
            standardization,
        },
    ))
}

pub fn fit_classifier(dataset: &AggregatedDataset, reg: f64) -> Result<LinearPolicy> {
    fit_classifier_detailed(dataset, reg).map(|(p, _)| p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub dataset_rows: usize,
    pub train_accuracy: f64,
    pub val_mean_reward: f64,
    pub val_median_reward: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub policy: LinearPolicy,
    pub best_iteration: usize,
    pub standardization: Standardization,
    pub log: Vec<IterationLog>,
    /// Episodes dropped because the oracle failed on them.
    pub skipped_episodes: usize,
    pub dataset: AggregatedDataset,
}

/// Iterative oracle imitation. Per iteration: roll in the beta-mixture of
/// the roll-in policy and the current learner on sampled training worlds,
/// label visited states with the clairvoyant oracle, aggregate, refit.
/// Returns the iterate with the best validation mean reward.
pub fn train(data: &TrainSet, config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    let graph = data.graph.as_ref();
    let priors = empirical_invalidity(&data.train);
    let rollin_kind = match config.rollin {
        RollInMode::BestHeuristic => Some(select_best_heuristic(
            graph,
            &data.train,
            &BaselineKind::ALL,
            child_seed(config.seed, 0xBE),
        )?),
        RollInMode::Heuristic(kind) => Some(kind),
        RollInMode::Oracle => None,
    };

    let mut dataset = AggregatedDataset::default();
    let mut learner = LinearPolicy::zero();
    let mut skipped = 0usize;
    let mut log = Vec::new();
    let mut best: Option<(f64, usize, LinearPolicy, Standardization)> = None;

    for iteration in 1..=config.iterations {
        let beta = config.beta.beta(iteration);
        for episode in 0..config.episodes_per_iteration {
            let episode_seed = child_seed(
                child_seed(config.seed, LABEL_EPISODE),
                ((iteration as u64) << 32) | episode as u64,
            );
            let world = {
                let mut rng = rng_from_seed(child_seed(episode_seed, 0));
                data.train[rng.gen_range(0..data.train.len())].clone()
            };
            let rollin: Box<dyn Selector> = match rollin_kind {
                None => Box::new(OracleSelector::new(world.clone())),
                Some(kind) => kind.build(),
            };
            let mixture = MixtureSelector::new(rollin, Box::new(learner.clone()), beta)?;
            let mut ctx = SelectorContext::new(graph, child_seed(episode_seed, 1))
                .with_priors(priors.clone())
                .with_training_worlds(&data.train);
            let result = run_lazysp(graph, &world, &mixture, &mut ctx)?;

            let mut rows = Vec::with_capacity(result.trace.len());
            let mut failed = false;
            for step in &result.trace {
                let oracle_edge = match approx_oracle_action(&step.state, &step.path, &world, graph)
                {
                    Ok(e) => e,
                    Err(_) => {
                        failed = true;
                        break;
                    }
                };
                let candidates =
                    features_for_path(&step.state, &step.path, graph, &priors, &data.train)?;
                let oracle_index = candidates
                    .iter()
                    .position(|&(e, _)| e == oracle_edge)
                    .ok_or_else(|| {
                        Error::Inconsistent("oracle label is not a candidate edge".into())
                    })?;
                rows.push(DatasetRow {
                    candidates,
                    oracle_index,
                    iteration,
                });
            }
            if failed {
                skipped += 1;
            } else {
                dataset.rows.extend(rows);
            }
        }

        let (policy, report) = fit_classifier_detailed(&dataset, config.regularization)?;
        let val_rewards = evaluate_on_worlds(
            graph,
            &data.validation,
            &policy,
            &|episode_seed| {
                SelectorContext::new(graph, episode_seed)
                    .with_priors(priors.clone())
                    .with_training_worlds(&data.train)
            },
            child_seed(config.seed, LABEL_VALIDATE),
        )?;
        let val_mean = val_rewards.iter().sum::<f64>() / val_rewards.len() as f64;
        let val_median = {
            let mut sorted = val_rewards.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            median(&sorted)
        };
        log.push(IterationLog {
            iteration,
            dataset_rows: dataset.len(),
            train_accuracy: report.train_accuracy,
            val_mean_reward: val_mean,
            val_median_reward: val_median,
        });
        if best.as_ref().map_or(true, |(r, _, _, _)| val_mean > *r) {
            best = Some((val_mean, iteration, policy.clone(), report.standardization.clone()));
        }
        learner = policy;
    }

    let (_, best_iteration, policy, standardization) = best.expect("at least one iteration ran");
    Ok(TrainOutput {
        policy,
        best_iteration,
        standardization,
        log,
        skipped_episodes: skipped,
        dataset,
    })
}
