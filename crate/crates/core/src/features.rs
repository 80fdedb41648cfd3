//! Per-edge heuristic features and the training-world posterior estimator.
//!
//! Six features describe an unevaluated edge on the current candidate path;
//! each is itself a reasonable selection heuristic, and a linear combination
//! of them is the policy class used by [`crate::imitation`]:
//!
//! 1. `prior_invalid` — empirical invalidity frequency over training worlds.
//! 2. `posterior_invalid` — invalidity probability under the softmax
//!    world posterior given the evaluations so far.
//! 3. `index_score` — 1.0 for the first unevaluated edge on the path, 0.0
//!    for the last, linear in between.
//! 4. `delta_length` — increase in shortest-path length if this edge were
//!    invalid (a centrality measure; finite sentinel on disconnection).
//! 5. `delta_eval` — fraction of unevaluated edges on that hallucinated
//!    replacement path (1.0 on disconnection).
//! 6. `post_times_dlen` — `posterior_invalid * delta_length`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{unevaluated_on_path, EdgeId, EvalState, ExplicitGraph, Path, World};

pub const FEATURE_COUNT: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "prior_invalid",
    "posterior_invalid",
    "index_score",
    "delta_length",
    "delta_eval",
    "post_times_dlen",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub prior_invalid: f64,
    pub posterior_invalid: f64,
    pub index_score: f64,
    pub delta_length: f64,
    pub delta_eval: f64,
    pub post_times_dlen: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.prior_invalid,
            self.posterior_invalid,
            self.index_score,
            self.delta_length,
            self.delta_eval,
            self.post_times_dlen,
        ]
    }
}

/// Empirical probability of each edge being invalid across `worlds`.
pub fn empirical_invalidity(worlds: &[World]) -> Vec<f64> {
    if worlds.is_empty() {
        return Vec::new();
    }
    let n_edges = worlds[0].len();
    let mut freq = vec![0.0; n_edges];
    for w in worlds {
        for e in 0..n_edges {
            if !w.is_valid(e) {
                freq[e] += 1.0;
            }
        }
    }
    for f in &mut freq {
        *f /= worlds.len() as f64;
    }
    freq
}

/// Posterior probability per training world given the evaluations in
/// `state`: a softmax over `z_i = -(number of evaluated edges whose outcome
/// disagrees with world i)`. Duplicate worlds in the list act as
/// multiplicity weights.
pub fn world_posterior(state: &EvalState, worlds: &[World]) -> Result<Vec<f64>> {
    if worlds.is_empty() {
        return Err(Error::Config(
            "world posterior needs at least one training world".into(),
        ));
    }
    let evaluated: Vec<(EdgeId, bool)> = (0..state.len())
        .filter(|&e| state.is_evaluated(e))
        .map(|e| (e, state.mark(e) == crate::graph::EdgeMark::Valid))
        .collect();
    let scores: Vec<f64> = worlds
        .iter()
        .map(|w| {
            let disagreements = evaluated
                .iter()
                .filter(|&&(e, outcome)| w.is_valid(e) != outcome)
                .count();
            -(disagreements as f64)
        })
        .collect();
    // softmax, shifted by the max score for stability
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scores.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    Ok(out)
}

/// Probability that `edge` is valid under a precomputed world posterior.
pub fn edge_posterior_given(posterior: &[f64], edge: EdgeId, worlds: &[World]) -> f64 {
    posterior
        .iter()
        .zip(worlds)
        .filter(|(_, w)| w.is_valid(edge))
        .map(|(&p, _)| p)
        .sum()
}

/// Probability that `edge` is valid given the evaluations in `state`.
pub fn edge_posterior(state: &EvalState, edge: EdgeId, worlds: &[World]) -> Result<f64> {
    let posterior = world_posterior(state, worlds)?;
    Ok(edge_posterior_given(&posterior, edge, worlds))
}

/// Computes features for every unevaluated edge on `path`, sharing one
/// posterior computation across the whole candidate set.
///
/// Returns `(edge, features)` pairs in path order.
pub fn features_for_path(
    state: &EvalState,
    path: &Path,
    graph: &ExplicitGraph,
    priors: &[f64],
    training_worlds: &[World],
) -> Result<Vec<(EdgeId, FeatureVector)>> {
    let open = unevaluated_on_path(path, state);
    if open.is_empty() {
        return Ok(Vec::new());
    }
    let posterior = world_posterior(state, training_worlds)?;
    let invalid = state.invalid_set();
    let sentinel = graph.delta_length_sentinel();
    let denom = (open.len() - 1).max(1) as f64;

    let mut out = Vec::with_capacity(open.len());
    for (rank, &edge) in open.iter().enumerate() {
        let posterior_invalid = 1.0 - edge_posterior_given(&posterior, edge, training_worlds);
        let index_score = 1.0 - rank as f64 / denom;

        let mut removed: HashSet<EdgeId> = invalid.clone();
        removed.insert(edge);
        let (delta_length, delta_eval) = match graph.shortest_path(&removed) {
            Some(alt) => {
                let open_frac = unevaluated_on_path(&alt, state).len() as f64
                    / alt.edges.len() as f64;
                ((alt.length - path.length).max(0.0), open_frac)
            }
            None => (sentinel, 1.0),
        };

        out.push((
            edge,
            FeatureVector {
                prior_invalid: priors[edge],
                posterior_invalid,
                index_score,
                delta_length,
                delta_eval,
                post_times_dlen: posterior_invalid * delta_length,
            },
        ));
    }
    Ok(out)
}

/// Features for a single unevaluated edge on the path.
pub fn compute_features(
    state: &EvalState,
    edge: EdgeId,
    path: &Path,
    graph: &ExplicitGraph,
    priors: &[f64],
    training_worlds: &[World],
) -> Result<FeatureVector> {
    if !path.contains_edge(edge) || state.is_evaluated(edge) {
        return Err(Error::ContractViolation(format!(
            "features requested for edge {edge} that is not an open edge of the path"
        )));
    }
    let all = features_for_path(state, path, graph, priors, training_worlds)?;
    Ok(all
        .into_iter()
        .find(|&(e, _)| e == edge)
        .expect("edge is open on the path")
        .1)
}
