//! Exact Bayesian edge evaluation as decision region determination (DRD).
//!
//! Hypotheses are worlds with priors; tests are edges with costs; regions
//! group hypotheses sharing the same shortest feasible path. Identifying
//! the region that contains the truth identifies the shortest feasible
//! path, and unlike the lazy loop the policy may evaluate edges off the
//! current candidate path.
//!
//! The EC2 reduction places an imaginary edge between every pair of
//! hypotheses in different regions, weighted by the product of their
//! priors. Evaluations cut the edges incident to eliminated hypotheses, and
//! all weight is gone exactly when the surviving version space sits inside
//! one region. Because regions are disjoint, the total surviving weight has
//! the closed form `(sum_i m_i)^2 - sum_i m_i^2) / 2` over surviving region
//! masses `m_i`. Greedily maximizing expected weight reduction per unit
//! cost is near-optimal: the objective is adaptive submodular.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, ExplicitGraph, Path, World};

/// A hypothesis: a full assignment of outcomes to tests, with a prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub outcomes: Vec<bool>,
    pub prior: f64,
}

/// A decision region: hypothesis indices sharing one answer. For shortest
/// path instances the answer is the region's path (`None` = no feasible
/// path exists).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub members: Vec<usize>,
    pub path: Option<Path>,
}

/// A decision region determination instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DrdInstance {
    pub hypotheses: Vec<Hypothesis>,
    /// Cost per test; tests are indexed like edges.
    pub costs: Vec<f64>,
    pub regions: Vec<Region>,
}

impl DrdInstance {
    pub fn new(hypotheses: Vec<Hypothesis>, costs: Vec<f64>, regions: Vec<Region>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::Config("instance needs at least one hypothesis".into()));
        }
        let n_tests = costs.len();
        let total: f64 = hypotheses.iter().map(|h| h.prior).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("priors sum to {total}, not 1")));
        }
        for h in &hypotheses {
            if h.prior <= 0.0 {
                return Err(Error::Config("hypothesis priors must be strictly positive".into()));
            }
            if h.outcomes.len() != n_tests {
                return Err(Error::Config("hypothesis outcome vector length mismatch".into()));
            }
        }
        if costs.iter().any(|&c| c <= 0.0) {
            return Err(Error::Config("test costs must be strictly positive".into()));
        }
        let mut seen = vec![false; hypotheses.len()];
        for r in &regions {
            for &m in &r.members {
                if m >= hypotheses.len() || seen[m] {
                    return Err(Error::Config(
                        "regions must partition the hypothesis set".into(),
                    ));
                }
                seen[m] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Config("regions must cover every hypothesis".into()));
        }
        Ok(Self {
            hypotheses,
            costs,
            regions,
        })
    }

    pub fn n_tests(&self) -> usize {
        self.costs.len()
    }

    pub fn min_prior(&self) -> f64 {
        self.hypotheses
            .iter()
            .map(|h| h.prior)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Observed test outcomes, in observation order, without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeVector {
    entries: Vec<(EdgeId, bool)>,
}

impl OutcomeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(EdgeId, bool)] {
        &self.entries
    }

    pub fn contains_test(&self, test: EdgeId) -> bool {
        self.entries.iter().any(|&(t, _)| t == test)
    }

    pub fn push(&mut self, test: EdgeId, outcome: bool) -> Result<()> {
        if self.contains_test(test) {
            return Err(Error::ContractViolation(format!(
                "test {test} already has an observed outcome"
            )));
        }
        self.entries.push((test, outcome));
        Ok(())
    }

    pub fn consistent(&self, hypothesis: &Hypothesis) -> bool {
        self.entries
            .iter()
            .all(|&(t, o)| hypothesis.outcomes[t] == o)
    }
}

/// Prior mass of each region restricted to the version space.
fn surviving_masses(instance: &DrdInstance, outcomes: &OutcomeVector) -> Vec<f64> {
    instance
        .regions
        .iter()
        .map(|r| {
            r.members
                .iter()
                .map(|&m| &instance.hypotheses[m])
                .filter(|h| outcomes.consistent(h))
                .map(|h| h.prior)
                .sum()
        })
        .collect()
}

fn weight_of_masses(masses: &[f64]) -> f64 {
    let sum: f64 = masses.iter().sum();
    let sq: f64 = masses.iter().map(|m| m * m).sum();
    0.5 * (sum * sum - sq)
}

/// Total weight of uncut inter-region edges given the outcomes so far:
/// `((sum_i m_i)^2 - sum_i m_i^2) / 2` over surviving region masses.
pub fn region_weight(instance: &DrdInstance, outcomes: &OutcomeVector) -> Result<f64> {
    let masses = surviving_masses(instance, outcomes);
    if masses.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Inconsistent(
            "no hypothesis is consistent with the observed outcomes".into(),
        ));
    }
    Ok(weight_of_masses(&masses))
}

/// Normalized progress: 0 before any edge is cut, exactly 1 once the
/// version space fits inside a single region. An instance that starts with
/// zero weight is already solved, so its progress is defined as 1.
pub fn fec(instance: &DrdInstance, outcomes: &OutcomeVector) -> Result<f64> {
    let initial = region_weight(instance, &OutcomeVector::new())?;
    if initial <= 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - region_weight(instance, outcomes)? / initial)
}

/// The greedy EC2 test choice: maximize expected weight reduction per unit
/// cost, with the outcome expectation taken under the posterior over the
/// version space. Ties break to the smallest test id.
///
/// Errs when multiple regions survive but no unperformed test discriminates
/// between surviving hypotheses (the instance cannot be solved).
pub fn ec2_select(instance: &DrdInstance, outcomes: &OutcomeVector) -> Result<EdgeId> {
    let survivors: Vec<&Hypothesis> = instance
        .hypotheses
        .iter()
        .filter(|h| outcomes.consistent(h))
        .collect();
    let total_mass: f64 = survivors.iter().map(|h| h.prior).sum();
    if total_mass <= 0.0 {
        return Err(Error::Inconsistent(
            "no hypothesis is consistent with the observed outcomes".into(),
        ));
    }
    let current = region_weight(instance, outcomes)?;

    let mut best: Option<(EdgeId, f64)> = None;
    for test in 0..instance.n_tests() {
        if outcomes.contains_test(test) {
            continue;
        }
        let mass_true: f64 = survivors
            .iter()
            .filter(|h| h.outcomes[test])
            .map(|h| h.prior)
            .sum();
        let mut expected_gain = 0.0;
        for (outcome, mass) in [(true, mass_true), (false, total_mass - mass_true)] {
            if mass <= 0.0 {
                continue;
            }
            let mut extended = outcomes.clone();
            extended.push(test, outcome)?;
            let reduced = region_weight(instance, &extended)?;
            expected_gain += (mass / total_mass) * (current - reduced);
        }
        let score = expected_gain / instance.costs[test];
        if score > 0.0 && best.map_or(true, |(_, s)| score > s + 1e-15) {
            best = Some((test, score));
        }
    }
    best.map(|(t, _)| t).ok_or_else(|| {
        Error::Inconsistent(
            "multiple regions survive but no unperformed test discriminates them".into(),
        )
    })
}

/// Indices of regions with surviving mass.
fn live_regions(instance: &DrdInstance, outcomes: &OutcomeVector) -> Vec<usize> {
    surviving_masses(instance, outcomes)
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Groups worlds by the identity of their shortest feasible path; worlds
/// with no feasible path form their own region. Tests are the graph's
/// edges (unit cost unless overridden later).
pub fn build_regions(
    graph: &ExplicitGraph,
    worlds_with_priors: &[(World, f64)],
) -> Result<DrdInstance> {
    if worlds_with_priors.is_empty() {
        return Err(Error::Config("world set must be nonempty".into()));
    }
    let hypotheses: Vec<Hypothesis> = worlds_with_priors
        .iter()
        .map(|(w, p)| {
            if w.len() != graph.edge_count() {
                return Err(Error::InvalidWorld(
                    "hypothesis world has the wrong number of edges".into(),
                ));
            }
            Ok(Hypothesis {
                outcomes: (0..w.len()).map(|e| w.is_valid(e)).collect(),
                prior: *p,
            })
        })
        .collect::<Result<_>>()?;

    // deterministic tie-broken shortest paths make region identity well
    // defined; key by the vertex sequence
    let mut groups: Vec<(Option<Path>, Vec<usize>)> = Vec::new();
    for (i, (w, _)) in worlds_with_priors.iter().enumerate() {
        let removed = w.invalid_edges().collect();
        let path = graph.shortest_path(&removed);
        let key: Option<Vec<usize>> = path.as_ref().map(|p| p.vertices.clone());
        match groups
            .iter_mut()
            .find(|(p, _)| p.as_ref().map(|p| &p.vertices) == key.as_ref())
        {
            Some((_, members)) => members.push(i),
            None => groups.push((path, vec![i])),
        }
    }
    let regions = groups
        .into_iter()
        .map(|(path, members)| Region { members, path })
        .collect();
    DrdInstance::new(hypotheses, vec![1.0; graph.edge_count()], regions)
}

/// One step of a Bayesian run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesStep {
    pub test: EdgeId,
    pub outcome: bool,
    pub cost: f64,
    pub fec: f64,
    pub surviving_regions: usize,
}

/// Outcome of a full Bayesian run.
#[derive(Debug, Clone)]
pub struct BayesRunResult {
    /// The declared shortest feasible path (`None` = certified no-path).
    pub path: Option<Path>,
    pub evaluated: Vec<(EdgeId, bool)>,
    pub total_cost: f64,
    pub steps: Vec<BayesStep>,
}

/// Runs the greedy policy on an instance, reading outcomes from `truth`,
/// until the version space fits in one region. Returns that region's index
/// along with the run record.
pub fn run_ec2(
    instance: &DrdInstance,
    truth: &dyn Fn(EdgeId) -> bool,
) -> Result<(usize, BayesRunResult)> {
    let mut outcomes = OutcomeVector::new();
    let mut evaluated = Vec::new();
    let mut steps = Vec::new();
    let mut total_cost = 0.0;

    loop {
        let live = live_regions(instance, &outcomes);
        match live.len() {
            0 => {
                return Err(Error::Realizability(
                    "observed outcomes are inconsistent with every hypothesis".into(),
                ))
            }
            1 => {
                return Ok((
                    live[0],
                    BayesRunResult {
                        path: instance.regions[live[0]].path.clone(),
                        evaluated,
                        total_cost,
                        steps,
                    },
                ))
            }
            _ => {}
        }
        let test = ec2_select(instance, &outcomes)?;
        let outcome = truth(test);
        outcomes.push(test, outcome)?;
        evaluated.push((test, outcome));
        total_cost += instance.costs[test];
        steps.push(BayesStep {
            test,
            outcome,
            cost: instance.costs[test],
            fec: fec(instance, &outcomes)?,
            surviving_regions: live_regions(instance, &outcomes).len(),
        });
    }
}

/// Full Bayesian shortest-path run: build regions from the hypothesis
/// worlds, then evaluate edges greedily on `true_world` until one region
/// holds all surviving mass. `costs` overrides the unit edge costs.
pub fn run_bayesian_lsp(
    graph: &ExplicitGraph,
    worlds_with_priors: &[(World, f64)],
    true_world: &World,
    costs: Option<Vec<f64>>,
) -> Result<BayesRunResult> {
    let mut instance = build_regions(graph, worlds_with_priors)?;
    if let Some(costs) = costs {
        if costs.len() != instance.n_tests() {
            return Err(Error::Config("cost vector length must match edge count".into()));
        }
        if costs.iter().any(|&c| c <= 0.0) {
            return Err(Error::Config("test costs must be strictly positive".into()));
        }
        instance.costs = costs;
    }
    if true_world.len() != graph.edge_count() {
        return Err(Error::InvalidWorld("true world has the wrong number of edges".into()));
    }
    let realizable = instance
        .hypotheses
        .iter()
        .any(|h| (0..h.outcomes.len()).all(|e| h.outcomes[e] == true_world.is_valid(e)));
    if !realizable {
        return Err(Error::Realizability(
            "the true world is not in the hypothesis support".into(),
        ));
    }
    run_ec2(&instance, &|e| true_world.is_valid(e)).map(|(_, r)| r)
}

/// Expected cost of the greedy policy over the prior: runs it once per
/// hypothesis as the truth.
pub fn ec2_expected_cost(instance: &DrdInstance) -> Result<f64> {
    let mut total = 0.0;
    for h in &instance.hypotheses {
        let (_, run) = run_ec2(instance, &|e| h.outcomes[e])?;
        total += h.prior * run.total_cost;
    }
    Ok(total)
}

/// Largest instance the brute-force optimal policy search accepts.
pub const MAX_OPT_HYPOTHESES: usize = 12;
pub const MAX_OPT_TESTS: usize = 12;

/// Exact minimum expected cost over all adaptive policies that stop once
/// the version space fits in one region. Exhaustive search over the
/// version-space lattice with memoization.
pub fn optimal_drd_cost(instance: &DrdInstance) -> Result<f64> {
    let n_hyp = instance.hypotheses.len();
    let n_tests = instance.n_tests();
    if n_hyp > MAX_OPT_HYPOTHESES || n_tests > MAX_OPT_TESTS {
        return Err(Error::SizeGuard(format!(
            "optimal policy search supports at most {MAX_OPT_HYPOTHESES} hypotheses and \
             {MAX_OPT_TESTS} tests ({n_hyp} hypotheses, {n_tests} tests given)"
        )));
    }
    let region_of: Vec<usize> = {
        let mut map = vec![usize::MAX; n_hyp];
        for (ri, r) in instance.regions.iter().enumerate() {
            for &m in &r.members {
                map[m] = ri;
            }
        }
        map
    };

    fn solved(mask: u32, region_of: &[usize]) -> bool {
        let mut region = None;
        for (i, &r) in region_of.iter().enumerate() {
            if mask & (1 << i) != 0 {
                match region {
                    None => region = Some(r),
                    Some(prev) if prev != r => return false,
                    _ => {}
                }
            }
        }
        true
    }

    fn rec(
        mask: u32,
        instance: &DrdInstance,
        region_of: &[usize],
        memo: &mut HashMap<u32, f64>,
    ) -> Result<f64> {
        if let Some(&v) = memo.get(&mask) {
            return Ok(v);
        }
        if solved(mask, region_of) {
            memo.insert(mask, 0.0);
            return Ok(0.0);
        }
        let total_mass: f64 = (0..instance.hypotheses.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| instance.hypotheses[i].prior)
            .sum();
        let mut best = f64::INFINITY;
        for test in 0..instance.n_tests() {
            let mut mask_true = 0u32;
            let mut mass_true = 0.0;
            for i in 0..instance.hypotheses.len() {
                if mask & (1 << i) != 0 && instance.hypotheses[i].outcomes[test] {
                    mask_true |= 1 << i;
                    mass_true += instance.hypotheses[i].prior;
                }
            }
            let mask_false = mask & !mask_true;
            if mask_true == 0 || mask_false == 0 {
                continue; // uninformative on this version space
            }
            let cost = instance.costs[test]
                + (mass_true / total_mass) * rec(mask_true, instance, region_of, memo)?
                + ((total_mass - mass_true) / total_mass)
                    * rec(mask_false, instance, region_of, memo)?;
            best = best.min(cost);
        }
        if best.is_infinite() {
            return Err(Error::Inconsistent(
                "version space spans multiple regions but no test splits it".into(),
            ));
        }
        memo.insert(mask, best);
        Ok(best)
    }

    let full = if n_hyp == 32 { u32::MAX } else { (1u32 << n_hyp) - 1 };
    rec(full, instance, &region_of, &mut HashMap::new())
}
