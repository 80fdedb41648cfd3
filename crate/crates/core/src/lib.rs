//! Lazy shortest-path search on explicit graphs where edge evaluation is the
//! dominant cost.
//!
//! The toolkit is built around the LazySP loop: repeatedly compute the
//! shortest path over all edges not yet known to be invalid, evaluate one
//! edge on that path, and stop once a candidate path is fully verified. The
//! number of evaluations depends entirely on which edge the *selector* picks
//! at each step, so everything here is organized around selectors:
//!
//! - [`search`] — the evaluation loop, the [`search::Selector`] trait and the
//!   classic baseline selectors (forward, backward, alternate, random,
//!   fail-fast, posterior fail-fast).
//! - [`oracle`] — clairvoyant selectors that see the whole world up front:
//!   an exact greedy set-cover solver and the cheaper marginal-path-length
//!   approximation used to label training data.
//! - [`imitation`] — DAgger-style training of a linear scoring policy that
//!   imitates the clairvoyant oracle.
//! - [`rl`] — tabular Q-learning and exact value iteration on small
//!   enumerable instances, plus selector evaluation utilities.
//! - [`bayes`] — an exact Bayesian policy: edge evaluation as decision
//!   region determination, solved greedily with the EC2 objective.
//! - [`graph`], [`worlds`], [`features`], [`files`] — the substrate: graphs,
//!   world distributions, per-edge features and on-disk formats.

pub mod bayes;
pub mod error;
pub mod features;
pub mod files;
pub mod graph;
pub mod imitation;
pub mod oracle;
pub mod rl;
pub mod rng;
pub mod search;
pub mod worlds;

pub use error::{Error, Result};
pub use graph::{EdgeId, EvalState, ExplicitGraph, Path, VertexId, World};
pub use search::{run_lazysp, SearchResult, Selector, SelectorContext};
