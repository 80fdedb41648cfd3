//! On-disk formats. Everything is JSON with fixed field order, so saving
//! the same value twice produces identical bytes. World and dataset files
//! carry the graph's content hash, and loaders refuse mismatched pairings.

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeId, ExplicitGraph, VertexId, World};
use crate::imitation::{LinearPolicy, Standardization};
use crate::search::TraceStep;
use crate::worlds::{GeneratedDataset, GeneratorSpec};

pub const GRAPH_SCHEMA: &str = "lazysp.graph.v1";
pub const WORLD_SCHEMA: &str = "lazysp.world.v1";
pub const MANIFEST_SCHEMA: &str = "lazysp.dataset-manifest.v1";
pub const POLICY_SCHEMA: &str = "lazysp.policy.v1";
pub const DISTRIBUTION_SCHEMA: &str = "lazysp.distribution.v1";
pub const DRD_SCHEMA: &str = "lazysp.drd-instance.v1";
pub const QTABLE_SCHEMA: &str = "lazysp.qtable.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFileVertex {
    pub id: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFileEdge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub length: f64,
}

/// The graph interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub schema: String,
    pub vertices: Vec<GraphFileVertex>,
    pub edges: Vec<GraphFileEdge>,
    pub start: VertexId,
    pub goal: VertexId,
}

impl GraphFile {
    pub fn from_graph(graph: &ExplicitGraph) -> Self {
        let vertices = graph
            .vertices()
            .map(|id| {
                let coord = graph.coord(id);
                GraphFileVertex {
                    id,
                    x: coord.map(|c| c.0),
                    y: coord.map(|c| c.1),
                }
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| GraphFileEdge {
                id: e.id,
                u: e.u,
                v: e.v,
                length: e.length,
            })
            .collect();
        Self {
            schema: GRAPH_SCHEMA.to_string(),
            vertices,
            edges,
            start: graph.start(),
            goal: graph.goal(),
        }
    }

    pub fn into_graph(self) -> Result<ExplicitGraph> {
        let ids: Vec<VertexId> = self.vertices.iter().map(|v| v.id).collect();
        let edges: Vec<Edge> = self
            .edges
            .into_iter()
            .map(|e| Edge {
                id: e.id,
                u: e.u,
                v: e.v,
                length: e.length,
            })
            .collect();
        let coords: Vec<(VertexId, (f64, f64))> = self
            .vertices
            .iter()
            .filter_map(|v| match (v.x, v.y) {
                (Some(x), Some(y)) => Some((v.id, (x, y))),
                _ => None,
            })
            .collect();
        let graph = ExplicitGraph::new(ids, edges, self.start, self.goal)?;
        Ok(if coords.is_empty() {
            graph
        } else {
            graph.with_coords(coords)
        })
    }
}

/// Content hash of a graph: SHA-256 over its canonical file form.
pub fn graph_hash(graph: &ExplicitGraph) -> String {
    let canonical = serde_json::to_string(&GraphFile::from_graph(graph))
        .expect("graph serialization cannot fail");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One world, pinned to its graph by hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub schema: String,
    pub graph_hash: String,
    pub bits: String,
}

impl WorldFile {
    pub fn new(world: &World, graph_hash: &str) -> Self {
        Self {
            schema: WORLD_SCHEMA.to_string(),
            graph_hash: graph_hash.to_string(),
            bits: world.to_bit_string(),
        }
    }

    pub fn into_world(self, expected_hash: &str) -> Result<World> {
        if self.graph_hash != expected_hash {
            return Err(Error::Inconsistent(format!(
                "world was generated for graph {} but is being paired with {}",
                self.graph_hash, expected_hash
            )));
        }
        World::from_bit_string(&self.bits)
    }
}

/// Dataset manifest: file layout, split indices, generator provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema: String,
    pub graph_file: String,
    pub graph_hash: String,
    pub world_files: Vec<String>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub generator: GeneratorSpec,
}

impl DatasetManifest {
    fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for idx in self.train.iter().chain(&self.validation).chain(&self.test) {
            if *idx >= self.world_files.len() {
                return Err(Error::Config(format!(
                    "split index {idx} exceeds the {} world files",
                    self.world_files.len()
                )));
            }
            if !seen.insert(*idx) {
                return Err(Error::Config(format!("split index {idx} appears twice")));
            }
        }
        Ok(())
    }
}

pub fn save_json<T: Serialize>(path: &FsPath, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &FsPath) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a dataset directory: `graph.json`, `worlds/world_NNNNN.json` and
/// `manifest.json`. Returns the manifest path.
pub fn save_dataset(dir: &FsPath, dataset: &GeneratedDataset) -> Result<PathBuf> {
    let hash = graph_hash(&dataset.graph);
    save_json(&dir.join("graph.json"), &GraphFile::from_graph(&dataset.graph))?;
    let mut world_files = Vec::with_capacity(dataset.worlds.len());
    for (i, world) in dataset.worlds.iter().enumerate() {
        let rel = format!("worlds/world_{i:05}.json");
        save_json(&dir.join(&rel), &WorldFile::new(world, &hash))?;
        world_files.push(rel);
    }
    let manifest = DatasetManifest {
        schema: MANIFEST_SCHEMA.to_string(),
        graph_file: "graph.json".to_string(),
        graph_hash: hash,
        world_files,
        train: dataset.train.clone(),
        validation: dataset.validation.clone(),
        test: dataset.test.clone(),
        generator: dataset.generator.clone(),
    };
    let path = dir.join("manifest.json");
    save_json(&path, &manifest)?;
    Ok(path)
}

/// Loads a dataset directory back, re-validating the manifest, the graph
/// invariants and every world's graph hash.
pub fn load_dataset(manifest_path: &FsPath) -> Result<GeneratedDataset> {
    let manifest: DatasetManifest = load_json(manifest_path)?;
    manifest.validate()?;
    let dir = manifest_path.parent().unwrap_or_else(|| FsPath::new("."));
    let graph_file: GraphFile = load_json(&dir.join(&manifest.graph_file))?;
    let graph = Arc::new(graph_file.into_graph()?);
    let hash = graph_hash(&graph);
    if hash != manifest.graph_hash {
        return Err(Error::Inconsistent(
            "manifest graph hash does not match the stored graph".into(),
        ));
    }
    let mut worlds = Vec::with_capacity(manifest.world_files.len());
    for rel in &manifest.world_files {
        let wf: WorldFile = load_json(&dir.join(rel))?;
        let world = wf.into_world(&hash)?;
        if world.len() != graph.edge_count() {
            return Err(Error::InvalidWorld(format!(
                "world {rel} has {} bits for a graph with {} edges",
                world.len(),
                graph.edge_count()
            )));
        }
        worlds.push(world);
    }
    Ok(GeneratedDataset {
        graph,
        worlds,
        train: manifest.train,
        validation: manifest.validation,
        test: manifest.test,
        generator: manifest.generator,
    })
}

/// An explicit world distribution on disk (for the hand-built
/// environments): support worlds with probabilities, next to a graph file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub schema: String,
    pub graph_file: String,
    pub graph_hash: String,
    pub support: Vec<DistributionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub bits: String,
    pub probability: f64,
}

impl DistributionFile {
    pub fn from_distribution(dist: &crate::worlds::WorldDistribution) -> Result<Self> {
        let support = dist
            .enumerate_support()?
            .iter()
            .map(|(w, p)| DistributionEntry {
                bits: w.to_bit_string(),
                probability: *p,
            })
            .collect();
        Ok(Self {
            schema: DISTRIBUTION_SCHEMA.to_string(),
            graph_file: "graph.json".to_string(),
            graph_hash: graph_hash(dist.graph()),
            support,
        })
    }
}

/// A trained policy with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub schema: String,
    pub feature_names: Vec<String>,
    /// Weights apply to raw (unstandardized) features.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// The frozen first-iteration standardization, already folded into the
    /// stored weights; recorded for reference.
    pub standardization: Standardization,
    pub provenance: PolicyProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyProvenance {
    pub mode: String,
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub best_iteration: usize,
    pub seed: u64,
    pub train_worlds: usize,
}

impl PolicyFile {
    pub fn into_policy(self) -> Result<LinearPolicy> {
        let weights: [f64; crate::features::FEATURE_COUNT] =
            self.weights.as_slice().try_into().map_err(|_| {
                Error::Config(format!(
                    "policy file has {} weights, expected {}",
                    self.weights.len(),
                    crate::features::FEATURE_COUNT
                ))
            })?;
        LinearPolicy::new(weights, self.bias)
    }
}

/// A DRD instance on disk: hypothesis worlds with priors, per-edge test
/// costs, and the graph it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrdInstanceFile {
    pub schema: String,
    pub graph_file: String,
    pub graph_hash: String,
    pub hypotheses: Vec<DrdHypothesisEntry>,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrdHypothesisEntry {
    pub bits: String,
    pub prior: f64,
}

/// Q-table snapshot; state codes are decimal strings since they can exceed
/// the JSON-safe integer range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QTableFile {
    pub schema: String,
    pub entries: Vec<QTableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTableEntry {
    pub state: String,
    pub action: EdgeId,
    pub value: f64,
}

impl QTableFile {
    pub fn from_table(table: &crate::rl::QTable) -> Self {
        Self {
            schema: QTABLE_SCHEMA.to_string(),
            entries: table
                .entries()
                .into_iter()
                .map(|(state, action, value)| QTableEntry {
                    state: state.to_string(),
                    action,
                    value,
                })
                .collect(),
        }
    }
}

/// One JSON-lines trace record per evaluation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    /// One character per edge: `u` / `v` / `i`.
    pub state: String,
    pub path_edges: Vec<EdgeId>,
    pub selected: EdgeId,
    pub outcome: bool,
}

pub fn write_trace_jsonl(steps: &[TraceStep], writer: &mut dyn Write) -> Result<()> {
    for (i, step) in steps.iter().enumerate() {
        let record = TraceRecord {
            step: i,
            state: step.state.digest(),
            path_edges: step.path.edges.clone(),
            selected: step.selected,
            outcome: step.outcome,
        };
        serde_json::to_writer(&mut *writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
