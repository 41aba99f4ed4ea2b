use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::http::StatusCode;
use divclust::algorithm::{AlgorithmConfig, Edit, Engine};
use divclust::io::{node_view, SplitView, PALETTE};
use divclust::linalg::DataMatrix;
use divclust::tree::{leaf_order, ClusterTree, NodeId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ApiError;

/// Hex SHA-256 of the comma-joined labels.
pub fn labels_digest(labels: &[usize]) -> String {
    let text = labels.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub node: NodeId,
    pub point: f64,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub dataset: String,
    pub revision: u64,
    pub n_samples: usize,
    pub node_count: usize,
    pub leaf_count: usize,
    pub labels_digest: String,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Option<(NodeId, NodeId)>,
    pub depth: usize,
    pub size: usize,
    pub criterion: Option<f64>,
    pub split_point: Option<f64>,
    pub manual: bool,
    pub leaf: bool,
    /// Cluster label of a leaf.
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeResponse {
    pub session_id: String,
    pub revision: u64,
    pub labels: Vec<usize>,
    pub labels_digest: String,
    pub nodes: Vec<NodeSummary>,
    /// The tree in the library's serialized form.
    pub tree: serde_json::Value,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResponse {
    #[serde(flatten)]
    pub tree: TreeResponse,
    /// View of the edited node after the edit.
    pub view: SplitView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramResponse {
    pub revision: u64,
    /// `[a, b, height, size]` rows.
    pub linkage: Vec<[f64; 4]>,
    pub leaf_order: Vec<usize>,
    pub labels: Vec<usize>,
    /// Ground-truth classes of the dataset, when it has them.
    pub classes: Option<Vec<usize>>,
    pub palette: Vec<String>,
}

/// Everything needed to rebuild a session by refitting and replaying edits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub session_id: String,
    pub dataset: String,
    pub config: AlgorithmConfig,
    pub revision: u64,
    pub edits: Vec<EditRecord>,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    dataset: String,
    config: AlgorithmConfig,
    data: Arc<DataMatrix>,
    engine: Engine,
    tree: ClusterTree,
    labels: Vec<usize>,
    warning: Option<String>,
    edits: Vec<EditRecord>,
    revision: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Session {
    pub fn create(id: String, dataset: String, data: Arc<DataMatrix>, config: AlgorithmConfig) -> Result<Self, ApiError> {
        let engine = Engine::new(config.clone())?;
        let out = engine.fit(&data)?;
        Ok(Self {
            id,
            dataset,
            config,
            data,
            engine,
            labels: out.labels,
            tree: out.tree,
            warning: out.warning,
            edits: Vec::new(),
            revision: 0,
        })
    }

    /// Rebuilds a session by refitting and replaying its edit log.
    pub fn restore(snapshot: SessionSnapshot, data: Arc<DataMatrix>) -> Result<Self, ApiError> {
        let mut s = Self::create(snapshot.session_id, snapshot.dataset, data, snapshot.config)?;
        let edits: Vec<Edit> = snapshot.edits.iter().map(|e| Edit { node: e.node, point: e.point }).collect();
        for e in &edits {
            s.engine.recompute_subtree(&mut s.tree, &s.data, e.node, e.point)?;
        }
        s.labels = s.tree.labels();
        s.edits = snapshot.edits;
        s.revision = snapshot.revision;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edits(&self) -> &[EditRecord] {
        &self.edits
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            session_id: self.id.clone(),
            dataset: self.dataset.clone(),
            revision: self.revision,
            n_samples: self.tree.n_samples(),
            node_count: self.tree.len(),
            leaf_count: self.tree.leaf_count(),
            labels_digest: labels_digest(&self.labels),
            warning: self.warning.clone(),
        }
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            session_id: self.id.clone(),
            dataset: self.dataset.clone(),
            config: self.config.clone(),
            revision: self.revision,
            edits: self.edits.clone(),
        }
    }

    pub fn tree_response(&self) -> Result<TreeResponse, ApiError> {
        let leaves = self.tree.leaves();
        let nodes = self
            .tree
            .nodes()
            .map(|n| NodeSummary {
                id: n.id,
                parent: n.parent,
                children: n.children,
                depth: n.depth,
                size: n.size(),
                criterion: n.criterion(),
                split_point: n.split_point,
                manual: n.is_manual(),
                leaf: n.is_leaf(),
                label: leaves.iter().position(|&l| l == n.id),
            })
            .collect();
        Ok(TreeResponse {
            session_id: self.id.clone(),
            revision: self.revision,
            labels: self.labels.clone(),
            labels_digest: labels_digest(&self.labels),
            nodes,
            tree: serde_json::to_value(&self.tree).map_err(|e| ApiError::internal(e.to_string()))?,
            warning: self.warning.clone(),
        })
    }

    fn require_node(&self, node: NodeId) -> Result<(), ApiError> {
        self.tree
            .node(node)
            .map(|_| ())
            .map_err(|_| ApiError::not_found("node_not_found", format!("no node {node} in session {}", self.id)))
    }

    /// Split view of `node`. Analyzes a pending leaf on first request, which
    /// fills caches but changes neither labels nor revision.
    pub fn view(&mut self, node: NodeId) -> Result<SplitView, ApiError> {
        self.require_node(node)?;
        self.engine.ensure_analyzed(&mut self.tree, &self.data, node)?;
        Ok(node_view(&self.tree, &self.data, node)?)
    }

    pub fn set_split(&mut self, node: NodeId, point: f64, expected_revision: u64) -> Result<SplitResponse, ApiError> {
        if expected_revision != self.revision {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "revision_conflict",
                format!("expected revision {expected_revision}, session is at {}", self.revision),
            ));
        }
        self.require_node(node)?;
        if !point.is_finite() {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate_split", "split point must be finite"));
        }
        let mut tree = self.tree.clone();
        self.engine.recompute_subtree(&mut tree, &self.data, node, point)?;
        let view = node_view(&tree, &self.data, node)?;
        self.tree = tree;
        self.labels = self.tree.labels();
        self.edits.push(EditRecord {
            node,
            point,
            timestamp_ms: now_ms(),
        });
        self.revision += 1;
        Ok(SplitResponse {
            tree: self.tree_response()?,
            view,
        })
    }

    pub fn reset(&mut self) -> Result<TreeResponse, ApiError> {
        let out = self.engine.fit(&self.data)?;
        self.tree = out.tree;
        self.labels = out.labels;
        self.warning = out.warning;
        self.edits.clear();
        self.revision += 1;
        self.tree_response()
    }

    pub fn dendrogram(&self) -> DendrogramResponse {
        let linkage = self.tree.to_linkage();
        DendrogramResponse {
            revision: self.revision,
            leaf_order: if linkage.is_empty() {
                (0..self.tree.n_samples()).collect()
            } else {
                leaf_order(&linkage)
            },
            linkage: linkage.into_iter().map(|r| r.to_array()).collect(),
            labels: self.labels.clone(),
            classes: self.data.labels().map(<[usize]>::to_vec),
            palette: PALETTE.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }
}
