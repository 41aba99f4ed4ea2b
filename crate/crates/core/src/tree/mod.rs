//! Binary divisive tree over sample indices.
//!
//! The tree itself is data-free: nodes carry sample indices, the cached
//! projection model of their splitting axis and the split that was applied.
//! Driving the growth loop is the job of [`crate::algorithm::Engine`].

mod linkage;
mod serial;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::AxisModel;
use crate::split::{goes_right, score_range, SplitCandidate};

pub use linkage::{leaf_order, LinkageRow};
pub use serial::TREE_FORMAT_VERSION;

pub type NodeId = usize;

/// Splitting axis of a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProjection {
    pub method: String,
    pub model: AxisModel,
    /// `(min, max)` of the node's axis scores.
    pub score_range: (f64, f64),
    /// Axis scores in `sample_indices` order. Not serialized; recomputed from
    /// `model` when needed.
    #[serde(skip)]
    pub scores: Vec<f64>,
}

impl NodeProjection {
    pub fn new(method: impl Into<String>, model: AxisModel, scores: Vec<f64>) -> Self {
        Self {
            method: method.into(),
            model,
            score_range: score_range(&scores),
            scores,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub depth: usize,
    pub sample_indices: Vec<usize>,
    /// Selection criterion known before the node is analyzed, if the
    /// algorithm has one.
    pub priority: Option<f64>,
    pub projection: Option<NodeProjection>,
    /// Split proposed by the algorithm. Present once the node was analyzed.
    pub candidate: Option<SplitCandidate>,
    /// Cut actually applied to an internal node.
    pub split_point: Option<f64>,
    pub manual_split: Option<f64>,
    pub children: Option<(NodeId, NodeId)>,
}

impl ClusterNode {
    fn new(id: NodeId, parent: Option<NodeId>, depth: usize, sample_indices: Vec<usize>) -> Self {
        Self {
            id,
            parent,
            depth,
            sample_indices,
            priority: None,
            projection: None,
            candidate: None,
            split_point: None,
            manual_split: None,
            children: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn size(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn analyzed(&self) -> bool {
        self.candidate.is_some()
    }

    pub fn is_manual(&self) -> bool {
        self.manual_split.is_some()
    }

    /// Criterion of the applied or proposed split.
    pub fn criterion(&self) -> Option<f64> {
        self.candidate.as_ref().filter(|c| c.feasible).map(|c| c.criterion)
    }

    fn feasible(&self) -> bool {
        self.candidate.as_ref().is_some_and(|c| c.feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    nodes: BTreeMap<NodeId, ClusterNode>,
    root: NodeId,
    split_order: Vec<NodeId>,
    next_id: NodeId,
    n_samples: usize,
    /// Nodes discarded by [`ClusterTree::discard_descendants`], keyed by parent.
    recycled: HashMap<NodeId, (ClusterNode, ClusterNode)>,
}

impl ClusterTree {
    /// A bare root over samples `0..n`.
    pub fn new(n_samples: usize) -> Self {
        let root = ClusterNode::new(0, None, 0, (0..n_samples).collect());
        Self {
            nodes: BTreeMap::from([(0, root)]),
            root: 0,
            split_order: Vec::new(),
            next_id: 1,
            n_samples,
            recycled: HashMap::new(),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn next_id(&self) -> NodeId {
        self.next_id
    }

    /// Internal nodes in the order they were split.
    pub fn split_order(&self) -> &[NodeId] {
        &self.split_order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: NodeId) -> Result<&ClusterNode> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::Structure(format!("unknown node {id}")))
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Result<&mut ClusterNode> {
        self.nodes
            .get_mut(&id)
            .ok_or_else(|| Error::Structure(format!("unknown node {id}")))
    }

    /// Leaf ids in ascending order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes.values().filter(|n| n.is_leaf()).map(|n| n.id).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.values().filter(|n| n.is_leaf()).count()
    }

    /// Leaves of the subtree rooted at `id`, ascending.
    pub fn leaves_under(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let mut out: Vec<NodeId> = self
            .subtree(id)?
            .into_iter()
            .filter(|n| self.nodes[n].is_leaf())
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// `id` and all its descendants, pre-order.
    pub fn subtree(&self, id: NodeId) -> Result<Vec<NodeId>> {
        self.node(id)?;
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            if let Some((l, r)) = self.nodes[&n].children {
                stack.push(r);
                stack.push(l);
            }
        }
        Ok(out)
    }

    /// Stores the analysis of a leaf.
    pub fn set_analysis(
        &mut self,
        id: NodeId,
        projection: Option<NodeProjection>,
        candidate: SplitCandidate,
    ) -> Result<()> {
        let node = self.node_mut(id)?;
        node.projection = projection;
        node.candidate = Some(candidate);
        Ok(())
    }

    pub fn set_priority(&mut self, id: NodeId, priority: Option<f64>) -> Result<()> {
        self.node_mut(id)?.priority = priority;
        Ok(())
    }

    /// Splits leaf `id` at `point` on its cached axis scores. `manual` records
    /// the point as a user override.
    ///
    /// Returns the `(left, right)` child ids; left holds `score < point`.
    pub fn split_node(&mut self, id: NodeId, point: f64, manual: bool) -> Result<(NodeId, NodeId)> {
        let node = self.node(id)?;
        if !node.is_leaf() {
            return Err(Error::Structure(format!("node {id} is not a leaf")));
        }
        let degenerate = |reason: &str| Error::DegenerateSplit {
            node: id,
            point,
            reason: reason.to_string(),
        };
        let proj = node
            .projection
            .as_ref()
            .ok_or_else(|| degenerate("node has no projection"))?;
        if proj.scores.len() != node.size() {
            return Err(Error::Structure(format!("axis scores of node {id} are not cached")));
        }
        if !point.is_finite() {
            return Err(degenerate("split point is not finite"));
        }
        let (lo, hi) = proj.score_range;
        if manual && !(point > lo && point < hi) {
            return Err(degenerate(&format!("outside the open score range ({lo}, {hi})")));
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (&s, &i) in proj.scores.iter().zip(&node.sample_indices) {
            if goes_right(s, point) {
                right.push(i);
            } else {
                left.push(i);
            }
        }
        if left.is_empty() || right.is_empty() {
            return Err(degenerate("one side of the cut is empty"));
        }

        let depth = node.depth + 1;
        let (left_node, right_node) = match self.recycled.remove(&id) {
            Some((l, r)) if l.sample_indices == left && r.sample_indices == right => (reset(l), reset(r)),
            _ => {
                let (l, r) = (self.next_id, self.next_id + 1);
                self.next_id += 2;
                (
                    ClusterNode::new(l, Some(id), depth, left),
                    ClusterNode::new(r, Some(id), depth, right),
                )
            }
        };
        let ids = (left_node.id, right_node.id);
        self.nodes.insert(left_node.id, left_node);
        self.nodes.insert(right_node.id, right_node);
        let node = self.nodes.get_mut(&id).expect("checked above");
        node.children = Some(ids);
        node.split_point = Some(point);
        node.manual_split = manual.then_some(point);
        self.split_order.push(id);
        Ok(ids)
    }

    /// Removes every descendant of `id`, turning it back into a leaf. The
    /// removed nodes are remembered so that re-creating an identical child
    /// pair restores their ids and cached analyses.
    pub fn discard_descendants(&mut self, id: NodeId) -> Result<()> {
        let all = self.subtree(id)?;
        for n in &all {
            if let Some((l, r)) = self.nodes[n].children {
                let pair = (self.nodes[&l].clone(), self.nodes[&r].clone());
                self.recycled.insert(*n, pair);
            }
        }
        let below = &all[1..];
        for n in below {
            self.nodes.remove(n);
        }
        let removed: std::collections::HashSet<NodeId> = below.iter().copied().collect();
        self.split_order.retain(|n| !removed.contains(n) && *n != id);
        let node = self.node_mut(id)?;
        node.children = None;
        node.split_point = None;
        node.manual_split = None;
        Ok(())
    }

    /// Forgets nodes kept by [`ClusterTree::discard_descendants`].
    pub fn clear_recycled(&mut self) {
        self.recycled.clear();
    }

    /// Analyzed leaf with the largest feasible criterion among leaves of at
    /// least `min_sample_split` samples; ties go to the lowest id.
    pub fn select_next_leaf(&self, min_sample_split: usize) -> Option<NodeId> {
        self.best_leaf(self.nodes.keys().copied(), min_sample_split, false)
    }

    /// Like [`ClusterTree::select_next_leaf`] restricted to `leaves`, and
    /// optionally treating unanalyzed leaves as candidates ranked by priority.
    pub(crate) fn best_leaf(
        &self,
        leaves: impl IntoIterator<Item = NodeId>,
        min_sample_split: usize,
        include_pending: bool,
    ) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for id in leaves {
            let n = &self.nodes[&id];
            if !n.is_leaf() || n.size() < min_sample_split.max(2) {
                continue;
            }
            let key = if n.analyzed() {
                if !n.feasible() {
                    continue;
                }
                n.candidate.as_ref().map(|c| c.criterion)
            } else if include_pending {
                n.priority
            } else {
                None
            };
            let Some(key) = key else { continue };
            if best.is_none_or(|(k, b)| key > k || (key == k && id < b)) {
                best = Some((key, id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Leaf label of every sample; leaves enumerated by ascending id.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n_samples];
        for (k, id) in self.leaves().into_iter().enumerate() {
            for &i in &self.nodes[&id].sample_indices {
                labels[i] = k;
            }
        }
        labels
    }

    /// Leaf reached by descending from the root along stored axes.
    pub fn route(&self, x: &[f64]) -> NodeId {
        let mut id = self.root;
        loop {
            let n = &self.nodes[&id];
            let (Some((l, r)), Some(point), Some(p)) = (n.children, n.split_point, n.projection.as_ref()) else {
                return id;
            };
            id = if goes_right(p.model.score(x), point) { r } else { l };
        }
    }

    /// Axis dimensionality expected by [`ClusterTree::route`], if the tree was split.
    pub fn feature_count(&self) -> Option<usize> {
        self.nodes
            .values()
            .find_map(|n| n.children.and(n.projection.as_ref()).map(|p| p.model.dims()))
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Structure(m));
        let Some(root) = self.nodes.get(&self.root) else {
            return bad(format!("root {} is missing", self.root));
        };
        if root.sample_indices != (0..self.n_samples).collect::<Vec<_>>() {
            return bad("root must hold every sample".into());
        }
        let mut internal = 0;
        for n in self.nodes.values() {
            if n.id >= self.next_id {
                return bad(format!("node id {} is not below next_id {}", n.id, self.next_id));
            }
            if !n.sample_indices.windows(2).all(|w| w[0] < w[1]) {
                return bad(format!("sample indices of node {} are not strictly sorted", n.id));
            }
            if let Some((l, r)) = n.children {
                internal += 1;
                let (Some(ln), Some(rn)) = (self.nodes.get(&l), self.nodes.get(&r)) else {
                    return bad(format!("children of node {} are missing", n.id));
                };
                if ln.parent != Some(n.id) || rn.parent != Some(n.id) {
                    return bad(format!("children of node {} disagree on their parent", n.id));
                }
                if ln.sample_indices.is_empty() || rn.sample_indices.is_empty() {
                    return bad(format!("node {} has an empty child", n.id));
                }
                let mut merged = [ln.sample_indices.as_slice(), rn.sample_indices.as_slice()].concat();
                merged.sort_unstable();
                if merged != n.sample_indices {
                    return bad(format!("children of node {} do not partition it", n.id));
                }
                if n.split_point.is_none() {
                    return bad(format!("internal node {} has no split point", n.id));
                }
            }
            if let (Some(m), Some(p)) = (n.manual_split, n.projection.as_ref()) {
                if !(m > p.score_range.0 && m < p.score_range.1) {
                    return bad(format!("manual split of node {} lies outside its score range", n.id));
                }
            }
        }
        if self.leaf_count() != internal + 1 {
            return bad("leaf count must equal internal count + 1".into());
        }
        if self.split_order.len() != internal {
            return bad("split order must list every internal node once".into());
        }
        Ok(())
    }
}

fn reset(mut n: ClusterNode) -> ClusterNode {
    n.children = None;
    n.split_point = None;
    n.manual_split = None;
    n
}
