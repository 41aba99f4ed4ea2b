use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AlgorithmConfig, AlgorithmRegistry, DivisiveAlgorithm, EditBudget};
use crate::error::{Error, Result};
use crate::eval::mix_seed;
use crate::linalg::DataMatrix;
use crate::projection::ProjectorRegistry;
use crate::tree::{ClusterTree, NodeId};

/// A manual split-point edit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edit {
    pub node: NodeId,
    pub point: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub tree: ClusterTree,
    pub labels: Vec<usize>,
    /// Set when the tree stopped short of `max_clusters` because no leaf could
    /// be split.
    pub warning: Option<String>,
}

/// Configured driver: builds trees, re-grows edited subtrees and routes new
/// samples.
#[derive(Debug)]
pub struct Engine {
    config: AlgorithmConfig,
    algorithm: Box<dyn DivisiveAlgorithm>,
}

/// Seed of a node, a function of the run seed and the node's samples only.
fn node_seed(seed: u64, rows: &[usize]) -> u64 {
    rows.iter()
        .fold(mix_seed(seed, rows.len() as u64), |h, &r| mix_seed(h, r as u64))
}

impl Engine {
    pub fn new(config: AlgorithmConfig) -> Result<Self> {
        Self::with_registries(config, &AlgorithmRegistry::default(), &ProjectorRegistry::default())
    }

    pub fn with_registries(
        config: AlgorithmConfig,
        algorithms: &AlgorithmRegistry,
        projectors: &ProjectorRegistry,
    ) -> Result<Self> {
        config.validate()?;
        let algorithm = algorithms.build(&config, projectors)?;
        if algorithm.requires_cluster_count() && config.max_clusters.is_none() {
            return Err(Error::Config(format!(
                "algorithm '{}' requires max_clusters (--k)",
                config.algorithm
            )));
        }
        Ok(Self { config, algorithm })
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    pub fn algorithm(&self) -> &dyn DivisiveAlgorithm {
        &*self.algorithm
    }

    fn check_data(&self, data: &DataMatrix) -> Result<()> {
        let c = self.config.projection.component_count();
        if self.config.algorithm != "bkm" && self.config.projection.method == "ica" && data.cols() < c {
            return Err(Error::Config(format!(
                "ica with {c} components needs at least {c} features, data has {}",
                data.cols()
            )));
        }
        Ok(())
    }

    pub fn fit(&self, data: &DataMatrix) -> Result<FitOutcome> {
        self.check_data(data)?;
        let mut tree = ClusterTree::new(data.rows());
        let root = tree.root();
        self.init_leaf(&mut tree, data, root)?;
        self.grow(&mut tree, data, root, self.config.max_clusters)?;
        let leaves = tree.leaf_count();
        let warning = match self.config.max_clusters {
            Some(k) if leaves < k => Some(if leaves == 1 {
                "the root could not be split; returning a single cluster".to_string()
            } else {
                format!("stopped at {leaves} of {k} clusters: no remaining leaf can be split")
            }),
            _ => None,
        };
        Ok(FitOutcome {
            labels: tree.labels(),
            tree,
            warning,
        })
    }

    /// Fits and then applies `edits` in order.
    pub fn replay(&self, data: &DataMatrix, edits: &[Edit]) -> Result<FitOutcome> {
        let mut out = self.fit(data)?;
        for e in edits {
            self.recompute_subtree(&mut out.tree, data, e.node, e.point)?;
        }
        out.labels = out.tree.labels();
        Ok(out)
    }

    fn init_leaf(&self, tree: &mut ClusterTree, data: &DataMatrix, id: NodeId) -> Result<()> {
        let node = tree.node(id)?;
        if node.priority.is_some() || node.analyzed() {
            return Ok(());
        }
        let p = self.algorithm.prior_criterion(data, &node.sample_indices);
        tree.set_priority(id, p)
    }

    fn analyze(&self, tree: &mut ClusterTree, data: &DataMatrix, ids: &[NodeId]) -> Result<()> {
        let results: Vec<_> = ids
            .par_iter()
            .map(|&id| {
                let rows = &tree.node(id)?.sample_indices;
                self.algorithm.analyze(data, rows, node_seed(self.config.seed, rows))
            })
            .collect();
        for (&id, r) in ids.iter().zip(results) {
            let a = r?;
            tree.set_analysis(id, a.projection, a.candidate)?;
        }
        Ok(())
    }

    /// Analyzes a leaf that is large enough and has not been analyzed yet.
    pub fn ensure_analyzed(&self, tree: &mut ClusterTree, data: &DataMatrix, id: NodeId) -> Result<()> {
        let node = tree.node(id)?;
        if node.is_leaf() && !node.analyzed() && node.size() >= self.config.min_sample_split.max(2) {
            self.analyze(tree, data, &[id])?;
        }
        self.ensure_scores(tree, data, id)
    }

    /// Refills cached axis scores dropped by serialization.
    pub fn ensure_scores(&self, tree: &mut ClusterTree, data: &DataMatrix, id: NodeId) -> Result<()> {
        let node = tree.node_mut(id)?;
        if let Some(p) = node.projection.as_mut() {
            if p.scores.len() != node.sample_indices.len() {
                if p.model.dims() != data.cols() {
                    return Err(Error::Shape(format!(
                        "tree axes expect {} features, data has {}",
                        p.model.dims(),
                        data.cols()
                    )));
                }
                p.scores = p.model.scores(data, &node.sample_indices);
            }
        }
        Ok(())
    }

    /// Select-and-split loop restricted to the subtree under `scope` until it
    /// holds `budget` leaves or no leaf can be split.
    fn grow(&self, tree: &mut ClusterTree, data: &DataMatrix, scope: NodeId, budget: Option<usize>) -> Result<()> {
        let min_split = self.config.min_sample_split.max(2);
        loop {
            let leaves = tree.leaves_under(scope)?;
            if budget.is_some_and(|b| leaves.len() >= b) {
                return Ok(());
            }
            let eager: Vec<NodeId> = leaves
                .iter()
                .copied()
                .filter(|&id| {
                    let n = tree.node(id).expect("listed leaf");
                    !n.analyzed() && n.priority.is_none() && n.size() >= min_split
                })
                .collect();
            self.analyze(tree, data, &eager)?;
            let Some(id) = tree.best_leaf(leaves, min_split, true) else {
                return Ok(());
            };
            if !tree.node(id)?.analyzed() {
                self.analyze(tree, data, &[id])?;
                continue;
            }
            self.ensure_scores(tree, data, id)?;
            let point = tree.node(id)?.candidate.as_ref().expect("analyzed").split_point;
            let (l, r) = tree.split_node(id, point, false)?;
            self.init_leaf(tree, data, l)?;
            self.init_leaf(tree, data, r)?;
        }
    }

    /// Discards the subtree below `node`, splits `node` at `point` as a manual
    /// override and lets the algorithm re-grow the subtree. Nodes outside the
    /// subtree are untouched. On error the tree is left unchanged.
    pub fn recompute_subtree(&self, tree: &mut ClusterTree, data: &DataMatrix, node: NodeId, point: f64) -> Result<()> {
        if data.rows() != tree.n_samples() {
            return Err(Error::Shape(format!(
                "tree covers {} samples, data has {}",
                tree.n_samples(),
                data.rows()
            )));
        }
        self.ensure_analyzed(tree, data, node)?;
        let n = tree.node(node)?;
        let degenerate = |reason: String| Error::DegenerateSplit { node, point, reason };
        let Some(p) = n.projection.as_ref() else {
            return Err(degenerate("node has no projection".into()));
        };
        let (lo, hi) = p.score_range;
        if !(point > lo && point < hi) {
            return Err(degenerate(format!("outside the open score range ({lo}, {hi})")));
        }
        let before = tree.leaves_under(node)?.len();
        let budget = match (self.config.max_clusters, self.config.edit_budget) {
            (None, EditBudget::Natural) => None,
            _ => Some(before.max(2)),
        };

        let mut work = tree.clone();
        work.discard_descendants(node)?;
        work.split_node(node, point, true)?;
        let (l, r) = work.node(node)?.children.expect("just split");
        self.init_leaf(&mut work, data, l)?;
        self.init_leaf(&mut work, data, r)?;
        let grown = self.grow(&mut work, data, node, budget);
        work.clear_recycled();
        grown?;
        *tree = work;
        Ok(())
    }

    /// Routes every row of `x` down the tree; labels follow [`ClusterTree::labels`].
    pub fn predict(&self, tree: &ClusterTree, x: &DataMatrix) -> Result<Vec<usize>> {
        predict(tree, x)
    }
}

/// Leaf label of every row of `x`, by descending the stored split axes.
pub fn predict(tree: &ClusterTree, x: &DataMatrix) -> Result<Vec<usize>> {
    if let Some(d) = tree.feature_count() {
        if d != x.cols() {
            return Err(Error::Shape(format!("tree was fitted on {d} features, got {}", x.cols())));
        }
    }
    let labels_of: std::collections::HashMap<NodeId, usize> =
        tree.leaves().into_iter().enumerate().map(|(k, id)| (id, k)).collect();
    Ok((0..x.rows())
        .into_par_iter()
        .map(|i| labels_of[&tree.route(x.row(i))])
        .collect())
}

/// Fits `config` on `data` with the default registries.
pub fn fit(config: &AlgorithmConfig, data: &DataMatrix) -> Result<FitOutcome> {
    Engine::new(config.clone())?.fit(data)
}
