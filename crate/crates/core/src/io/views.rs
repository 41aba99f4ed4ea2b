use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dominant_direction, norm, CenteredRows, DataMatrix, PowerOptions};
use crate::projection::{AxisModel, KpcaProjector, Projector};
use crate::split::goes_right;
use crate::tree::{ClusterNode, ClusterTree, NodeId};

pub const VIEWS_FORMAT_VERSION: u32 = 1;

/// Two-dimensional picture of one node's split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitView {
    pub node: NodeId,
    pub parent: Option<NodeId>,
    pub depth: usize,
    pub size: usize,
    pub method: String,
    pub criterion: Option<f64>,
    /// Applied cut for internal nodes, proposed cut for splittable leaves.
    pub split_point: Option<f64>,
    pub manual: bool,
    pub score_range: (f64, f64),
    pub sample_indices: Vec<usize>,
    /// `[axis score, second component]` per sample.
    pub coordinates: Vec<[f64; 2]>,
    /// `true` where the sample falls on the right of the cut.
    pub sides: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewsDocument {
    pub version: u32,
    pub views: Vec<SplitView>,
}

/// Second coordinate: the next principal direction orthogonal to a linear
/// axis, or the second kernel component. Zero when the node has no more
/// variance to show.
fn second_component(model: &AxisModel, data: &DataMatrix, rows: &[usize]) -> Result<Vec<f64>> {
    let zeros = || vec![0.0; rows.len()];
    match model {
        AxisModel::Linear { direction, .. } => {
            let len = norm(direction);
            if len == 0.0 {
                return Ok(zeros());
            }
            let first: Vec<f64> = direction.iter().map(|v| v / len).collect();
            let view = CenteredRows::new(data, rows);
            match dominant_direction(&view, &[&first], PowerOptions::default()) {
                Ok(d) => Ok(rows.iter().map(|&r| view.centered_dot(r, &d.vector)).collect()),
                Err(Error::Convergence { last, .. }) => {
                    Ok(rows.iter().map(|&r| view.centered_dot(r, &last.vector)).collect())
                }
                Err(Error::ZeroVariance(_)) => Ok(zeros()),
                Err(e) => Err(e),
            }
        }
        AxisModel::Kernel(k) => {
            let p = KpcaProjector {
                kernel: k.kernel.clone(),
                components: 2,
                max_samples: rows.len(),
                power: PowerOptions::default(),
            };
            match p.project(data, rows, 0) {
                Ok(r) => Ok(r.components.get(1).cloned().unwrap_or_else(zeros)),
                Err(Error::ZeroVariance(_)) => Ok(zeros()),
                Err(e) => Err(e),
            }
        }
    }
}

fn view_of(node: &ClusterNode, data: &DataMatrix) -> Result<SplitView> {
    let proj = node.projection.as_ref().ok_or(Error::NoProjection(node.id))?;
    let rows = &node.sample_indices;
    let axis = if proj.scores.len() == rows.len() {
        proj.scores.clone()
    } else {
        proj.model.scores(data, rows)
    };
    let second = second_component(&proj.model, data, rows)?;
    let split_point = node
        .split_point
        .or_else(|| node.candidate.as_ref().filter(|c| c.feasible).map(|c| c.split_point));
    Ok(SplitView {
        node: node.id,
        parent: node.parent,
        depth: node.depth,
        size: node.size(),
        method: proj.method.clone(),
        criterion: node.criterion(),
        split_point,
        manual: node.is_manual(),
        score_range: proj.score_range,
        sample_indices: rows.clone(),
        sides: axis
            .iter()
            .map(|&s| split_point.is_some_and(|p| goes_right(s, p)))
            .collect(),
        coordinates: axis.iter().zip(&second).map(|(&a, &b)| [a, b]).collect(),
    })
}

fn check_data(tree: &ClusterTree, data: &DataMatrix) -> Result<()> {
    if tree.n_samples() != data.rows() {
        return Err(Error::Shape(format!(
            "tree covers {} samples, data has {}",
            tree.n_samples(),
            data.rows()
        )));
    }
    if let Some(d) = tree.feature_count() {
        if d != data.cols() {
            return Err(Error::Shape(format!("tree axes expect {d} features, data has {}", data.cols())));
        }
    }
    Ok(())
}

/// View of a single node; fails with [`Error::NoProjection`] when the node
/// was never projected.
pub fn node_view(tree: &ClusterTree, data: &DataMatrix, id: NodeId) -> Result<SplitView> {
    check_data(tree, data)?;
    view_of(tree.node(id)?, data)
}

/// One view per internal node, by ascending id.
pub fn export_split_views(tree: &ClusterTree, data: &DataMatrix) -> Result<Vec<SplitView>> {
    check_data(tree, data)?;
    tree.nodes()
        .filter(|n| !n.is_leaf())
        .map(|n| view_of(n, data))
        .collect()
}

pub fn views_to_json(views: Vec<SplitView>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ViewsDocument {
        version: VIEWS_FORMAT_VERSION,
        views,
    })?)
}
