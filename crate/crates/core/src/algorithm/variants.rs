use super::{AlgorithmConfig, DivisiveAlgorithm, NodeAnalysis};
use crate::error::{Error, Result};
use crate::linalg::{norm, DataMatrix};
use crate::projection::{AxisModel, Projector, ProjectorRegistry};
use crate::split::{
    depddp_split, ipddp_split, kmeans_1d_split, pddp_split, two_means_rows, DensitySplitOptions, SplitCandidate,
    SplitRule,
};
use crate::tree::NodeProjection;

/// Projects a node; `None` when it carries too little variance or rank.
fn project(projector: &dyn Projector, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<Option<NodeProjection>> {
    match projector.project(data, rows, seed) {
        Ok(p) => {
            let scores = p.components.into_iter().next().unwrap_or_default();
            Ok(Some(NodeProjection::new(p.method, p.model, scores)))
        }
        Err(Error::ZeroVariance(_) | Error::Rank { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn analyze_with(
    projector: &dyn Projector,
    data: &DataMatrix,
    rows: &[usize],
    seed: u64,
    rule: SplitRule,
    split: impl FnOnce(&[f64]) -> Result<SplitCandidate>,
) -> Result<NodeAnalysis> {
    let projection = project(projector, data, rows, seed)?;
    let candidate = match &projection {
        Some(p) => split(&p.scores)?,
        None => SplitCandidate::infeasible(rule),
    };
    Ok(NodeAnalysis { projection, candidate })
}

/// Sign split on the principal axis; leaves ranked by scatter.
#[derive(Debug)]
pub struct Pddp {
    projector: Box<dyn Projector>,
}

impl Pddp {
    pub fn new(config: &AlgorithmConfig, projectors: &ProjectorRegistry) -> Result<Self> {
        Ok(Self {
            projector: projectors.build(&config.projection)?,
        })
    }
}

impl DivisiveAlgorithm for Pddp {
    fn name(&self) -> &'static str {
        "pddp"
    }

    fn prior_criterion(&self, data: &DataMatrix, rows: &[usize]) -> Option<f64> {
        Some(data.scatter(rows))
    }

    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis> {
        let scatter = data.scatter(rows);
        analyze_with(&*self.projector, data, rows, seed, SplitRule::Mean, |s| {
            Ok(pddp_split(s, scatter))
        })
    }
}

/// Density-valley split; stops by itself when no leaf has a valley.
#[derive(Debug)]
pub struct Depddp {
    projector: Box<dyn Projector>,
    options: DensitySplitOptions,
}

impl Depddp {
    pub fn new(config: &AlgorithmConfig, projectors: &ProjectorRegistry) -> Result<Self> {
        let options = config.density_options();
        options.validate()?;
        Ok(Self {
            projector: projectors.build(&config.projection)?,
            options,
        })
    }
}

impl DivisiveAlgorithm for Depddp {
    fn name(&self) -> &'static str {
        "depddp"
    }

    fn requires_cluster_count(&self) -> bool {
        false
    }

    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis> {
        analyze_with(&*self.projector, data, rows, seed, SplitRule::DensityValley, |s| {
            depddp_split(s, &self.options)
        })
    }
}

/// Widest trimmed gap.
#[derive(Debug)]
pub struct Ipddp {
    projector: Box<dyn Projector>,
    trim_fraction: f64,
}

impl Ipddp {
    pub fn new(config: &AlgorithmConfig, projectors: &ProjectorRegistry) -> Result<Self> {
        Ok(Self {
            projector: projectors.build(&config.projection)?,
            trim_fraction: config.trim_fraction,
        })
    }
}

impl DivisiveAlgorithm for Ipddp {
    fn name(&self) -> &'static str {
        "ipddp"
    }

    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis> {
        analyze_with(&*self.projector, data, rows, seed, SplitRule::MaxGap, |s| {
            ipddp_split(s, self.trim_fraction)
        })
    }
}

/// Exact 1-D 2-means on the principal scores.
#[derive(Debug)]
pub struct KmPddp {
    projector: Box<dyn Projector>,
}

impl KmPddp {
    pub fn new(config: &AlgorithmConfig, projectors: &ProjectorRegistry) -> Result<Self> {
        Ok(Self {
            projector: projectors.build(&config.projection)?,
        })
    }
}

impl DivisiveAlgorithm for KmPddp {
    fn name(&self) -> &'static str {
        "km_pddp"
    }

    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis> {
        analyze_with(&*self.projector, data, rows, seed, SplitRule::KMeans1d, |s| {
            Ok(kmeans_1d_split(s))
        })
    }
}

/// Bisecting k-means. The 2-means boundary is stored as a linear axis through
/// the midpoint of the two centers, along their difference, cut at 0; a
/// sample goes right exactly when it is at least as close to the second center.
#[derive(Debug)]
pub struct Bkm {
    restarts: usize,
}

impl Bkm {
    pub fn new(config: &AlgorithmConfig) -> Self {
        Self {
            restarts: config.restarts,
        }
    }
}

impl DivisiveAlgorithm for Bkm {
    fn name(&self) -> &'static str {
        "bkm"
    }

    fn prior_criterion(&self, data: &DataMatrix, rows: &[usize]) -> Option<f64> {
        Some(data.scatter(rows))
    }

    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis> {
        let infeasible = NodeAnalysis {
            projection: None,
            candidate: SplitCandidate::infeasible(SplitRule::TwoMeans),
        };
        let tm = two_means_rows(data, rows, seed, self.restarts);
        if !tm.feasible {
            return Ok(infeasible);
        }
        let [c0, c1] = &tm.centers;
        let diff: Vec<f64> = c1.iter().zip(c0).map(|(a, b)| a - b).collect();
        let len = norm(&diff);
        if len == 0.0 {
            return Ok(infeasible);
        }
        let model = AxisModel::Linear {
            mean: c0.iter().zip(c1).map(|(a, b)| 0.5 * (a + b)).collect(),
            direction: diff.iter().map(|v| v / len).collect(),
        };
        let scores = model.scores(data, rows);
        let candidate = SplitCandidate::checked(&scores, 0.0, data.scatter(rows), SplitRule::TwoMeans);
        Ok(NodeAnalysis {
            projection: Some(NodeProjection::new("two_means", model, scores)),
            candidate,
        })
    }
}
