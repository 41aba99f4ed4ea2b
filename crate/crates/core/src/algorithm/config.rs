use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::ProjectionConfig;
use crate::split::{BandwidthRule, DensitySplitOptions, MIN_GRID_SIZE};

/// Leaf budget used when a manual edit re-grows a subtree of an algorithm
/// that runs without a cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditBudget {
    /// Re-run the natural stopping rule inside the subtree.
    #[default]
    Natural,
    /// Restore the subtree's previous leaf count.
    Preserve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// `pddp`, `depddp`, `ipddp`, `km_pddp` or `bkm`.
    pub algorithm: String,
    pub max_clusters: Option<usize>,
    /// Ignored by `bkm`.
    pub projection: ProjectionConfig,
    pub trim_fraction: f64,
    pub bandwidth_scale: f64,
    pub bandwidth_rule: BandwidthRule,
    pub kde_grid_size: usize,
    /// dePDDP only accepts valleys between this score quantile and its mirror.
    pub valley_percentile: f64,
    pub min_sample_split: usize,
    pub seed: u64,
    /// 2-means restarts for `bkm`. `km_pddp` solves its 1-D problem exactly
    /// and ignores it.
    pub restarts: usize,
    pub edit_budget: EditBudget,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        let density = DensitySplitOptions::default();
        Self {
            algorithm: "pddp".into(),
            max_clusters: None,
            projection: ProjectionConfig::default(),
            trim_fraction: 0.1,
            bandwidth_scale: density.bandwidth_scale,
            bandwidth_rule: density.bandwidth_rule,
            kde_grid_size: density.grid_size,
            valley_percentile: density.percentile,
            min_sample_split: 5,
            seed: 0,
            restarts: 3,
            edit_budget: EditBudget::Natural,
        }
    }
}

impl AlgorithmConfig {
    pub fn new(algorithm: &str, max_clusters: Option<usize>) -> Self {
        Self {
            algorithm: algorithm.into(),
            max_clusters,
            ..Self::default()
        }
    }

    pub fn density_options(&self) -> DensitySplitOptions {
        DensitySplitOptions {
            bandwidth_rule: self.bandwidth_rule,
            bandwidth_scale: self.bandwidth_scale,
            grid_size: self.kde_grid_size,
            percentile: self.valley_percentile,
        }
    }

    /// Field-level checks. Whether `max_clusters` is required depends on the
    /// algorithm and is checked by the engine.
    pub fn validate(&self) -> Result<()> {
        if self.max_clusters == Some(0) {
            return Err(Error::Config("max_clusters must be at least 1".into()));
        }
        if !(0.0..=0.49).contains(&self.trim_fraction) {
            return Err(Error::Config(format!(
                "trim_fraction must lie in [0, 0.49], got {}",
                self.trim_fraction
            )));
        }
        if self.kde_grid_size < MIN_GRID_SIZE {
            return Err(Error::Config(format!("kde_grid_size must be >= {MIN_GRID_SIZE}")));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        self.density_options().validate()?;
        self.projection.validate()
    }
}
