//! Per-node dimensionality reduction. Each method sits behind [`Projector`]
//! and is looked up by name in a [`ProjectorRegistry`].

mod ica;
mod kpca;
mod pca;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, kernel_value, DataMatrix, KernelSpec, PowerOptions};

pub use ica::{project_ica, IcaProjector};
pub use kpca::{project_kpca, KpcaProjector};
pub use pca::{project_pca, PcaProjector};

pub const DEFAULT_MAX_KERNEL_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    /// Registered projector name: `pca`, `kpca` or `ica` out of the box.
    pub method: String,
    /// Kernel for `kpca`; defaults to rbf with gamma = 1/d when omitted.
    pub kernel: Option<KernelSpec>,
    /// 1 or 2. Defaults to 2 for `ica` and 1 otherwise.
    pub components: Option<usize>,
    /// Largest node the kernel projector will build a Gram matrix for.
    pub max_kernel_samples: usize,
    pub power: PowerOptions,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            method: "pca".into(),
            kernel: None,
            components: None,
            max_kernel_samples: DEFAULT_MAX_KERNEL_SAMPLES,
            power: PowerOptions::default(),
        }
    }
}

impl ProjectionConfig {
    pub fn pca() -> Self {
        Self::default()
    }

    pub fn kpca(kernel: KernelSpec) -> Self {
        Self {
            method: "kpca".into(),
            kernel: Some(kernel),
            ..Self::default()
        }
    }

    pub fn ica() -> Self {
        Self {
            method: "ica".into(),
            ..Self::default()
        }
    }

    pub fn component_count(&self) -> usize {
        self.components.unwrap_or(if self.method == "ica" { 2 } else { 1 })
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.component_count();
        if !(1..=2).contains(&c) {
            return Err(Error::Config(format!("projection components must be 1 or 2, got {c}")));
        }
        if self.kernel.is_some() && self.method != "kpca" {
            return Err(Error::Config(format!(
                "a kernel was given but projection method is '{}'",
                self.method
            )));
        }
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        self.power.validate()
    }
}

/// What is needed to place any sample on a node's splitting axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AxisModel {
    /// `score(x) = (x - mean) · direction`
    Linear { mean: Vec<f64>, direction: Vec<f64> },
    Kernel(KernelAxis),
}

/// Dual representation of a kernel principal axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelAxis {
    pub kernel: KernelSpec,
    pub dims: usize,
    /// Node samples, row-major.
    pub support: Vec<f64>,
    /// Eigenvector of the centered Gram matrix divided by √eigenvalue.
    pub coefficients: Vec<f64>,
    /// Column means of the uncentered Gram matrix.
    pub gram_means: Vec<f64>,
    pub gram_grand_mean: f64,
}

impl KernelAxis {
    pub fn support_len(&self) -> usize {
        self.coefficients.len()
    }

    fn support_row(&self, j: usize) -> &[f64] {
        &self.support[j * self.dims..(j + 1) * self.dims]
    }

    /// Centered kernel row `k̃(x, s_j)` for every support sample.
    pub fn centered_kernel_row(&self, x: &[f64]) -> Vec<f64> {
        let m = self.support_len();
        let raw: Vec<f64> = (0..m).map(|j| kernel_value(&self.kernel, x, self.support_row(j))).collect();
        let row_mean = raw.iter().sum::<f64>() / m as f64;
        raw.iter()
            .zip(&self.gram_means)
            .map(|(k, c)| k - row_mean - c + self.gram_grand_mean)
            .collect()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.centered_kernel_row(x), &self.coefficients)
    }
}

impl AxisModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            AxisModel::Linear { mean, direction } => x
                .iter()
                .zip(mean)
                .zip(direction)
                .map(|((v, m), w)| (v - m) * w)
                .sum(),
            AxisModel::Kernel(k) => k.score(x),
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            AxisModel::Linear { direction, .. } => direction.len(),
            AxisModel::Kernel(k) => k.dims,
        }
    }

    /// Scores of the given dataset rows, in order.
    pub fn scores(&self, data: &DataMatrix, rows: &[usize]) -> Vec<f64> {
        use rayon::prelude::*;
        match self {
            AxisModel::Linear { .. } if rows.len() * data.cols() < 1 << 15 => {
                rows.iter().map(|&r| self.score(data.row(r))).collect()
            }
            _ => rows.par_iter().map(|&r| self.score(data.row(r))).collect(),
        }
    }
}

/// Projected coordinates of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub method: String,
    /// One score vector per component; `components[0]` is the splitting axis.
    pub components: Vec<Vec<f64>>,
    /// Model of the splitting axis.
    pub model: AxisModel,
}

impl ProjectionResult {
    pub fn axis_scores(&self) -> &[f64] {
        &self.components[0]
    }
}

pub trait Projector: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Projects the given rows. `seed` feeds stochastic methods only.
    fn project(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<ProjectionResult>;
}

pub type ProjectorFactory = fn(&ProjectionConfig) -> Result<Box<dyn Projector>>;

/// Name → constructor table for projection methods.
#[derive(Clone)]
pub struct ProjectorRegistry {
    factories: BTreeMap<String, ProjectorFactory>,
}

impl Default for ProjectorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("pca", |c| Ok(Box::new(PcaProjector::from_config(c))));
        r.register("kpca", |c| Ok(Box::new(KpcaProjector::from_config(c))));
        r.register("ica", |c| Ok(Box::new(IcaProjector::from_config(c))));
        r
    }
}

impl ProjectorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: ProjectorFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, config: &ProjectionConfig) -> Result<Box<dyn Projector>> {
        config.validate()?;
        let factory = self.factories.get(&config.method).ok_or_else(|| {
            Error::Config(format!(
                "unknown projection '{}' (known: {})",
                config.method,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(config)
    }
}

impl fmt::Debug for ProjectorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

pub(crate) fn require_samples(rows: &[usize]) -> Result<()> {
    if rows.len() < 2 {
        return Err(Error::ZeroVariance(format!(
            "a node needs at least 2 samples to project, got {}",
            rows.len()
        )));
    }
    Ok(())
}
