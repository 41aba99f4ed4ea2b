//! The divisive drivers. Every algorithm implements [`DivisiveAlgorithm`]
//! (how to analyze one node) and is looked up by name in an
//! [`AlgorithmRegistry`]; the shared growth loop lives in [`Engine`].

mod config;
mod engine;
mod variants;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;
use crate::projection::ProjectorRegistry;
use crate::split::SplitCandidate;
use crate::tree::NodeProjection;

pub use config::{AlgorithmConfig, EditBudget};
pub use engine::{fit, predict, Edit, Engine, FitOutcome};
pub use variants::{Bkm, Depddp, Ipddp, KmPddp, Pddp};

/// Result of analyzing one node: its splitting axis (absent when the node
/// cannot be projected) and the proposed cut.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAnalysis {
    pub projection: Option<NodeProjection>,
    pub candidate: SplitCandidate,
}

pub trait DivisiveAlgorithm: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Whether `max_clusters` must be given.
    fn requires_cluster_count(&self) -> bool {
        true
    }

    /// Selection criterion that is known without projecting the node. When
    /// present, the engine defers [`DivisiveAlgorithm::analyze`] until the
    /// node is actually selected.
    fn prior_criterion(&self, _data: &DataMatrix, _rows: &[usize]) -> Option<f64> {
        None
    }

    /// Projects the node and proposes a split. `seed` is derived from the
    /// node's samples.
    fn analyze(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<NodeAnalysis>;
}

pub type AlgorithmFactory = fn(&AlgorithmConfig, &ProjectorRegistry) -> Result<Box<dyn DivisiveAlgorithm>>;

/// Name → constructor table for divisive algorithms.
#[derive(Clone)]
pub struct AlgorithmRegistry {
    factories: BTreeMap<String, AlgorithmFactory>,
}

impl Default for AlgorithmRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("pddp", |c, p| Ok(Box::new(Pddp::new(c, p)?)));
        r.register("depddp", |c, p| Ok(Box::new(Depddp::new(c, p)?)));
        r.register("ipddp", |c, p| Ok(Box::new(Ipddp::new(c, p)?)));
        r.register("km_pddp", |c, p| Ok(Box::new(KmPddp::new(c, p)?)));
        r.register("bkm", |c, _| Ok(Box::new(Bkm::new(c))));
        r
    }
}

impl AlgorithmRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: AlgorithmFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, config: &AlgorithmConfig, projectors: &ProjectorRegistry) -> Result<Box<dyn DivisiveAlgorithm>> {
        let factory = self.factories.get(&config.algorithm).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm '{}' (known: {})",
                config.algorithm,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(config, projectors)
    }
}

impl fmt::Debug for AlgorithmRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}
