//! Divisive hierarchical clustering by principal direction partitioning.
//!
//! A dataset is split top-down into a binary [`tree::ClusterTree`]. At each
//! step a leaf is projected onto a one-dimensional axis (PCA, kernel PCA or
//! ICA, see [`projection`]), a split rule picks a cut on that axis
//! ([`split`]), and the leaf with the most attractive cut is divided next.
//! The five drivers in [`algorithm`] differ only in their projection and
//! split rule:
//!
//! | name      | cut                                        | leaf ranking       |
//! |-----------|--------------------------------------------|--------------------|
//! | `pddp`    | sign of the centered projection            | scatter            |
//! | `depddp`  | deepest valley of a kernel density estimate | valley density     |
//! | `ipddp`   | middle of the widest gap, tails trimmed    | gap length         |
//! | `km_pddp` | exact 1-D 2-means                          | explained variance |
//! | `bkm`     | 2-means in feature space                   | scatter            |
//!
//! ```
//! use divclust::algorithm::{fit, AlgorithmConfig};
//! use divclust::linalg::DataMatrix;
//!
//! let x = DataMatrix::from_rows(&[[0.0, 0.1], [0.2, 0.0], [10.0, 9.9], [9.8, 10.0]]).unwrap();
//! let mut config = AlgorithmConfig::new("pddp", Some(2));
//! config.min_sample_split = 2;
//! let out = fit(&config, &x).unwrap();
//! assert_eq!(out.labels, vec![0, 0, 1, 1]);
//! ```

pub mod algorithm;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod projection;
pub mod split;
pub mod tree;

pub use error::{Error, Result};
