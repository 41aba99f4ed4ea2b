//! Clustering scores, the benchmark harness and the shared random source.

mod bench;
mod nmi;
mod prng;

pub use bench::{
    bench, render_table, BaselineSpec, BenchCell, BenchConfig, BenchDataset, BenchEntry, BenchReport,
};
pub use nmi::{entropy, mutual_information, nmi};
pub use prng::{mix_seed, SeededPrng};
