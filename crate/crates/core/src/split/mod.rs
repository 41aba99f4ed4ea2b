//! One-dimensional split rules: where to cut a node's projected scores and
//! how attractive that cut is for leaf selection (larger criterion = split sooner).

mod kde;
mod rules;
mod two_means;

use serde::{Deserialize, Serialize};

pub use kde::{
    density_at, kde_1d, normal_reference_bandwidth, silverman_bandwidth, Bandwidth, BandwidthRule, Kde1d,
    MIN_GRID_SIZE,
};
pub use rules::{depddp_split, ipddp_split, kmeans_1d_split, pddp_split, DensitySplitOptions};
pub use two_means::{two_means, two_means_rows, TwoMeansResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Sign of the centered projection.
    Mean,
    /// Lowest density valley of a kernel density estimate.
    DensityValley,
    /// Midpoint of the widest gap after tail trimming.
    MaxGap,
    /// Optimal one-dimensional 2-means boundary.
    KMeans1d,
    /// 2-means in the original feature space.
    TwoMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub split_point: f64,
    pub criterion: f64,
    pub feasible: bool,
    pub rule: SplitRule,
}

impl SplitCandidate {
    pub fn infeasible(rule: SplitRule) -> Self {
        Self {
            split_point: 0.0,
            criterion: 0.0,
            feasible: false,
            rule,
        }
    }

    /// Feasible candidate if `point` leaves both sides non-empty, otherwise infeasible.
    pub(crate) fn checked(scores: &[f64], point: f64, criterion: f64, rule: SplitRule) -> Self {
        if cuts_both_sides(scores, point) {
            Self {
                split_point: point,
                criterion,
                feasible: true,
                rule,
            }
        } else {
            Self::infeasible(rule)
        }
    }
}

/// Right side of a cut: `score >= point`.
#[inline]
pub fn goes_right(score: f64, point: f64) -> bool {
    score >= point
}

pub fn cuts_both_sides(scores: &[f64], point: f64) -> bool {
    let right = scores.iter().filter(|&&s| goes_right(s, point)).count();
    right > 0 && right < scores.len()
}

/// Min and max of a non-empty score slice.
pub fn score_range(scores: &[f64]) -> (f64, f64) {
    scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)))
}
