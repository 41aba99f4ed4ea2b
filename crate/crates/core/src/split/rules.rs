use serde::{Deserialize, Serialize};

use super::kde::{kde_1d, quantile_sorted, Bandwidth, BandwidthRule, MIN_GRID_SIZE};
use super::{score_range, SplitCandidate, SplitRule};
use crate::error::{Error, Result};

/// Knobs of the density-valley rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensitySplitOptions {
    pub bandwidth_rule: BandwidthRule,
    pub bandwidth_scale: f64,
    pub grid_size: usize,
    /// Valleys are only accepted between the `percentile` and
    /// `1 - percentile` quantiles of the scores.
    pub percentile: f64,
}

impl Default for DensitySplitOptions {
    fn default() -> Self {
        Self {
            bandwidth_rule: BandwidthRule::NormalReference,
            bandwidth_scale: 1.0,
            grid_size: 512,
            percentile: 0.1,
        }
    }
}

impl DensitySplitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_scale > 0.0) || !self.bandwidth_scale.is_finite() {
            return Err(Error::Config(format!(
                "bandwidth_scale must be positive, got {}",
                self.bandwidth_scale
            )));
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::Config(format!("kde grid size must be >= {MIN_GRID_SIZE}")));
        }
        if !(0.0..0.5).contains(&self.percentile) {
            return Err(Error::Config(format!(
                "split percentile must lie in [0, 0.5), got {}",
                self.percentile
            )));
        }
        Ok(())
    }
}

fn all_equal(scores: &[f64]) -> bool {
    let (lo, hi) = score_range(scores);
    lo == hi
}

/// Cuts at the lowest interior local minimum of a Gaussian KDE of the scores.
/// The criterion is the negated valley density, so the deepest valley among
/// leaves is split first. No valley means the node is not split.
pub fn depddp_split(scores: &[f64], opts: &DensitySplitOptions) -> Result<SplitCandidate> {
    opts.validate()?;
    if scores.len() < 2 || all_equal(scores) {
        return Ok(SplitCandidate::infeasible(SplitRule::DensityValley));
    }
    let kde = kde_1d(
        scores,
        Bandwidth::Auto {
            rule: opts.bandwidth_rule,
            scale: opts.bandwidth_scale,
        },
        opts.grid_size,
    )?;
    let (lo, hi) = if opts.percentile > 0.0 {
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        (
            quantile_sorted(&sorted, opts.percentile),
            quantile_sorted(&sorted, 1.0 - opts.percentile),
        )
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    let d = &kde.densities;
    let mut best: Option<usize> = None;
    let mut i = 1;
    while i < d.len() - 1 {
        // a run of equal densities counts as one minimum at its left end
        let mut j = i;
        while j + 1 < d.len() - 1 && d[j + 1] == d[i] {
            j += 1;
        }
        let x = kde.grid[i];
        if d[i] < d[i - 1] && d[j] < d[j + 1] && x >= lo && x <= hi && best.is_none_or(|b| d[i] < d[b]) {
            best = Some(i);
        }
        i = j + 1;
    }
    Ok(match best {
        Some(i) => SplitCandidate::checked(scores, kde.grid[i], -d[i], SplitRule::DensityValley),
        None => SplitCandidate::infeasible(SplitRule::DensityValley),
    })
}

/// Midpoint of the widest gap between consecutive sorted scores, ignoring
/// `floor(trim_fraction * n)` points at each tail during the search. The
/// resulting cut still partitions every score.
pub fn ipddp_split(scores: &[f64], trim_fraction: f64) -> Result<SplitCandidate> {
    if !(0.0..=0.49).contains(&trim_fraction) {
        return Err(Error::Config(format!(
            "trim fraction must lie in [0, 0.49], got {trim_fraction}"
        )));
    }
    let n = scores.len();
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    // trim <= 0.49 n, so the retained slice is never inverted
    let trim = (trim_fraction * n as f64 + 1e-9).floor() as usize;
    let kept = &sorted[trim..n - trim];
    if kept.len() < 2 {
        return Ok(SplitCandidate::infeasible(SplitRule::MaxGap));
    }
    let mut best = 0usize;
    let mut best_gap = kept[1] - kept[0];
    for i in 1..kept.len() - 1 {
        let gap = kept[i + 1] - kept[i];
        if gap > best_gap {
            best = i;
            best_gap = gap;
        }
    }
    if best_gap <= 0.0 {
        return Ok(SplitCandidate::infeasible(SplitRule::MaxGap));
    }
    let point = kept[best] + best_gap / 2.0;
    Ok(SplitCandidate::checked(scores, point, best_gap, SplitRule::MaxGap))
}

/// Exact 2-means on the line by a single prefix-sum sweep over every
/// boundary between distinct sorted neighbours. The criterion is the
/// between-cluster sum of squares (total minus optimal within).
pub fn kmeans_1d_split(scores: &[f64]) -> SplitCandidate {
    let n = scores.len();
    if n < 2 || all_equal(scores) {
        return SplitCandidate::infeasible(SplitRule::KMeans1d);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    // shift for numerical stability of the sum-of-squares identity
    let shift = sorted.iter().sum::<f64>() / n as f64;
    let total_s1: f64 = sorted.iter().map(|x| x - shift).sum();
    let total_s2: f64 = sorted.iter().map(|x| (x - shift).powi(2)).sum();
    let total_ss = total_s2 - total_s1 * total_s1 / n as f64;

    let (mut s1, mut s2) = (0.0, 0.0);
    let mut best: Option<(usize, f64)> = None;
    for b in 1..n {
        let x = sorted[b - 1] - shift;
        s1 += x;
        s2 += x * x;
        if sorted[b - 1] == sorted[b] {
            continue;
        }
        let (nl, nr) = (b as f64, (n - b) as f64);
        let (r1, r2) = (total_s1 - s1, total_s2 - s2);
        let within = (s2 - s1 * s1 / nl) + (r2 - r1 * r1 / nr);
        if best.is_none_or(|(_, w)| within < w) {
            best = Some((b, within));
        }
    }
    match best {
        Some((b, within)) => {
            let point = sorted[b - 1] + (sorted[b] - sorted[b - 1]) / 2.0;
            SplitCandidate::checked(scores, point, (total_ss - within).max(0.0), SplitRule::KMeans1d)
        }
        None => SplitCandidate::infeasible(SplitRule::KMeans1d),
    }
}

/// Sign split of centered scores; `scatter` is the node's total squared
/// deviation in the original space.
pub fn pddp_split(scores: &[f64], scatter: f64) -> SplitCandidate {
    SplitCandidate::checked(scores, 0.0, scatter, SplitRule::Mean)
}
