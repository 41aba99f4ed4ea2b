use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID_SIZE: usize = 16;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Rule-of-thumb bandwidth selectors for Gaussian kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `h = σ · (4 / 3m)^(1/5)`
    #[default]
    NormalReference,
    /// `h = 0.9 · min(σ, IQR / 1.34) · m^(-1/5)`
    Silverman,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Auto { rule: BandwidthRule, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kde1d {
    pub points: Vec<f64>,
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub densities: Vec<f64>,
}

fn std_dev(points: &[f64]) -> f64 {
    let m = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mean = points.iter().sum::<f64>() / m;
    (points.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
}

/// Linear-interpolation quantile of already sorted values.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn floored(h: f64, points: &[f64]) -> f64 {
    let (lo, hi) = super::score_range(points);
    h.max(1e-9 * (hi - lo))
}

pub fn normal_reference_bandwidth(points: &[f64]) -> f64 {
    let m = points.len() as f64;
    floored(std_dev(points) * (4.0 / (3.0 * m)).powf(0.2), points)
}

pub fn silverman_bandwidth(points: &[f64]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = std_dev(points);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    floored(0.9 * spread * (points.len() as f64).powf(-0.2), points)
}

/// Gaussian kernel density estimate at a single coordinate.
pub fn density_at(points: &[f64], h: f64, x: f64) -> f64 {
    let sum: f64 = points
        .iter()
        .map(|p| {
            let u = (x - p) / h;
            (-0.5 * u * u).exp()
        })
        .sum();
    sum * INV_SQRT_2PI / (points.len() as f64 * h)
}

/// Evaluates the density on `grid_size` evenly spaced coordinates spanning
/// `[min - 3h, max + 3h]`.
pub fn kde_1d(points: &[f64], bandwidth: Bandwidth, grid_size: usize) -> Result<Kde1d> {
    if points.is_empty() {
        return Err(Error::Data("density estimate needs at least one point".into()));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::Data(format!("non-finite score {p}")));
    }
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::Config(format!("grid size must be >= {MIN_GRID_SIZE}, got {grid_size}")));
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Auto { rule, scale } => {
            if !(scale > 0.0) {
                return Err(Error::Config(format!("bandwidth scale must be positive, got {scale}")));
            }
            scale
                * match rule {
                    BandwidthRule::NormalReference => normal_reference_bandwidth(points),
                    BandwidthRule::Silverman => silverman_bandwidth(points),
                }
        }
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Data(format!("bandwidth must be positive, got {h}")));
    }
    let (lo, hi) = super::score_range(points);
    let start = lo - 3.0 * h;
    let step = (hi - lo + 6.0 * h) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| start + step * i as f64).collect();
    let densities = grid.iter().map(|&x| density_at(points, h, x)).collect();
    Ok(Kde1d {
        points: points.to_vec(),
        bandwidth: h,
        grid,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_peak() {
        assert!((density_at(&[0.0], 1.0, 0.0) - 0.398942).abs() < 1e-6);
        assert!((density_at(&[0.0], 1.0, 0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_points_symmetric_density() {
        let k = kde_1d(&[-1.0, 1.0], Bandwidth::Fixed(0.7), 65).unwrap();
        let g = k.grid.len();
        for i in 0..g {
            assert!((k.grid[i] + k.grid[g - 1 - i]).abs() < 1e-12);
            assert!((k.densities[i] - k.densities[g - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_spans_padded_range() {
        let k = kde_1d(&[2.0, 5.0], Bandwidth::Fixed(0.5), 16).unwrap();
        assert!((k.grid[0] - 0.5).abs() < 1e-12);
        assert!((k.grid[15] - 6.5).abs() < 1e-12);
        assert!(k.grid.windows(2).all(|w| w[0] < w[1]));
        assert!(k.densities.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kde_1d(&[], Bandwidth::Fixed(1.0), 32).is_err());
        assert!(kde_1d(&[1.0], Bandwidth::Fixed(1.0), 8).is_err());
        assert!(kde_1d(&[1.0], Bandwidth::Fixed(0.0), 32).is_err());
        let auto = Bandwidth::Auto {
            rule: BandwidthRule::Silverman,
            scale: -1.0,
        };
        assert!(kde_1d(&[1.0, 2.0], auto, 32).is_err());
    }

    #[test]
    fn bandwidth_rules() {
        let pts = [1.0, 2.0, 3.0, 4.0, 5.0];
        // sd = sqrt(2.5); IQR = 2
        let sd = 2.5f64.sqrt();
        let s = 0.9 * sd.min(2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&pts) - s).abs() < 1e-12);
        let nr = sd * (4.0 / 15.0f64).powf(0.2);
        assert!((normal_reference_bandwidth(&pts) - nr).abs() < 1e-12);
    }
}
