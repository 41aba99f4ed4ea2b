use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::SeededPrng;
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Minimum distance between any two centers.
    pub separation: f64,
    /// Per-coordinate standard deviation around each center.
    pub spread: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Blobs {
    /// Samples labelled by generating center.
    pub data: DataMatrix,
    pub centers: Vec<Vec<f64>>,
}

/// Gaussian blobs around seeded centers.
///
/// Centers are drawn uniformly from the box `[-separation, separation]^d`
/// and redrawn until every pair is at least `separation` apart; the box is
/// widened by 25% after every 100 rejected draws. Sample `i` belongs to
/// center `i % k`, so cluster sizes differ by at most one.
pub fn make_blobs(spec: &BlobSpec) -> Result<Blobs> {
    let BlobSpec {
        n,
        d,
        k,
        separation,
        spread,
        seed,
    } = *spec;
    if k == 0 || n < k || d == 0 {
        return Err(Error::Config(format!("make_blobs needs n >= k >= 1 and d >= 1 (n={n}, k={k}, d={d})")));
    }
    if !(separation > 0.0 && spread > 0.0) || !separation.is_finite() || !spread.is_finite() {
        return Err(Error::Config("separation and spread must be positive".into()));
    }
    let mut rng = SeededPrng::new(seed);
    let mut half = separation;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut rejected = 0usize;
    while centers.len() < k {
        let c: Vec<f64> = (0..d).map(|_| rng.uniform(-half, half)).collect();
        let ok = centers.iter().all(|o| {
            let d2: f64 = o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= separation
        });
        if ok {
            centers.push(c);
        } else {
            rejected += 1;
            if rejected % 100 == 0 {
                half *= 1.25;
            }
        }
    }
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = &centers[i % k];
        values.extend(c.iter().map(|m| m + spread * rng.normal()));
        labels.push(i % k);
    }
    Ok(Blobs {
        data: DataMatrix::new(n, d, values)?.with_labels(labels)?,
        centers,
    })
}

/// Concentric noisy circles in the plane, one per radius, labelled by ring.
/// Sample `i` lies on ring `i % radii.len()`.
pub fn make_rings(n: usize, radii: &[f64], noise: f64, seed: u64) -> Result<DataMatrix> {
    if radii.is_empty() || n < radii.len() {
        return Err(Error::Config("make_rings needs at least one sample per ring".into()));
    }
    if !(noise >= 0.0) {
        return Err(Error::Config("ring noise must be nonnegative".into()));
    }
    let mut rng = SeededPrng::new(seed);
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = radii[i % radii.len()];
        let t = rng.uniform(0.0, std::f64::consts::TAU);
        values.push(r * t.cos() + noise * rng.normal());
        values.push(r * t.sin() + noise * rng.normal());
        labels.push(i % radii.len());
    }
    DataMatrix::new(n, 2, values)?.with_labels(labels)
}

/// Appends `count` points drawn uniformly from the bounding box of `x`.
/// Appended rows get the label one past the largest existing label.
/// Returns the extended matrix and a mask marking the original rows.
pub fn add_uniform_outliers(x: &DataMatrix, count: usize, seed: u64) -> Result<(DataMatrix, Vec<bool>)> {
    let d = x.cols();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            lo[j] = lo[j].min(*v);
            hi[j] = hi[j].max(*v);
        }
    }
    let mut rng = SeededPrng::new(seed);
    let mut values = x.values().to_vec();
    for _ in 0..count {
        values.extend((0..d).map(|j| rng.uniform(lo[j], hi[j])));
    }
    let n = x.rows() + count;
    let mut out = DataMatrix::new(n, d, values)?;
    if let Some(labels) = x.labels() {
        let extra = labels.iter().max().map_or(0, |m| m + 1);
        let mut l = labels.to_vec();
        l.resize(n, extra);
        out = out.with_labels(l)?;
    }
    let mask = (0..n).map(|i| i < x.rows()).collect();
    Ok((out, mask))
}
