#![allow(dead_code)]

use divclust::eval::SeededPrng;
use divclust::linalg::DataMatrix;

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DataMatrix {
    let mut r = SeededPrng::new(seed);
    let values = (0..rows * cols).map(|_| r.normal()).collect();
    DataMatrix::new(rows, cols, values).unwrap()
}

pub fn center(x: &DataMatrix) -> DataMatrix {
    let (n, d) = (x.rows(), x.cols());
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            mean[j] += x.get(i, j) / n as f64;
        }
    }
    let values = (0..n * d).map(|k| x.get(k / d, k % d) - mean[k % d]).collect();
    DataMatrix::new(n, d, values).unwrap()
}

/// `XᵀX` as nested rows.
pub fn gram_t(x: &DataMatrix) -> Vec<Vec<f64>> {
    let d = x.cols();
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..x.rows() {
        let r = x.row(i);
        for a in 0..d {
            for b in 0..d {
                g[a][b] += r[a] * r[b];
            }
        }
    }
    g
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenpairs sorted by
/// descending eigenvalue; eigenvectors are columns of the returned matrix,
/// returned here as one vector per eigenvalue.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|j| (m[j][j], v.iter().map(|row| row[j]).collect())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / (na * nb)
}

/// Best within-cluster sum of squares over every boundary of the sorted
/// values, evaluated from scratch. Returns `(split point, between SS)`, or
/// `None` when all values are equal. Ties keep the smaller boundary.
pub fn exhaustive_kmeans_1d(scores: &[f64]) -> Option<(f64, f64)> {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let ss = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let total = ss(&s);
    let mut best: Option<(usize, f64)> = None;
    for b in 1..s.len() {
        if s[b - 1] == s[b] {
            continue;
        }
        let w = ss(&s[..b]) + ss(&s[b..]);
        if best.map_or(true, |(_, bw)| w < bw) {
            best = Some((b, w));
        }
    }
    best.map(|(b, w)| (s[b - 1] + (s[b] - s[b - 1]) / 2.0, total - w))
}

/// Lowest valley of a Gaussian KDE found by scanning `grid_size` points.
/// Mirrors the engine's defaults: normal-reference bandwidth, grid over
/// `[min - 3h, max + 3h]`, valleys restricted to the 10%..90% score quantiles.
pub struct KdeScan {
    pub bandwidth: f64,
    pub step: f64,
    pub valley: Option<f64>,
}

pub fn kde_valley_scan(scores: &[f64], grid_size: usize, percentile: f64) -> KdeScan {
    let m = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / m;
    let sd = (scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let h = (sd * (4.0 / (3.0 * m)).powf(0.2)).max(1e-9 * (hi - lo));
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (sorted.len() - 1) as f64;
        let (a, b) = (pos.floor() as usize, pos.ceil() as usize);
        sorted[a] + (sorted[b] - sorted[a]) * (pos - a as f64)
    };
    let (qlo, qhi) = (q(percentile), q(1.0 - percentile));
    let start = lo - 3.0 * h;
    let step = (hi - lo + 6.0 * h) / (grid_size - 1) as f64;
    let dens = |x: f64| {
        scores
            .iter()
            .map(|p| (-0.5 * ((x - p) / h).powi(2)).exp())
            .sum::<f64>()
            / (m * h * (2.0 * std::f64::consts::PI).sqrt())
    };
    let xs: Vec<f64> = (0..grid_size).map(|i| start + step * i as f64).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| dens(x)).collect();
    let mut valley: Option<(f64, f64)> = None;
    let mut i = 1;
    while i + 1 < grid_size {
        let mut j = i;
        while j + 2 < grid_size && ds[j + 1] == ds[i] {
            j += 1;
        }
        if ds[i] < ds[i - 1] && ds[j] < ds[j + 1] && xs[i] >= qlo && xs[i] <= qhi && valley.map_or(true, |(_, d)| ds[i] < d) {
            valley = Some((xs[i], ds[i]));
        }
        i = j + 1;
    }
    KdeScan {
        bandwidth: h,
        step,
        valley: valley.map(|v| v.0),
    }
}

/// `nmi` computed directly from the contingency table with natural logs.
pub fn contingency_nmi(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::BTreeMap;
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut pa: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0 / n;
        *pa.entry(x).or_default() += 1.0 / n;
        *pb.entry(y).or_default() += 1.0 / n;
    }
    let h = |p: &BTreeMap<usize, f64>| -p.values().map(|v| v * v.ln()).sum::<f64>();
    let (ha, hb) = (h(&pa), h(&pb));
    if ha.abs() < 1e-15 || hb.abs() < 1e-15 {
        return if ha.abs() < 1e-15 && hb.abs() < 1e-15 { 1.0 } else { 0.0 };
    }
    let mi: f64 = joint.iter().map(|(&(x, y), &p)| p * (p / (pa[&x] * pb[&y])).ln()).sum();
    mi / ((ha + hb) / 2.0)
}

/// Whether two labelings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
}
