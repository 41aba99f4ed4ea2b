use std::collections::HashMap;

use crate::error::{Error, Result};

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

fn entropy_of_counts(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Shannon entropy of a labeling in nats.
pub fn entropy(labels: &[usize]) -> f64 {
    let (l, k) = compact(labels);
    let mut counts = vec![0usize; k];
    for c in l {
        counts[c] += 1;
    }
    entropy_of_counts(&counts, labels.len() as f64)
}

/// Mutual information of two labelings in nats.
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("labelings have lengths {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Shape("labelings are empty".into()));
    }
    let (a, ka) = compact(a);
    let (b, kb) = compact(b);
    let n = a.len() as f64;
    let mut table = vec![0usize; ka * kb];
    let mut ra = vec![0usize; ka];
    let mut rb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * kb + y] += 1;
        ra[x] += 1;
        rb[y] += 1;
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i * kb + j];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (ra[i] as f64 * rb[j] as f64)).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Normalized mutual information, `I(A;B) / ((H(A) + H(B)) / 2)`.
///
/// When either labeling has zero entropy the score is 1 if both do (a
/// single cluster on each side) and 0 otherwise.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let mi = mutual_information(a, b)?;
    let (ha, hb) = (entropy(a), entropy(b));
    if ha == 0.0 || hb == 0.0 {
        return Ok(if ha == 0.0 && hb == 0.0 { 1.0 } else { 0.0 });
    }
    Ok((mi / (0.5 * (ha + hb))).clamp(0.0, 1.0))
}
