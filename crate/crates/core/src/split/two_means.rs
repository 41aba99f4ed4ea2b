use crate::eval::SeededPrng;
use crate::linalg::DataMatrix;

const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoMeansResult {
    /// `true` for samples assigned to the second center.
    pub assignment: Vec<bool>,
    pub inertia: f64,
    pub centers: [Vec<f64>; 2],
    /// Both clusters non-empty.
    pub feasible: bool,
    /// Inertia after each Lloyd update of the winning restart.
    pub trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct Run {
    assignment: Vec<bool>,
    centers: [Vec<f64>; 2],
    inertia: f64,
    trace: Vec<f64>,
}

fn plus_plus_init(data: &DataMatrix, rows: &[usize], rng: &mut SeededPrng) -> Option<[Vec<f64>; 2]> {
    let first = rows[rng.below(rows.len() as u64) as usize];
    let c0 = data.row(first).to_vec();
    let weights: Vec<f64> = rows.iter().map(|&r| sq_dist(data.row(r), &c0)).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut target = rng.next_f64() * total;
    let mut pick = rows.len() - 1;
    for (k, w) in weights.iter().enumerate() {
        if target < *w {
            pick = k;
            break;
        }
        target -= w;
    }
    // guard against landing on a zero-weight tail through rounding
    if weights[pick] == 0.0 {
        pick = weights.iter().rposition(|&w| w > 0.0)?;
    }
    Some([c0, data.row(rows[pick]).to_vec()])
}

fn lloyd(data: &DataMatrix, rows: &[usize], mut centers: [Vec<f64>; 2]) -> Run {
    let d = data.cols();
    let mut assignment = vec![false; rows.len()];
    let mut trace = Vec::new();
    let mut first = true;
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = first;
        for (a, &r) in assignment.iter_mut().zip(rows) {
            let x = data.row(r);
            let right = sq_dist(x, &centers[1]) < sq_dist(x, &centers[0]);
            if right != *a {
                *a = right;
                changed = true;
            }
        }
        first = false;
        if !changed {
            break;
        }
        let mut sums = [vec![0.0; d], vec![0.0; d]];
        let mut counts = [0usize; 2];
        for (&a, &r) in assignment.iter().zip(rows) {
            let k = a as usize;
            counts[k] += 1;
            for (s, x) in sums[k].iter_mut().zip(data.row(r)) {
                *s += x;
            }
        }
        for k in 0..2 {
            if counts[k] > 0 {
                centers[k] = sums[k].iter().map(|s| s / counts[k] as f64).collect();
            }
        }
        trace.push(inertia(data, rows, &assignment, &centers));
    }
    let inertia = inertia(data, rows, &assignment, &centers);
    Run {
        assignment,
        centers,
        inertia,
        trace,
    }
}

fn inertia(data: &DataMatrix, rows: &[usize], assignment: &[bool], centers: &[Vec<f64>; 2]) -> f64 {
    rows.iter()
        .zip(assignment)
        .map(|(&r, &a)| sq_dist(data.row(r), &centers[a as usize]))
        .sum()
}

/// Lloyd's 2-means on a subset of rows with k-means++ seeding; the best of
/// `restarts` runs by inertia is returned.
pub fn two_means_rows(data: &DataMatrix, rows: &[usize], seed: u64, restarts: usize) -> TwoMeansResult {
    let mut rng = SeededPrng::new(seed);
    let mut best: Option<Run> = None;
    if rows.len() >= 2 {
        for _ in 0..restarts.max(1) {
            let Some(init) = plus_plus_init(data, rows, &mut rng) else {
                break;
            };
            let run = lloyd(data, rows, init);
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
    }
    match best {
        Some(run) => {
            let right = run.assignment.iter().filter(|&&a| a).count();
            TwoMeansResult {
                feasible: right > 0 && right < rows.len(),
                assignment: run.assignment,
                inertia: run.inertia,
                centers: run.centers,
                trace: run.trace,
            }
        }
        None => {
            let c = data.column_means(rows);
            TwoMeansResult {
                assignment: vec![false; rows.len()],
                inertia: 0.0,
                centers: [c.clone(), c],
                feasible: false,
                trace: Vec::new(),
            }
        }
    }
}

pub fn two_means(x: &DataMatrix, seed: u64, restarts: usize) -> TwoMeansResult {
    let rows: Vec<usize> = (0..x.rows()).collect();
    two_means_rows(x, &rows, seed, restarts)
}
