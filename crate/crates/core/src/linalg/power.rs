use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, SymmetricEigen};

use super::{apply_sign_convention, dot, norm, DataMatrix};
use crate::error::{Error, Result};

/// Work below this many matrix cells stays on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;
/// Row-chunk size for transposed products. Fixed so that the reduction
/// order (and therefore every bit of the result) is independent of threading.
const CHUNK_ROWS: usize = 128;

/// A unit-norm direction in feature space with its singular value / eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub vector: Vec<f64>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    /// Convergence threshold on the Euclidean change between successive
    /// sign-aligned unit estimates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
        }
    }
}

impl PowerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(format!(
                "power iteration needs tol > 0 and max_iter >= 1, got tol={} max_iter={}",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Matrix-free access to a rectangular operator `A`.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A v`
    fn apply(&self, v: &[f64], out: &mut [f64]);
    /// `out = Aᵀ u`
    fn apply_transpose(&self, u: &[f64], out: &mut [f64]);
    /// Squared Euclidean norm of every column.
    fn column_norms_sq(&self) -> Vec<f64>;
}

impl LinearOperator for DataMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        if self.rows() * self.cols() >= PAR_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = dot(self.row(i), v));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = dot(self.row(i), v);
            }
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        let rows: Vec<usize> = (0..self.rows()).collect();
        transpose_product(self, &rows, u, out);
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.cols()];
        for i in 0..self.rows() {
            for (a, x) in acc.iter_mut().zip(self.row(i)) {
                *a += x * x;
            }
        }
        acc
    }
}

/// A row subset of a matrix, implicitly centered on its own column means.
/// Avoids materializing the centered copy of large nodes.
pub struct CenteredRows<'a> {
    data: &'a DataMatrix,
    rows: Cow<'a, [usize]>,
    mean: Vec<f64>,
}

impl<'a> CenteredRows<'a> {
    pub fn new(data: &'a DataMatrix, rows: impl Into<Cow<'a, [usize]>>) -> Self {
        let rows = rows.into();
        let mean = data.column_means(&rows);
        Self { data, rows, mean }
    }

    pub fn all(data: &'a DataMatrix) -> Self {
        Self::new(data, (0..data.rows()).collect::<Vec<_>>())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn indices(&self) -> &[usize] {
        &self.rows
    }

    /// `(x - mean) · v` for one dataset row, summed in feature order.
    pub fn centered_dot(&self, row: usize, v: &[f64]) -> f64 {
        self.data
            .row(row)
            .iter()
            .zip(&self.mean)
            .zip(v)
            .map(|((x, m), w)| (x - m) * w)
            .sum()
    }
}

impl LinearOperator for CenteredRows<'_> {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.data.cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let shift = dot(&self.mean, v);
        if self.rows.len() * self.data.cols() >= PAR_THRESHOLD {
            out.par_iter_mut()
                .zip(self.rows.par_iter())
                .for_each(|(o, &r)| *o = dot(self.data.row(r), v) - shift);
        } else {
            for (o, &r) in out.iter_mut().zip(self.rows.iter()) {
                *o = dot(self.data.row(r), v) - shift;
            }
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        transpose_product(self.data, &self.rows, u, out);
        let total: f64 = u.iter().sum();
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o -= m * total;
        }
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.data.cols()];
        for &r in self.rows.iter() {
            for ((a, x), m) in acc.iter_mut().zip(self.data.row(r)).zip(&self.mean) {
                let c = x - m;
                *a += c * c;
            }
        }
        acc
    }
}

/// `out = Σ_k u[k] · data.row(rows[k])` with a deterministic reduction order.
fn transpose_product(data: &DataMatrix, rows: &[usize], u: &[f64], out: &mut [f64]) {
    let d = data.cols();
    let accumulate = |rows: &[usize], u: &[f64]| {
        let mut acc = vec![0.0; d];
        for (&r, &w) in rows.iter().zip(u) {
            if w != 0.0 {
                for (a, x) in acc.iter_mut().zip(data.row(r)) {
                    *a += w * x;
                }
            }
        }
        acc
    };
    if rows.len() * d >= PAR_THRESHOLD {
        let partials: Vec<Vec<f64>> = rows
            .par_chunks(CHUNK_ROWS)
            .zip(u.par_chunks(CHUNK_ROWS))
            .map(|(r, w)| accumulate(r, w))
            .collect();
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in partials {
            for (o, x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
    } else {
        out.copy_from_slice(&accumulate(rows, u));
    }
}

fn orthogonalize(v: &mut [f64], against: &[&[f64]]) {
    for a in against {
        let c = dot(v, a);
        for (x, y) in v.iter_mut().zip(a.iter()) {
            *x -= c * y;
        }
    }
}

/// Krylov dimension before the Lanczos basis is restarted from the current
/// Ritz vector.
const KRYLOV_DIM: usize = 24;

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `a`
/// and off-diagonal `b`, with its unit eigenvector.
fn tridiagonal_top(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let m = a.len();
    let t = DMatrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => a[i],
        1 => b[i.min(j)],
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imax();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}

/// Restarted Lanczos on `P AᵀA P`, `P` the projector onto the complement of
/// `deflate`, starting from the unit vector `v`. On return `v` holds the
/// dominant Ritz vector. Every operator application counts one iteration
/// against `opts.max_iter`. Returns whether successive Ritz vectors came
/// within `opts.tol` of each other or the Krylov space became invariant.
fn lanczos<A: LinearOperator + ?Sized>(
    op: &A,
    deflate: &[&[f64]],
    v: &mut Vec<f64>,
    opts: PowerOptions,
    iterations: &mut usize,
) -> bool {
    let (n, d) = (op.nrows(), op.ncols());
    let room = d.saturating_sub(deflate.len()).max(1);
    let mut image = vec![0.0; n];
    loop {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            if *iterations >= opts.max_iter {
                return false;
            }
            *iterations += 1;
            let q = basis.last().expect("non-empty basis");
            let mut w = vec![0.0; d];
            op.apply(q, &mut image);
            op.apply_transpose(&image, &mut w);
            orthogonalize(&mut w, deflate);
            alpha.push(dot(q, &w));
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    for (x, y) in w.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
                orthogonalize(&mut w, deflate);
            }
            let residual = norm(&w);

            let (theta, s) = tridiagonal_top(&alpha, &beta);
            let mut ritz = vec![0.0; d];
            for (b, c) in basis.iter().zip(&s) {
                for (x, y) in ritz.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
            let nr = norm(&ritz);
            let sign = if dot(&ritz, v) < 0.0 { -1.0 } else { 1.0 };
            let mut change = 0.0;
            for (x, y) in ritz.iter_mut().zip(v.iter()) {
                *x *= sign / nr;
                change += (*x - y) * (*x - y);
            }
            let fresh = basis.len() > 1;
            *v = ritz;
            let invariant = residual <= 1e-13 * theta.abs().max(f64::MIN_POSITIVE) || basis.len() >= room;
            if invariant || (fresh && change.sqrt() < opts.tol) {
                return true;
            }
            if basis.len() == KRYLOV_DIM {
                break;
            }
            w.iter_mut().for_each(|x| *x /= residual);
            beta.push(residual);
            basis.push(w);
        }
    }
}

/// Dominant right singular direction of `op` restricted to the orthogonal
/// complement of `deflate` (each entry unit-norm, mutually orthogonal),
/// found by Krylov-accelerated power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector. When that start is annihilated
/// by the operator, coordinate 0 is perturbed by 1e-3, and failing that the
/// coordinate axes are tried in decreasing column-norm order.
pub fn dominant_direction<A: LinearOperator + ?Sized>(
    op: &A,
    deflate: &[&[f64]],
    opts: PowerOptions,
) -> Result<Direction> {
    opts.validate()?;
    let d = op.ncols();
    let n = op.nrows();
    let col_norms = op.column_norms_sq();
    let fro_sq: f64 = col_norms.iter().sum();
    if fro_sq == 0.0 {
        return Err(Error::ZeroVariance("matrix is identically zero".into()));
    }
    // Singular values below this are numerical residue of the deflated part.
    let floor = 1e-10 * fro_sq.sqrt();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![1.0; d]);
    let mut perturbed = vec![1.0; d];
    perturbed[0] += 1e-3;
    starts.push(perturbed);
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&a, &b| col_norms[b].total_cmp(&col_norms[a]).then(a.cmp(&b)));
    for j in axes.into_iter().take_while(|&j| col_norms[j] > 0.0) {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        starts.push(e);
    }

    let mut image = vec![0.0; n];
    let mut iterations = 0;
    for start in starts {
        let mut v = start;
        orthogonalize(&mut v, deflate);
        let nv = norm(&v);
        if nv < 1e-12 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        op.apply(&v, &mut image);
        if norm(&image) <= floor {
            continue;
        }
        let converged = lanczos(op, deflate, &mut v, opts, &mut iterations);
        op.apply(&v, &mut image);
        let magnitude = norm(&image);
        if magnitude <= floor {
            continue;
        }
        apply_sign_convention(&mut v);
        let direction = Direction { vector: v, magnitude };
        if !converged {
            return Err(Error::Convergence {
                iterations,
                last: Box::new(direction),
            });
        }
        return Ok(direction);
    }
    Err(Error::ZeroVariance(
        "no variance left outside the deflated directions".into(),
    ))
}

/// Leading right singular direction of a column-centered matrix.
pub fn leading_singular_direction(xc: &DataMatrix, tol: f64, max_iter: usize) -> Result<Direction> {
    dominant_direction(xc, &[], PowerOptions { tol, max_iter })
}

/// Dominant direction of `xc` after removing `first`; orthogonal to `first`.
pub fn secondary_direction(
    xc: &DataMatrix,
    first: &Direction,
    tol: f64,
    max_iter: usize,
) -> Result<Direction> {
    if first.vector.len() != xc.cols() {
        return Err(Error::Shape(format!(
            "direction has {} entries, matrix has {} columns",
            first.vector.len(),
            xc.cols()
        )));
    }
    dominant_direction(xc, &[&first.vector], PowerOptions { tol, max_iter })
}
