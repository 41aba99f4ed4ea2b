//! Dense kernels shared by the projections: column centering, dominant
//! singular directions by power iteration, and kernel Gram matrices.

mod kernel;
mod matrix;
mod power;

pub use kernel::{center_gram, gram_matrix, kernel_value, symmetric_top_eigenpairs, KernelSpec, SquareMatrix};
pub(crate) use kernel::gram_rows;
pub use matrix::{center_columns, DataMatrix};
pub use power::{
    dominant_direction, leading_singular_direction, secondary_direction, CenteredRows, Direction,
    LinearOperator, PowerOptions,
};

/// Dot product with a fixed left-to-right summation order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flips `v` so that its entry of largest magnitude is nonnegative.
/// Ties on magnitude resolve to the lowest index.
pub fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).copied().unwrap_or(0.0) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
