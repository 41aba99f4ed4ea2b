use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::power::{dominant_direction, LinearOperator, PowerOptions};
use super::{dot, DataMatrix};
use crate::error::{Error, Result};

/// Positive-definite (or at least symmetric) kernel functions.
///
/// An absent `gamma` resolves to `1 / n_features` at evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Polynomial {
        #[serde(default = "default_degree")]
        degree: u32,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_coef0")]
        coef0: f64,
    },
    Sigmoid {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_coef0")]
        coef0: f64,
    },
}

fn default_degree() -> u32 {
    3
}

fn default_coef0() -> f64 {
    1.0
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { gamma: None }
    }
}

impl KernelSpec {
    pub fn polynomial() -> Self {
        KernelSpec::Polynomial {
            degree: default_degree(),
            gamma: None,
            coef0: default_coef0(),
        }
    }

    pub fn sigmoid() -> Self {
        KernelSpec::Sigmoid {
            gamma: None,
            coef0: default_coef0(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gamma = match self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma } | KernelSpec::Sigmoid { gamma, .. } => *gamma,
            KernelSpec::Polynomial { degree, gamma, .. } => {
                if *degree < 1 {
                    return Err(Error::Config("polynomial kernel needs degree >= 1".into()));
                }
                *gamma
            }
        };
        if let Some(g) = gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Config(format!("kernel gamma must be positive, got {g}")));
            }
        }
        if let KernelSpec::Polynomial { coef0, .. } | KernelSpec::Sigmoid { coef0, .. } = self {
            if !coef0.is_finite() {
                return Err(Error::Config("kernel coef0 must be finite".into()));
            }
        }
        Ok(())
    }

    fn gamma_for(gamma: Option<f64>, dims: usize) -> f64 {
        gamma.unwrap_or(1.0 / dims as f64)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = |g: &Option<f64>| g.map(|g| format!("gamma={g}")).unwrap_or_else(|| "gamma=auto".into());
        match self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf:{}", g(gamma)),
            KernelSpec::Polynomial { degree, gamma, coef0 } => {
                write!(f, "polynomial:degree={degree},{},coef0={coef0}", g(gamma))
            }
            KernelSpec::Sigmoid { gamma, coef0 } => write!(f, "sigmoid:{},coef0={coef0}", g(gamma)),
        }
    }
}

/// Parses `name[:key=value,...]`, e.g. `rbf:gamma=0.5` or `poly:degree=2`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = match name.trim().to_ascii_lowercase().as_str() {
            "linear" => KernelSpec::Linear,
            "rbf" | "gaussian" => KernelSpec::Rbf { gamma: None },
            "poly" | "polynomial" => KernelSpec::polynomial(),
            "sigmoid" | "tanh" => KernelSpec::sigmoid(),
            other => return Err(Error::Config(format!("unknown kernel '{other}'"))),
        };
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("kernel parameter '{kv}' is not key=value")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("kernel parameter {key}: '{v}' is not a number")))
            };
            match (&mut spec, key.trim()) {
                (KernelSpec::Rbf { gamma }, "gamma")
                | (KernelSpec::Polynomial { gamma, .. }, "gamma")
                | (KernelSpec::Sigmoid { gamma, .. }, "gamma") => {
                    if value.trim() != "auto" {
                        *gamma = Some(parse(value)?);
                    }
                }
                (KernelSpec::Polynomial { coef0, .. }, "coef0") | (KernelSpec::Sigmoid { coef0, .. }, "coef0") => {
                    *coef0 = parse(value)?
                }
                (KernelSpec::Polynomial { degree, .. }, "degree") => {
                    *degree = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("kernel degree '{value}' is not an integer")))?
                }
                (_, key) => return Err(Error::Config(format!("kernel '{name}' has no parameter '{key}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `k(a, b)` for one pair of rows.
pub fn kernel_value(kernel: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    let dims = a.len();
    match kernel {
        KernelSpec::Linear => dot(a, b),
        KernelSpec::Rbf { gamma } => {
            let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-KernelSpec::gamma_for(*gamma, dims) * sq).exp()
        }
        KernelSpec::Polynomial { degree, gamma, coef0 } => {
            (KernelSpec::gamma_for(*gamma, dims) * dot(a, b) + coef0).powi(*degree as i32)
        }
        KernelSpec::Sigmoid { gamma, coef0 } => (KernelSpec::gamma_for(*gamma, dims) * dot(a, b) + coef0).tanh(),
    }
}

/// Dense symmetric n×n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Shape(format!("{n}x{n} matrix needs {} values, got {}", n * n, values.len())));
        }
        Ok(Self { n, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for r in rows {
            if r.as_ref().len() != n {
                return Err(Error::Shape("matrix is not square".into()));
            }
            values.extend_from_slice(r.as_ref());
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn row_means(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum::<f64>() / self.n as f64).collect()
    }

    fn col_means(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        for i in 0..self.n {
            for (a, v) in c.iter_mut().zip(self.row(i)) {
                *a += v;
            }
        }
        c.iter_mut().for_each(|a| *a /= self.n as f64);
        c
    }
}

impl LinearOperator for SquareMatrix {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        if self.n * self.n >= 1 << 15 {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = dot(self.row(i), v));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = dot(self.row(i), v);
            }
        }
    }

    // Only ever used on symmetric matrices.
    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        self.apply(u, out)
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for i in 0..self.n {
            for (a, v) in acc.iter_mut().zip(self.row(i)) {
                *a += v * v;
            }
        }
        acc
    }
}

/// Gram matrix over a subset of dataset rows. Only the upper triangle is
/// evaluated; the lower one is mirrored, so the result is exactly symmetric.
pub(crate) fn gram_rows(data: &DataMatrix, rows: &[usize], kernel: &KernelSpec) -> Result<SquareMatrix> {
    kernel.validate()?;
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = data.row(rows[i]);
            (i..n).map(|j| kernel_value(kernel, a, data.row(rows[j]))).collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, tail) in upper.into_iter().enumerate() {
        for (off, v) in tail.into_iter().enumerate() {
            let j = i + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    SquareMatrix::new(n, values)
}

pub fn gram_matrix(x: &DataMatrix, kernel: &KernelSpec) -> Result<SquareMatrix> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    gram_rows(x, &rows, kernel)
}

/// Double centering `K - 1K/n - K1/n + 1K1/n²`.
pub fn center_gram(k: &SquareMatrix) -> SquareMatrix {
    let n = k.n;
    let rows = k.row_means();
    let cols = k.col_means();
    let grand = rows.iter().sum::<f64>() / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(k.get(i, j) - cols[j] - rows[i] + grand);
        }
    }
    SquareMatrix { n, values }
}

/// Leading eigenpairs (largest eigenvalue first) of a symmetric matrix by
/// power iteration with deflation. Stops early at the first non-positive
/// eigenvalue or when nothing is left to deflate.
pub fn symmetric_top_eigenpairs(k: &SquareMatrix, count: usize, opts: PowerOptions) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut scratch = vec![0.0; k.n];
    while found.len() < count {
        let deflate: Vec<&[f64]> = found.iter().map(|(_, v)| v.as_slice()).collect();
        let direction = match dominant_direction(k, &deflate, opts) {
            Ok(d) => d,
            Err(Error::Convergence { last, .. }) => *last,
            Err(Error::ZeroVariance(_)) if !found.is_empty() => break,
            Err(e) => return Err(e),
        };
        k.apply(&direction.vector, &mut scratch);
        let eigenvalue = dot(&direction.vector, &scratch);
        if eigenvalue <= 1e-12 * k.max_abs() * k.n as f64 {
            if found.is_empty() {
                return Err(Error::ZeroVariance("centered Gram matrix has no positive eigenvalue".into()));
            }
            break;
        }
        found.push((eigenvalue, direction.vector));
    }
    Ok(found)
}
