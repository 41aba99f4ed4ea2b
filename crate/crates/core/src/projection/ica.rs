use super::pca::principal_directions;
use super::{require_samples, AxisModel, ProjectionConfig, ProjectionResult, Projector};
use crate::error::{Error, Result};
use crate::eval::SeededPrng;
use crate::linalg::{apply_sign_convention, dot, norm, CenteredRows, DataMatrix, PowerOptions};

/// FastICA by deflation with the log-cosh contrast (`g = tanh`).
#[derive(Debug, Clone)]
pub struct IcaProjector {
    pub components: usize,
    pub power: PowerOptions,
    pub max_iter: usize,
    pub tol: f64,
}

impl IcaProjector {
    pub fn from_config(c: &ProjectionConfig) -> Self {
        Self {
            components: c.component_count(),
            power: c.power,
            max_iter: 200,
            tol: 1e-4,
        }
    }
}

fn orthonormalize_against(w: &mut [f64], previous: &[Vec<f64>]) {
    for p in previous {
        let c = dot(w, p);
        for (x, y) in w.iter_mut().zip(p) {
            *x -= c * y;
        }
    }
    let n = norm(w);
    if n > 0.0 {
        w.iter_mut().for_each(|x| *x /= n);
    }
}

impl Projector for IcaProjector {
    fn name(&self) -> &'static str {
        "ica"
    }

    fn project(&self, data: &DataMatrix, rows: &[usize], seed: u64) -> Result<ProjectionResult> {
        require_samples(rows)?;
        let c = self.components;
        if data.cols() < c {
            return Err(Error::Rank {
                rank: data.cols(),
                requested: c,
            });
        }
        let n = rows.len();
        let view = CenteredRows::new(data, rows);

        // PCA whitening: z_k = (x - mean) · v_k / sqrt(λ_k), λ_k = σ_k² / n
        let dirs = principal_directions(&view, c, self.power)?;
        let mut whitening: Vec<Vec<f64>> = Vec::with_capacity(c);
        for d in &dirs {
            let d = d.as_ref().ok_or(Error::Rank {
                rank: whitening.len(),
                requested: c,
            })?;
            let std = d.magnitude / (n as f64).sqrt();
            if std <= 0.0 {
                return Err(Error::Rank {
                    rank: whitening.len(),
                    requested: c,
                });
            }
            whitening.push(d.vector.iter().map(|v| v / std).collect());
        }
        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| whitening.iter().map(|w| view.centered_dot(r, w)).collect())
            .collect();

        let mut rng = SeededPrng::new(seed);
        let mut unmixing: Vec<Vec<f64>> = Vec::with_capacity(c);
        for _ in 0..c {
            let mut w: Vec<f64> = (0..c).map(|_| rng.normal()).collect();
            orthonormalize_against(&mut w, &unmixing);
            if norm(&w) == 0.0 {
                w = vec![0.0; c];
                w[unmixing.len()] = 1.0;
                orthonormalize_against(&mut w, &unmixing);
            }
            for _ in 0..self.max_iter {
                let mut next = vec![0.0; c];
                let mut mean_deriv = 0.0;
                for zi in &z {
                    let g = dot(&w, zi).tanh();
                    mean_deriv += 1.0 - g * g;
                    for (a, v) in next.iter_mut().zip(zi) {
                        *a += g * v;
                    }
                }
                mean_deriv /= n as f64;
                for (a, wv) in next.iter_mut().zip(&w) {
                    *a = *a / n as f64 - mean_deriv * wv;
                }
                orthonormalize_against(&mut next, &unmixing);
                if norm(&next) == 0.0 {
                    break;
                }
                let change = 1.0 - dot(&next, &w).abs();
                w = next;
                if change < self.tol {
                    break;
                }
            }
            unmixing.push(w);
        }

        // Fold whitening and unmixing into one feature-space direction per component.
        let mean = view.mean().to_vec();
        let mut components = Vec::with_capacity(c);
        let mut model = None;
        for w in &unmixing {
            let mut direction = vec![0.0; data.cols()];
            for (wk, white) in w.iter().zip(&whitening) {
                for (a, v) in direction.iter_mut().zip(white) {
                    *a += wk * v;
                }
            }
            apply_sign_convention(&mut direction);
            let m = AxisModel::Linear {
                mean: mean.clone(),
                direction,
            };
            components.push(m.scores(data, rows));
            model.get_or_insert(m);
        }
        Ok(ProjectionResult {
            method: "ica".into(),
            components,
            model: model.expect("at least one component"),
        })
    }
}

/// Independent component scores of every row of `x`.
pub fn project_ica(x: &DataMatrix, components: usize, seed: u64) -> Result<ProjectionResult> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    IcaProjector {
        components,
        power: PowerOptions::default(),
        max_iter: 200,
        tol: 1e-4,
    }
    .project(x, &rows, seed)
}
