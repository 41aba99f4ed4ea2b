use super::{require_samples, AxisModel, KernelAxis, ProjectionConfig, ProjectionResult, Projector};
use crate::error::{Error, Result};
use crate::linalg::{center_gram, symmetric_top_eigenpairs, DataMatrix, KernelSpec, PowerOptions};

#[derive(Debug, Clone)]
pub struct KpcaProjector {
    pub kernel: KernelSpec,
    pub components: usize,
    pub max_samples: usize,
    pub power: PowerOptions,
}

impl KpcaProjector {
    pub fn from_config(c: &ProjectionConfig) -> Self {
        Self {
            kernel: c.kernel.clone().unwrap_or_default(),
            components: c.component_count(),
            max_samples: c.max_kernel_samples,
            power: c.power,
        }
    }
}

impl Projector for KpcaProjector {
    fn name(&self) -> &'static str {
        "kpca"
    }

    fn project(&self, data: &DataMatrix, rows: &[usize], _seed: u64) -> Result<ProjectionResult> {
        require_samples(rows)?;
        if rows.len() > self.max_samples {
            return Err(Error::Config(format!(
                "kernel projection refuses a node of {} samples (limit {}); raise max_kernel_samples to allow it",
                rows.len(),
                self.max_samples
            )));
        }
        let k = crate::linalg::gram_rows(data, rows, &self.kernel)?;
        let kc = center_gram(&k);
        if kc.max_abs() <= 1e-12 * k.max_abs() {
            return Err(Error::ZeroVariance("centered Gram matrix is numerically zero".into()));
        }
        let pairs = symmetric_top_eigenpairs(&kc, self.components, self.power)?;

        let n = rows.len();
        let mut gram_means = vec![0.0; n];
        for i in 0..n {
            for (a, v) in gram_means.iter_mut().zip(k.row(i)) {
                *a += v;
            }
        }
        gram_means.iter_mut().for_each(|a| *a /= n as f64);
        let gram_grand_mean = gram_means.iter().sum::<f64>() / n as f64;
        let mut support = Vec::with_capacity(n * data.cols());
        for &r in rows {
            support.extend_from_slice(data.row(r));
        }

        let mut components = Vec::with_capacity(self.components);
        let mut model = None;
        for (lambda, u) in pairs {
            let scale = lambda.sqrt();
            let axis = AxisModel::Kernel(KernelAxis {
                kernel: self.kernel.clone(),
                dims: data.cols(),
                support: support.clone(),
                coefficients: u.iter().map(|v| v / scale).collect(),
                gram_means: gram_means.clone(),
                gram_grand_mean,
            });
            components.push(axis.scores(data, rows));
            model.get_or_insert(axis);
        }
        while components.len() < self.components {
            components.push(vec![0.0; n]);
        }
        Ok(ProjectionResult {
            method: "kpca".into(),
            components,
            model: model.expect("at least one eigenpair"),
        })
    }
}

/// Kernel principal component scores of every row of `x`.
pub fn project_kpca(x: &DataMatrix, kernel: &KernelSpec, components: usize) -> Result<ProjectionResult> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    KpcaProjector {
        kernel: kernel.clone(),
        components,
        max_samples: super::DEFAULT_MAX_KERNEL_SAMPLES,
        power: PowerOptions::default(),
    }
    .project(x, &rows, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_samples_share_scores() {
        let x = DataMatrix::from_rows(&[[0.0, 1.0], [2.0, 0.5], [0.0, 1.0], [-1.0, 3.0], [4.0, 4.0]]).unwrap();
        let p = project_kpca(&x, &KernelSpec::Rbf { gamma: Some(0.3) }, 2).unwrap();
        for c in &p.components {
            assert!((c[0] - c[2]).abs() < 1e-10);
        }
    }

    #[test]
    fn memory_guard() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let proj = KpcaProjector {
            kernel: KernelSpec::Linear,
            components: 1,
            max_samples: 2,
            power: PowerOptions::default(),
        };
        assert!(matches!(proj.project(&x, &[0, 1, 2], 0), Err(Error::Config(_))));
    }

    #[test]
    fn identical_rows_unsplittable() {
        let x = DataMatrix::from_rows(&[[1.0, 1.0]; 4]).unwrap();
        assert!(matches!(
            project_kpca(&x, &KernelSpec::default(), 1),
            Err(Error::ZeroVariance(_))
        ));
    }
}
