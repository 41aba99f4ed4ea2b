use super::{require_samples, AxisModel, ProjectionConfig, ProjectionResult, Projector};
use crate::error::{Error, Result};
use crate::linalg::{dominant_direction, CenteredRows, DataMatrix, Direction, PowerOptions};

#[derive(Debug, Clone)]
pub struct PcaProjector {
    pub components: usize,
    pub power: PowerOptions,
}

impl PcaProjector {
    pub fn from_config(c: &ProjectionConfig) -> Self {
        Self {
            components: c.component_count(),
            power: c.power,
        }
    }
}

/// Converged direction, or the last iterate when the iteration budget ran out.
pub(crate) fn direction_or_last(r: Result<Direction>) -> Result<Direction> {
    match r {
        Err(Error::Convergence { last, .. }) => Ok(*last),
        other => other,
    }
}

/// Principal directions of the centered rows: the leading one, plus the
/// secondary one when `components == 2` (zero vector on rank-1 nodes).
pub(crate) fn principal_directions(
    view: &CenteredRows<'_>,
    components: usize,
    power: PowerOptions,
) -> Result<Vec<Option<Direction>>> {
    let first = direction_or_last(dominant_direction(view, &[], power))?;
    let mut out = vec![Some(first)];
    if components > 1 {
        let v1 = out[0].as_ref().map(|d| d.vector.clone()).unwrap_or_default();
        match direction_or_last(dominant_direction(view, &[&v1], power)) {
            Ok(d) => out.push(Some(d)),
            Err(Error::ZeroVariance(_)) => out.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

impl Projector for PcaProjector {
    fn name(&self) -> &'static str {
        "pca"
    }

    fn project(&self, data: &DataMatrix, rows: &[usize], _seed: u64) -> Result<ProjectionResult> {
        require_samples(rows)?;
        let view = CenteredRows::new(data, rows);
        let dirs = principal_directions(&view, self.components, self.power)?;
        let mean = view.mean().to_vec();
        let mut components = Vec::with_capacity(dirs.len());
        let mut model = None;
        for d in dirs {
            let m = AxisModel::Linear {
                mean: mean.clone(),
                direction: d.map(|d| d.vector).unwrap_or_else(|| vec![0.0; data.cols()]),
            };
            components.push(m.scores(data, rows));
            model.get_or_insert(m);
        }
        Ok(ProjectionResult {
            method: "pca".into(),
            components,
            model: model.expect("at least one component"),
        })
    }
}

/// Principal component scores of every row of `x`.
pub fn project_pca(x: &DataMatrix, components: usize) -> Result<ProjectionResult> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    PcaProjector {
        components,
        power: PowerOptions::default(),
    }
    .project(x, &rows, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_scores() {
        let x = DataMatrix::from_rows(&[[1.0], [3.0], [5.0]]).unwrap();
        let p = project_pca(&x, 1).unwrap();
        assert_eq!(p.axis_scores(), &[-2.0, 0.0, 2.0]);
    }

    #[test]
    fn repeated_row_is_zero_variance() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0]; 5]).unwrap();
        assert!(matches!(project_pca(&x, 1), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn single_sample_is_unsplittable() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(project_pca(&x, 1), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn rank_one_second_component_is_zero() {
        let x = DataMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [-3.0, -3.0]]).unwrap();
        let p = project_pca(&x, 2).unwrap();
        assert_eq!(p.components.len(), 2);
        assert!(p.components[1].iter().all(|&v| v == 0.0));
    }
}
