use crate::error::{Error, Result};

/// Dense row-major sample-by-feature matrix with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Data(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            labels: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!("row {i} has {} values, expected {cols}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::Data(format!(
                "label vector has length {}, matrix has {} rows",
                labels.len(),
                self.rows
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    /// Copies the given rows (in the given order), carrying their labels along.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(self.rows, self.cols, self.values.iter().map(|v| v * factor).collect())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Column means over the selected rows, accumulated in row order.
    pub fn column_means(&self, indices: &[usize]) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for &i in indices {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let n = indices.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Total squared deviation of the selected rows from their mean.
    pub fn scatter(&self, indices: &[usize]) -> f64 {
        let mean = self.column_means(indices);
        indices
            .iter()
            .map(|&i| {
                self.row(i)
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| (v - m) * (v - m))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Subtracts the column means. Returns the centered copy and the means.
pub fn center_columns(x: &DataMatrix) -> Result<(DataMatrix, Vec<f64>)> {
    let all: Vec<usize> = (0..x.rows()).collect();
    let mean = x.column_means(&all);
    let mut values = Vec::with_capacity(x.values.len());
    for i in 0..x.rows() {
        values.extend(x.row(i).iter().zip(&mean).map(|(v, m)| v - m));
    }
    let mut centered = DataMatrix::new(x.rows(), x.cols(), values)?;
    centered.labels = x.labels.clone();
    Ok((centered, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_two_by_two() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let (c, mean) = center_columns(&x).unwrap();
        assert_eq!(mean, vec![2.0, 3.0]);
        assert_eq!(c.values(), &[-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn centers_zero_matrix() {
        let x = DataMatrix::new(3, 2, vec![0.0; 6]).unwrap();
        let (c, mean) = center_columns(&x).unwrap();
        assert_eq!(mean, vec![0.0, 0.0]);
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::new(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        assert!(DataMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DataMatrix::new(0, 2, vec![]).is_err());
        assert!(DataMatrix::new(2, 2, vec![1.0; 3]).is_err());
        let x = DataMatrix::new(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(x.with_labels(vec![0]).is_err());
    }

    #[test]
    fn scatter_matches_definition() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]).unwrap();
        // mean (1, 1): deviations (1+1) + (1+1) + (0+4)
        assert!((x.scatter(&[0, 1, 2]) - 8.0).abs() < 1e-12);
    }
}
