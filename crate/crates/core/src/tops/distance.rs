use crate::error::{Error, Result};
use crate::series_prep::ReturnSeries;

/// Pairwise absolute differences `|x[t1] - y[t2]|`, stored row-major by `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_slices(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let n = x.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "distance matrix needs N >= 2, got {n}"
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for a in x {
            values.extend(y.iter().map(|b| (a - b).abs()));
        }
        Ok(Self { n, values })
    }

    /// Builds a matrix from explicit non-negative entries (row-major, `n * n`).
    pub fn from_raw(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || values.len() != n * n {
            return Err(Error::InvalidConfig(format!(
                "raw distance matrix must be n*n with n >= 2 (n = {n}, len = {})",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "distance entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, t1: usize, t2: usize) -> f64 {
        self.values[t1 * self.n + t2]
    }

    pub fn row(&self, t1: usize) -> &[f64] {
        &self.values[t1 * self.n..(t1 + 1) * self.n]
    }

    pub fn transposed(&self) -> Self {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for t1 in 0..n {
            for t2 in 0..n {
                values[t2 * n + t1] = self.values[t1 * n + t2];
            }
        }
        Self { n, values }
    }

    /// Both time axes reversed: entry `(t1, t2)` becomes `(n-1-t1, n-1-t2)`.
    pub fn time_reversed(&self) -> Self {
        let n = self.n;
        let mut values = self.values.clone();
        values.reverse();
        Self { n, values }
    }
}

/// Distance matrix of two return series. Both are expected to be standardized.
pub fn distance_matrix(x: &ReturnSeries, y: &ReturnSeries) -> Result<DistanceMatrix> {
    if !x.standardized || !y.standardized {
        log::warn!("distance matrix built from non-standardized returns");
    }
    DistanceMatrix::from_slices(&x.values, &y.values)
}

/// For each `t1`, the smallest `t2` attaining the row minimum.
pub fn local_minimal_mapping(d: &DistanceMatrix) -> Vec<usize> {
    (0..d.n())
        .map(|t1| {
            let row = d.row(t1);
            let mut best = 0;
            for (t2, v) in row.iter().enumerate() {
                if *v < row[best] {
                    best = t2;
                }
            }
            best
        })
        .collect()
}
