//! Observation series and factor-score containers.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordered sequence of `T` real `p1 x p2` observation matrices.
///
/// Construction validates the invariants: at least one member, identical
/// shapes, positive dimensions, and all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries<F> {
    data: Vec<Array2<F>>,
}

impl<F: Scalar> MatrixSeries<F> {
    pub fn new(data: Vec<Array2<F>>) -> Result<Self> {
        validate_series(&data)?;
        Ok(Self { data })
    }

    /// Number of time points `T`.
    pub fn t_len(&self) -> usize {
        self.data.len()
    }

    /// Row dimension `p1`.
    pub fn n_rows(&self) -> usize {
        self.data[0].nrows()
    }

    /// Column dimension `p2`.
    pub fn n_cols(&self) -> usize {
        self.data[0].ncols()
    }

    pub fn get(&self, t: usize) -> &Array2<F> {
        &self.data[t]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Array2<F>> {
        self.data.iter()
    }

    pub fn as_slice(&self) -> &[Array2<F>] {
        &self.data
    }

    /// Sub-series over the half-open time range `[start, end)`.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.t_len() {
            return Err(Error::Dim(format!(
                "window [{start}, {end}) out of range for T={}",
                self.t_len()
            )));
        }
        Ok(Self {
            data: self.data[start..end].to_vec(),
        })
    }
}

/// Checks the [`MatrixSeries`] invariants on raw data: non-empty, uniform
/// shape, positive dimensions, finite entries. Reports the first offending
/// position for non-finite values.
pub fn validate_series<F: Scalar>(data: &[Array2<F>]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Dim("series must contain at least one matrix".into()));
    }
    let shape = (data[0].nrows(), data[0].ncols());
    if shape.0 == 0 || shape.1 == 0 {
        return Err(Error::Dim("matrix dimensions must be positive".into()));
    }
    for (t, m) in data.iter().enumerate() {
        let found = (m.nrows(), m.ncols());
        if found != shape {
            return Err(Error::ShapeMismatch {
                index: t,
                expected: shape,
                found,
            });
        }
        for i in 0..found.0 {
            for j in 0..found.1 {
                if !m[[i, j]].is_finite() {
                    return Err(Error::NonFinite { t, row: i, col: j });
                }
            }
        }
    }
    Ok(())
}

/// `T`-length sequence of `k1 x k2` factor-score matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScores<F> {
    scores: Vec<Array2<F>>,
}

impl<F: Scalar> FactorScores<F> {
    pub fn new(scores: Vec<Array2<F>>) -> Result<Self> {
        validate_series(&scores)?;
        Ok(Self { scores })
    }

    pub fn t_len(&self) -> usize {
        self.scores.len()
    }

    pub fn k1(&self) -> usize {
        self.scores[0].nrows()
    }

    pub fn k2(&self) -> usize {
        self.scores[0].ncols()
    }

    pub fn get(&self, t: usize) -> &Array2<F> {
        &self.scores[t]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Array2<F>> {
        self.scores.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn accepts_well_formed_series() {
        let data = vec![
            array![[1.0, 2.0], [3.0, 4.0]],
            array![[0.0, 0.0], [0.0, 0.0]],
            array![[-1.0, 5.0], [2.0, -3.0]],
        ];
        assert!(MatrixSeries::new(data).is_ok());
    }

    #[test]
    fn rejects_shape_mismatch() {
        let data = vec![
            array![[1.0, 2.0], [3.0, 4.0]],
            array![[1.0, 2.0, 0.0], [3.0, 4.0, 0.0]],
        ];
        assert_eq!(
            MatrixSeries::new(data).unwrap_err(),
            Error::ShapeMismatch {
                index: 1,
                expected: (2, 2),
                found: (2, 3),
            }
        );
    }

    #[test]
    fn reports_first_non_finite_position() {
        let data = vec![
            array![[1.0, 2.0], [f64::NAN, 4.0]],
            array![[1.0, 2.0], [3.0, 4.0]],
        ];
        assert_eq!(
            MatrixSeries::new(data).unwrap_err(),
            Error::NonFinite { t: 0, row: 1, col: 0 }
        );
    }

    #[test]
    fn rejects_empty_series() {
        assert!(MatrixSeries::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn window_bounds_are_checked() {
        let data = vec![array![[1.0]], array![[2.0]], array![[3.0]]];
        let s = MatrixSeries::new(data).unwrap();
        assert!(s.window(0, 2).is_ok());
        assert!(s.window(2, 2).is_err());
        assert!(s.window(1, 4).is_err());
    }
}
