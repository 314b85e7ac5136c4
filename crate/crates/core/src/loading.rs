//! Loading matrices under the scaled-orthonormality identifiability
//! constraint `(1/p) * L' L = I_k`.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::numerics::{fix_column_signs, orthonormal_basis, EigenPairs};
use crate::scalar::Scalar;

/// Max-abs deviation of `(1/p) L'L` from the identity accepted at
/// construction. Loose enough for accumulated floating-point error on
/// `p` up to ~500, tight enough to catch genuine violations.
pub const IDENTIFIABILITY_TOL: f64 = 1e-8;

/// A `p x k` loading matrix satisfying `(1/p) L'L = I_k` within 1e-8 in
/// max-abs norm, with each column's largest-magnitude entry positive.
///
/// Eigen-based constructors order columns by descending eigenvalue of the
/// generating covariance matrix; [`normalize_loading`] keeps the input
/// column order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingMatrix<F> {
    values: Array2<F>,
}

impl<F: Scalar> LoadingMatrix<F> {
    /// Validates the identifiability constraint and canonicalizes column
    /// signs.
    pub fn new(values: Array2<F>) -> Result<Self> {
        let (p, k) = values.dim();
        if p == 0 || k == 0 || k > p {
            return Err(Error::Dim(format!("invalid loading shape {p}x{k}")));
        }
        for ((i, j), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { t: 0, row: i, col: j });
            }
        }
        let gram = values.t().dot(&values);
        let scale = F::cast_usize(p);
        let tol = F::cast_f64(IDENTIFIABILITY_TOL);
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { F::one() } else { F::zero() };
                if (gram[[i, j]] / scale - want).abs() > tol {
                    return Err(Error::Dim(format!(
                        "identifiability violated: (L'L/p)[{i},{j}] = {}",
                        gram[[i, j]] / scale
                    )));
                }
            }
        }
        let mut values = values;
        fix_column_signs(&mut values);
        Ok(Self { values })
    }

    /// `sqrt(p)` times the leading eigenvectors of a covariance matrix;
    /// the eigenpairs already carry the sort order and sign convention.
    pub fn from_eigenpairs(eig: &EigenPairs<F>, k: usize) -> Result<Self> {
        let p = eig.vectors.nrows();
        if k == 0 || k > eig.vectors.ncols() {
            return Err(Error::Dim(format!(
                "requested {k} columns from {} eigenvectors",
                eig.vectors.ncols()
            )));
        }
        let scale = F::cast_usize(p).sqrt();
        let values = eig.vectors.slice(s![.., ..k]).mapv(|v| v * scale);
        Ok(Self { values })
    }

    pub fn dim_p(&self) -> usize {
        self.values.nrows()
    }

    pub fn rank_k(&self) -> usize {
        self.values.ncols()
    }

    /// The `sqrt(p)`-scaled loading values.
    pub fn values(&self) -> &Array2<F> {
        &self.values
    }

    /// Column-orthonormal factor `L / sqrt(p)`.
    pub fn orthonormal(&self) -> Array2<F> {
        let scale = F::cast_usize(self.dim_p()).sqrt();
        self.values.mapv(|v| v / scale)
    }
}

/// Rescales a full-column-rank `p x k` matrix onto the identifiability
/// manifold: `sqrt(p) * Q` with `Q` the column-orthonormal factor of `m`
/// (same column space, input column order, canonical signs).
///
/// Errors with [`Error::RankDeficient`] when the numerical rank of `m` is
/// below `k`.
pub fn normalize_loading<F: Scalar>(m: &ArrayView2<F>) -> Result<LoadingMatrix<F>> {
    let q = orthonormal_basis(m)?;
    let scale = F::cast_usize(m.nrows()).sqrt();
    let mut values = q.mapv(|v| v * scale);
    fix_column_signs(&mut values);
    Ok(LoadingMatrix { values })
}
