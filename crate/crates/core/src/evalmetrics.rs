//! Evaluation statistics: loading-space distance, common-component mean
//! squared error, and rolling-validation pricing statistics.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::estimation::{estimate_scores, fit_pe, fit_rmfa};
use crate::fit::{FitConfig, FitMethod};
use crate::numerics::{frob_norm, kron, orthonormal_basis};
use crate::scalar::Scalar;
use crate::series::MatrixSeries;

/// Inputs whose `Q'Q` deviates from the identity by more than this are
/// orthonormalized before the distance is taken.
const ORTHONORMAL_TOL: f64 = 1e-8;

/// Distance between the column spaces of `q1` (p x q1) and `q2` (p x q2):
///
/// `D = sqrt(1 - Tr(Q1 Q1' Q2 Q2') / max(q1, q2))`
///
/// computed after orthonormalizing inputs that are not column-orthonormal,
/// clamped into `[0, 1]` against roundoff. Zero for equal spaces, one for
/// orthogonal spaces.
pub fn space_distance<F: Scalar>(q1: &ArrayView2<F>, q2: &ArrayView2<F>) -> Result<F> {
    if q1.nrows() != q2.nrows() {
        return Err(Error::Dim(format!(
            "ambient dimensions differ: {} vs {}",
            q1.nrows(),
            q2.nrows()
        )));
    }
    let o1 = ensure_orthonormal(q1)?;
    let o2 = ensure_orthonormal(q2)?;
    let cross = o1.t().dot(&o2);
    let qmax = F::cast_usize(q1.ncols().max(q2.ncols()));
    let rad = if q1.ncols() == q2.ncols() {
        // Equal ranks: 1 - tr/q cancels catastrophically near zero, so use
        // the algebraically identical projection residual
        // |Q2 - Q1 (Q1'Q2)|_F^2 / q, which resolves distances down to
        // machine precision.
        let resid = &o2 - &o1.dot(&cross);
        let n = frob_norm(&resid.view());
        n * n / qmax
    } else {
        let tr: F = cross.iter().map(|&v| v * v).sum();
        F::one() - tr / qmax
    };
    Ok(rad.max(F::zero()).min(F::one()).sqrt())
}

fn ensure_orthonormal<F: Scalar>(q: &ArrayView2<F>) -> Result<Array2<F>> {
    let k = q.ncols();
    let gram = q.t().dot(q);
    let tol = F::cast_f64(ORTHONORMAL_TOL);
    let mut orthonormal = true;
    'outer: for i in 0..k {
        for j in 0..k {
            let want = if i == j { F::one() } else { F::zero() };
            if (gram[[i, j]] - want).abs() > tol {
                orthonormal = false;
                break 'outer;
            }
        }
    }
    if orthonormal {
        Ok(q.to_owned())
    } else {
        orthonormal_basis(q)
    }
}

/// Mean squared error of the common components:
/// `(1/(T p1 p2)) sum_t |est_t - truth_t|_F^2`.
pub fn common_mse<F: Scalar>(est: &MatrixSeries<F>, truth: &MatrixSeries<F>) -> Result<F> {
    if est.t_len() != truth.t_len()
        || est.n_rows() != truth.n_rows()
        || est.n_cols() != truth.n_cols()
    {
        return Err(Error::Dim(format!(
            "series shapes differ: {}x{}x{} vs {}x{}x{}",
            est.t_len(),
            est.n_rows(),
            est.n_cols(),
            truth.t_len(),
            truth.n_rows(),
            truth.n_cols()
        )));
    }
    let mut sum = F::zero();
    for (a, b) in est.iter().zip(truth.iter()) {
        let diff = a - b;
        let n = frob_norm(&diff.view());
        sum += n * n;
    }
    let denom =
        F::cast_usize(est.t_len()) * F::cast_usize(est.n_rows()) * F::cast_usize(est.n_cols());
    Ok(sum / denom)
}

/// Rolling-validation statistics.
///
/// `mse_t` and `rho_t` have one entry per evaluation window; `v_t` has one
/// entry per consecutive window pair (one fewer). `rho_t` is the unexplained
/// proportion of total variances around the within-window mean matrix.
#[derive(Debug, Clone)]
pub struct RollingStats<F> {
    pub mse_t: Vec<F>,
    pub rho_t: Vec<F>,
    pub v_t: Vec<F>,
    pub window_years: usize,
}

impl<F: Scalar> RollingStats<F> {
    pub fn mean_mse(&self) -> F {
        mean(&self.mse_t)
    }

    pub fn mean_rho(&self) -> F {
        mean(&self.rho_t)
    }

    /// Mean loading-space variation; zero when fewer than two windows exist.
    pub fn mean_v(&self) -> F {
        if self.v_t.is_empty() {
            F::zero()
        } else {
            mean(&self.v_t)
        }
    }
}

fn mean<F: Scalar>(xs: &[F]) -> F {
    xs.iter().copied().sum::<F>() / F::cast_usize(xs.len())
}

/// Rolling validation: for each evaluation block of `periods_per_window`
/// consecutive observations, fit on the trailing `n_window_years` blocks,
/// score the evaluation block with the fitted loadings, and record the mean
/// squared pricing error, the unexplained variance proportion, and the
/// loading-space drift `D(C_t (x) R_t, C_{t-1} (x) R_{t-1})` between
/// consecutive fits.
///
/// Trailing observations that do not fill a whole block are ignored. Errors
/// with [`Error::InsufficientData`] when fewer than
/// `(n_window_years + 1) * periods_per_window` observations are available.
pub fn rolling_validate<F: Scalar>(
    s: &MatrixSeries<F>,
    periods_per_window: usize,
    n_window_years: usize,
    k1: usize,
    k2: usize,
    method: FitMethod,
) -> Result<RollingStats<F>> {
    if periods_per_window == 0 || n_window_years == 0 {
        return Err(Error::Config(
            "periods_per_window and n_window_years must be positive".into(),
        ));
    }
    let years = s.t_len() / periods_per_window;
    if years < n_window_years + 1 {
        return Err(Error::InsufficientData(format!(
            "need at least {} observations for window_years = {n_window_years}, have {}",
            (n_window_years + 1) * periods_per_window,
            s.t_len()
        )));
    }

    let mut mse_t = Vec::new();
    let mut rho_t = Vec::new();
    let mut v_t = Vec::new();
    let mut prev_kron: Option<Array2<F>> = None;
    let per = periods_per_window;
    let entries = F::cast_usize(per) * F::cast_usize(s.n_rows()) * F::cast_usize(s.n_cols());

    for year in n_window_years..years {
        let train = s.window((year - n_window_years) * per, year * per)?;
        let cfg = FitConfig::new(k1, k2);
        let fit = match method {
            FitMethod::Pe => fit_pe(&train, &cfg)?,
            FitMethod::Rmfa => fit_rmfa(&train, &cfg)?,
        };
        let eval = s.window(year * per, (year + 1) * per)?;
        let scores = estimate_scores(&eval, &fit.row_loading, &fit.col_loading)?;

        let mut err_sq = F::zero();
        for (x, f) in eval.iter().zip(scores.iter()) {
            let fitted = fit.row_loading.values().dot(f).dot(&fit.col_loading.values().t());
            let diff = x - &fitted;
            let n = frob_norm(&diff.view());
            err_sq += n * n;
        }

        let mut mean_mat: Array2<F> = Array2::zeros((s.n_rows(), s.n_cols()));
        for x in eval.iter() {
            mean_mat.zip_mut_with(x, |m, &v| *m += v);
        }
        mean_mat.mapv_inplace(|v| v / F::cast_usize(per));
        let mut tot_sq = F::zero();
        for x in eval.iter() {
            let diff = x - &mean_mat;
            let n = frob_norm(&diff.view());
            tot_sq += n * n;
        }

        mse_t.push(err_sq / entries);
        rho_t.push(err_sq / tot_sq);

        let kron_cur = kron(
            &fit.col_loading.orthonormal().view(),
            &fit.row_loading.orthonormal().view(),
        );
        if let Some(prev) = prev_kron.take() {
            v_t.push(space_distance(&prev.view(), &kron_cur.view())?);
        }
        prev_kron = Some(kron_cur);
    }

    Ok(RollingStats {
        mse_t,
        rho_t,
        v_t,
        window_years: n_window_years,
    })
}
