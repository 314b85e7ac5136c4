//! Estimators for the matrix factor model `X_t = R F_t C' + E_t`:
//! initialization by PCA of the unprojected Gram matrices, least-squares
//! projected estimation, and Huber-weighted robust estimation.
//!
//! One sweep of the iteration rebuilds both projected covariance matrices
//! from the pre-sweep loading pair and replaces the loadings with scaled
//! leading eigenvectors. The robust path refreshes the per-observation
//! weights once per sweep and applies them to both updates; with all
//! weights equal to one it is the exact least-squares update.

use ndarray::linalg::general_mat_mul;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::evalmetrics::space_distance;
use crate::fit::{FactorFit, FitConfig, FitMethod, TauRule};
use crate::loading::LoadingMatrix;
use crate::numerics::{frob_norm, top_k_eig};
use crate::scalar::Scalar;
use crate::series::{FactorScores, MatrixSeries};

/// Median residual below this value makes the Huber weights directionless.
const DEGENERATE_TAU: f64 = 1e-12;

/// Projected sample covariance matrices.
///
/// `m_c = (1/(T p2)) sum_t w_t X_t C C' X_t'` (order `p1`) and
/// `m_r = (1/(T p1)) sum_t w_t X_t' R R' X_t` (order `p2`), both built from
/// the same loading pair and weights, then symmetrized.
#[derive(Debug, Clone)]
pub struct ProjectedCov<F> {
    pub m_c: Array2<F>,
    pub m_r: Array2<F>,
}

impl<F: Scalar> ProjectedCov<F> {
    pub fn build(
        s: &MatrixSeries<F>,
        row: &LoadingMatrix<F>,
        col: &LoadingMatrix<F>,
        weights: Option<&HuberWeights<F>>,
    ) -> Result<Self> {
        Ok(Self {
            m_c: build_mc(s, col, weights)?,
            m_r: build_mr(s, row, weights)?,
        })
    }
}

/// Huber-induced per-observation weights.
///
/// `w[t] = 1` when `residuals[t] <= tau`, `tau / residuals[t]` otherwise,
/// so every weight lies in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct HuberWeights<F> {
    pub w: Vec<F>,
    pub tau: F,
    pub residuals: Vec<F>,
}

impl<F: Scalar> HuberWeights<F> {
    pub fn from_residuals(residuals: Vec<F>, tau: F) -> Self {
        let w = residuals
            .iter()
            .map(|&r| if r <= tau { F::one() } else { tau / r })
            .collect();
        Self { w, tau, residuals }
    }
}

/// Initial estimators: PCA with unit projection (the `alpha = 0` variant).
///
/// Returns `sqrt(p1)` times the leading `k1` eigenvectors of
/// `(1/(T p1 p2)) sum_t X_t X_t'` and `sqrt(p2)` times the leading `k2`
/// eigenvectors of `(1/(T p1 p2)) sum_t X_t' X_t`.
pub fn alpha_pca_init<F: Scalar>(
    s: &MatrixSeries<F>,
    k1: usize,
    k2: usize,
) -> Result<(LoadingMatrix<F>, LoadingMatrix<F>)> {
    let (p1, p2, t_len) = (s.n_rows(), s.n_cols(), s.t_len());
    if k1 == 0 || k1 > p1 || k2 == 0 || k2 > p2 {
        return Err(Error::Dim(format!(
            "factor numbers ({k1}, {k2}) out of range for a {p1}x{p2} panel"
        )));
    }
    let scale = F::one() / (F::cast_usize(t_len) * F::cast_usize(p1) * F::cast_usize(p2));
    let mut gram_rows: Array2<F> = Array2::zeros((p1, p1));
    let mut gram_cols: Array2<F> = Array2::zeros((p2, p2));
    for x in s.iter() {
        general_mat_mul(F::one(), x, &x.t(), F::one(), &mut gram_rows);
        general_mat_mul(F::one(), &x.t(), x, F::one(), &mut gram_cols);
    }
    let gram_rows = symmetrize_scaled(gram_rows, scale);
    let gram_cols = symmetrize_scaled(gram_cols, scale);
    let row = LoadingMatrix::from_eigenpairs(&top_k_eig(&gram_rows.view(), k1)?, k1)?;
    let col = LoadingMatrix::from_eigenpairs(&top_k_eig(&gram_cols.view(), k2)?, k2)?;
    Ok((row, col))
}

/// Weighted column-projected covariance
/// `(1/(T p2)) sum_t w_t X_t C C' X_t'`, symmetrized. Absent weights mean
/// `w_t = 1`.
pub fn build_mc<F: Scalar>(
    s: &MatrixSeries<F>,
    col: &LoadingMatrix<F>,
    weights: Option<&HuberWeights<F>>,
) -> Result<Array2<F>> {
    if col.dim_p() != s.n_cols() {
        return Err(Error::Dim(format!(
            "column loading has {} rows, series has p2 = {}",
            col.dim_p(),
            s.n_cols()
        )));
    }
    check_weights_len(weights, s.t_len())?;
    let (p1, p2, t_len) = (s.n_rows(), s.n_cols(), s.t_len());
    let mut acc: Array2<F> = Array2::zeros((p1, p1));
    for (t, x) in s.iter().enumerate() {
        let y = x.dot(col.values());
        let w = weight_at(weights, t);
        general_mat_mul(w, &y, &y.t(), F::one(), &mut acc);
    }
    let scale = F::one() / (F::cast_usize(t_len) * F::cast_usize(p2));
    Ok(symmetrize_scaled(acc, scale))
}

/// Weighted row-projected covariance
/// `(1/(T p1)) sum_t w_t X_t' R R' X_t`, symmetrized. Mirror of
/// [`build_mc`] with the roles of rows and columns swapped.
pub fn build_mr<F: Scalar>(
    s: &MatrixSeries<F>,
    row: &LoadingMatrix<F>,
    weights: Option<&HuberWeights<F>>,
) -> Result<Array2<F>> {
    if row.dim_p() != s.n_rows() {
        return Err(Error::Dim(format!(
            "row loading has {} rows, series has p1 = {}",
            row.dim_p(),
            s.n_rows()
        )));
    }
    check_weights_len(weights, s.t_len())?;
    let (p1, p2, t_len) = (s.n_rows(), s.n_cols(), s.t_len());
    let mut acc: Array2<F> = Array2::zeros((p2, p2));
    for (t, x) in s.iter().enumerate() {
        let z = x.t().dot(row.values());
        let w = weight_at(weights, t);
        general_mat_mul(w, &z, &z.t(), F::one(), &mut acc);
    }
    let scale = F::one() / (F::cast_usize(t_len) * F::cast_usize(p1));
    Ok(symmetrize_scaled(acc, scale))
}

fn check_weights_len<F: Scalar>(weights: Option<&HuberWeights<F>>, t_len: usize) -> Result<()> {
    if let Some(w) = weights {
        if w.w.len() != t_len {
            return Err(Error::Dim(format!(
                "{} weights for {} observations",
                w.w.len(),
                t_len
            )));
        }
    }
    Ok(())
}

fn weight_at<F: Scalar>(weights: Option<&HuberWeights<F>>, t: usize) -> F {
    weights.map_or_else(F::one, |w| w.w[t])
}

fn symmetrize_scaled<F: Scalar>(m: Array2<F>, scale: F) -> Array2<F> {
    let half = F::cast_f64(0.5);
    let n = m.nrows();
    let mut out = m;
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (out[[i, j]] + out[[j, i]]) * half;
            out[[i, j]] = avg;
            out[[j, i]] = avg;
        }
    }
    out.mapv_inplace(|v| v * scale);
    out
}

/// Factor scores `F_t = R' X_t C / (p1 p2)`, the per-`t` least-squares
/// solution under the identifiability constraints.
pub fn estimate_scores<F: Scalar>(
    s: &MatrixSeries<F>,
    row: &LoadingMatrix<F>,
    col: &LoadingMatrix<F>,
) -> Result<FactorScores<F>> {
    if row.dim_p() != s.n_rows() || col.dim_p() != s.n_cols() {
        return Err(Error::Dim(format!(
            "loadings ({}x{}, {}x{}) do not match series {}x{}",
            row.dim_p(),
            row.rank_k(),
            col.dim_p(),
            col.rank_k(),
            s.n_rows(),
            s.n_cols()
        )));
    }
    let scale = F::one() / (F::cast_usize(s.n_rows()) * F::cast_usize(s.n_cols()));
    let scores = s
        .iter()
        .map(|x| {
            let f = row.values().t().dot(x).dot(col.values());
            f.mapv(|v| v * scale)
        })
        .collect();
    FactorScores::new(scores)
}

/// Common components `S_t = R F_t C'` assembled from the parts.
pub fn compose_common<F: Scalar>(
    row: &LoadingMatrix<F>,
    scores: &FactorScores<F>,
    col: &LoadingMatrix<F>,
) -> Result<MatrixSeries<F>> {
    let data = scores
        .iter()
        .map(|f| row.values().dot(f).dot(&col.values().t()))
        .collect();
    MatrixSeries::new(data)
}

/// Residual Frobenius norms `|X_t - R F_t C'|_F` with scores from
/// [`estimate_scores`].
pub fn residual_norms<F: Scalar>(
    s: &MatrixSeries<F>,
    row: &LoadingMatrix<F>,
    col: &LoadingMatrix<F>,
) -> Result<Vec<F>> {
    let scores = estimate_scores(s, row, col)?;
    Ok(s.iter()
        .zip(scores.iter())
        .map(|(x, f)| {
            let fitted = row.values().dot(f).dot(&col.values().t());
            let diff = x - &fitted;
            frob_norm(&diff.view())
        })
        .collect())
}

/// Huber threshold rule: the median of the per-observation residual norms
/// (mean of the two central order statistics for even `T`).
///
/// Errors with [`Error::DegenerateTau`] when the median falls below 1e-12;
/// callers fall back to the unweighted fit.
pub fn compute_tau<F: Scalar>(
    s: &MatrixSeries<F>,
    row: &LoadingMatrix<F>,
    col: &LoadingMatrix<F>,
) -> Result<F> {
    let mut norms = residual_norms(s, row, col)?;
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = norms.len();
    let median = if n % 2 == 1 {
        norms[n / 2]
    } else {
        (norms[n / 2 - 1] + norms[n / 2]) * F::cast_f64(0.5)
    };
    if median < F::cast_f64(DEGENERATE_TAU) {
        return Err(Error::DegenerateTau);
    }
    Ok(median)
}

/// Huber weights at threshold `tau`, computed from the residual form.
pub fn huber_weights<F: Scalar>(
    s: &MatrixSeries<F>,
    row: &LoadingMatrix<F>,
    col: &LoadingMatrix<F>,
    tau: F,
) -> Result<HuberWeights<F>> {
    let residuals = residual_norms(s, row, col)?;
    Ok(HuberWeights::from_residuals(residuals, tau))
}

/// Huber loss: quadratic inside `[-tau, tau]`, linear outside.
pub fn huber_loss<F: Scalar>(x: F, tau: F) -> F {
    let two = F::cast_f64(2.0);
    if x.abs() <= tau {
        x * x
    } else {
        two * tau * x.abs() - tau * tau
    }
}

/// Least-squares projected estimation: initialize, then alternate scaled
/// eigenvector updates of both loadings until the subspace movement drops
/// below `cfg.tol` or `cfg.max_iters` sweeps.
///
/// Never errors on non-convergence; the `converged` flag records it.
pub fn fit_pe<F: Scalar>(s: &MatrixSeries<F>, cfg: &FitConfig<F>) -> Result<FactorFit<F>> {
    check_fit_config(s, cfg)?;
    let init = alpha_pca_init(s, cfg.k1, cfg.k2)?;
    let (row, col, n_iters, converged) = fit_iterate(s, cfg, init, None)?;
    let scores = estimate_scores(s, &row, &col)?;
    let common = compose_common(&row, &scores, &col)?;
    let final_objective = mean_squared_residual(s, &common);
    Ok(FactorFit {
        row_loading: row,
        col_loading: col,
        scores,
        common,
        n_iters,
        converged,
        final_objective,
        method: FitMethod::Pe,
        tau: None,
    })
}

/// Huber-weighted robust fit. The threshold is fixed once (median
/// residual at the initial estimators, or the configured constant) and
/// held across iterations.
///
/// A degenerate threshold (perfectly fit data) falls back to the unweighted
/// update path; the fit then reports `tau = None`.
pub fn fit_rmfa<F: Scalar>(s: &MatrixSeries<F>, cfg: &FitConfig<F>) -> Result<FactorFit<F>> {
    check_fit_config(s, cfg)?;
    let init = alpha_pca_init(s, cfg.k1, cfg.k2)?;
    let tau = match cfg.tau_rule {
        TauRule::Fixed(tau) => {
            if tau <= F::zero() {
                return Err(Error::Config("fixed tau must be positive".into()));
            }
            Some(tau)
        }
        TauRule::MedianResidual => match compute_tau(s, &init.0, &init.1) {
            Ok(tau) => Some(tau),
            Err(Error::DegenerateTau) => None,
            Err(e) => return Err(e),
        },
    };
    let (row, col, n_iters, converged) = fit_iterate(s, cfg, init, tau)?;
    let scores = estimate_scores(s, &row, &col)?;
    let common = compose_common(&row, &scores, &col)?;
    let final_objective = match tau {
        Some(tau) => {
            let norms = per_t_residual_norms(s, &common);
            let sum: F = norms.iter().map(|&r| huber_loss(r, tau)).sum();
            sum / F::cast_usize(s.t_len())
        }
        None => mean_squared_residual(s, &common),
    };
    Ok(FactorFit {
        row_loading: row,
        col_loading: col,
        scores,
        common,
        n_iters,
        converged,
        final_objective,
        method: FitMethod::Rmfa,
        tau,
    })
}

fn check_fit_config<F: Scalar>(s: &MatrixSeries<F>, cfg: &FitConfig<F>) -> Result<()> {
    if cfg.max_iters == 0 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }
    if cfg.tol <= F::zero() {
        return Err(Error::Config("tol must be positive".into()));
    }
    let (p1, p2, t_len) = (s.n_rows(), s.n_cols(), s.t_len());
    if cfg.k1 == 0 || cfg.k1 > p1.min(t_len * p2) {
        return Err(Error::Dim(format!(
            "k1 = {} out of range for p1 = {p1}, T = {t_len}, p2 = {p2}",
            cfg.k1
        )));
    }
    if cfg.k2 == 0 || cfg.k2 > p2.min(t_len * p1) {
        return Err(Error::Dim(format!(
            "k2 = {} out of range for p2 = {p2}, T = {t_len}, p1 = {p1}",
            cfg.k2
        )));
    }
    Ok(())
}

/// One sweep: refresh the weights (robust path only), rebuild both projected
/// covariance matrices from the pre-sweep pair, update both loadings.
fn fit_iterate<F: Scalar>(
    s: &MatrixSeries<F>,
    cfg: &FitConfig<F>,
    init: (LoadingMatrix<F>, LoadingMatrix<F>),
    tau: Option<F>,
) -> Result<(LoadingMatrix<F>, LoadingMatrix<F>, usize, bool)> {
    let (mut row, mut col) = init;
    let mut n_iters = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        n_iters += 1;
        let weights = match tau {
            Some(tau) => Some(huber_weights(s, &row, &col, tau)?),
            None => None,
        };
        let cov = ProjectedCov::build(s, &row, &col, weights.as_ref())?;
        let row_new = LoadingMatrix::from_eigenpairs(&top_k_eig(&cov.m_c.view(), cfg.k1)?, cfg.k1)?;
        let col_new = LoadingMatrix::from_eigenpairs(&top_k_eig(&cov.m_r.view(), cfg.k2)?, cfg.k2)?;
        let d_row = space_distance(&row.orthonormal().view(), &row_new.orthonormal().view())?;
        let d_col = space_distance(&col.orthonormal().view(), &col_new.orthonormal().view())?;
        row = row_new;
        col = col_new;
        if d_row.max(d_col) < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok((row, col, n_iters, converged))
}

fn per_t_residual_norms<F: Scalar>(s: &MatrixSeries<F>, common: &MatrixSeries<F>) -> Vec<F> {
    s.iter()
        .zip(common.iter())
        .map(|(x, c)| {
            let diff = x - c;
            frob_norm(&diff.view())
        })
        .collect()
}

fn mean_squared_residual<F: Scalar>(s: &MatrixSeries<F>, common: &MatrixSeries<F>) -> F {
    let sum: F = per_t_residual_norms(s, common).iter().map(|&r| r * r).sum();
    sum / F::cast_usize(s.t_len())
}
