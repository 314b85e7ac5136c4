//! Factor-number estimation: the eigenvalue-ratio statistic and the
//! iterative procedures that alternate rank selection with weighted
//! loading refreshes until the rank pair stabilizes.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::estimation::{alpha_pca_init, build_mc, build_mr, compute_tau, huber_weights};
use crate::loading::LoadingMatrix;
use crate::numerics::top_k_eig;
use crate::scalar::Scalar;
use crate::series::MatrixSeries;

/// Relative regularizer added to ratio denominators so that vanishing
/// eigenvalues cannot blow the statistic up to infinity while keeping the
/// argmax scale-invariant.
const RATIO_DELTA: f64 = 1e-10;

/// Estimated factor-number pair with the per-iteration eigenvalue-ratio
/// vectors that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RankEstimate<F> {
    pub k1_hat: usize,
    pub k2_hat: usize,
    pub ratio_trace_r: Vec<Vec<F>>,
    pub ratio_trace_c: Vec<Vec<F>>,
    pub n_iters: usize,
    pub converged: bool,
}

/// Eigenvalue-ratio estimator on a symmetric PSD matrix:
/// `k_hat = argmax_{j <= k_max} lambda_j / (lambda_{j+1} + delta)` with
/// `delta = 1e-10 * lambda_1`, first index winning ties.
///
/// Returns the estimate together with the `k_max` ratios (1-indexed `j`
/// maps to `ratios[j-1]`).
pub fn eigen_ratio<F: Scalar>(m: &ArrayView2<F>, k_max: usize) -> Result<(usize, Vec<F>)> {
    if k_max == 0 || k_max + 1 > m.nrows() {
        return Err(Error::Dim(format!(
            "k_max = {k_max} needs a matrix of order at least {}",
            k_max + 1
        )));
    }
    let eig = top_k_eig(m, k_max + 1)?;
    ratios_from_values(&eig.values, k_max)
}

fn ratios_from_values<F: Scalar>(values: &[F], k_max: usize) -> Result<(usize, Vec<F>)> {
    let lead = values[0];
    if lead <= F::zero() {
        return Err(Error::ZeroMatrix);
    }
    let delta = F::cast_f64(RATIO_DELTA) * lead;
    let ratios: Vec<F> = (0..k_max)
        .map(|j| values[j] / (values[j + 1] + delta))
        .collect();
    let mut k_hat = 1;
    let mut best = ratios[0];
    for (j, &r) in ratios.iter().enumerate().skip(1) {
        if r > best {
            best = r;
            k_hat = j + 1;
        }
    }
    Ok((k_hat, ratios))
}

/// Robust iterative eigenvalue-ratio rank selection.
///
/// Starts from the rank pair `(k_max, k_max)` and PCA loadings at that rank.
/// Each iteration refreshes the Huber threshold and weights from the current
/// loadings, rebuilds the weighted column-projected covariance to re-estimate
/// `k1` and the row loading, then the weighted row-projected covariance
/// (with the refreshed row loading) to re-estimate `k2` and the column
/// loading. Stops when the rank pair repeats or `max_iters` is reached;
/// never fails on non-convergence.
///
/// Perfectly fit data (degenerate threshold) degrades gracefully to unit
/// weights for that iteration.
pub fn rit_er<F: Scalar>(
    s: &MatrixSeries<F>,
    k_max: usize,
    max_iters: usize,
) -> Result<RankEstimate<F>> {
    er_engine(s, k_max, max_iters, true)
}

/// Non-robust baseline: identical to [`rit_er`] with all weights forced to
/// one.
pub fn iter_er<F: Scalar>(
    s: &MatrixSeries<F>,
    k_max: usize,
    max_iters: usize,
) -> Result<RankEstimate<F>> {
    er_engine(s, k_max, max_iters, false)
}

fn er_engine<F: Scalar>(
    s: &MatrixSeries<F>,
    k_max: usize,
    max_iters: usize,
    robust: bool,
) -> Result<RankEstimate<F>> {
    if max_iters == 0 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }
    let (p1, p2) = (s.n_rows(), s.n_cols());
    if k_max == 0 || k_max + 1 > p1.min(p2) {
        return Err(Error::Dim(format!(
            "k_max = {k_max} out of range for a {p1}x{p2} panel"
        )));
    }

    let (mut row, mut col) = alpha_pca_init(s, k_max, k_max)?;
    let (mut k1, mut k2) = (k_max, k_max);
    let mut trace_r: Vec<Vec<F>> = Vec::new();
    let mut trace_c: Vec<Vec<F>> = Vec::new();
    let mut n_iters = 0;
    let mut converged = false;

    for _ in 0..max_iters {
        n_iters += 1;
        let weights = if robust {
            match compute_tau(s, &row, &col) {
                Ok(tau) => Some(huber_weights(s, &row, &col, tau)?),
                Err(Error::DegenerateTau) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };

        let m_c = build_mc(s, &col, weights.as_ref())?;
        let eig_c = top_k_eig(&m_c.view(), k_max + 1)?;
        let (k1_new, ratios_r) = ratios_from_values(&eig_c.values, k_max)?;
        trace_r.push(ratios_r);
        let row_new = LoadingMatrix::from_eigenpairs(&eig_c, k1_new)?;

        let m_r = build_mr(s, &row_new, weights.as_ref())?;
        let eig_r = top_k_eig(&m_r.view(), k_max + 1)?;
        let (k2_new, ratios_c) = ratios_from_values(&eig_r.values, k_max)?;
        trace_c.push(ratios_c);
        let col_new = LoadingMatrix::from_eigenpairs(&eig_r, k2_new)?;

        let repeated = k1_new == k1 && k2_new == k2;
        row = row_new;
        col = col_new;
        k1 = k1_new;
        k2 = k2_new;
        if repeated {
            converged = true;
            break;
        }
    }

    Ok(RankEstimate {
        k1_hat: k1,
        k2_hat: k2,
        ratio_trace_r: trace_r,
        ratio_trace_c: trace_c,
        n_iters,
        converged,
    })
}
