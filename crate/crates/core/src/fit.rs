//! Fit configuration and estimation output types.

use crate::loading::LoadingMatrix;
use crate::scalar::Scalar;
use crate::series::{FactorScores, MatrixSeries};

/// Which estimator produced a [`FactorFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Least-squares projected estimation.
    Pe,
    /// Huber-weighted robust matrix factor analysis.
    Rmfa,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitMethod::Pe => write!(f, "pe"),
            FitMethod::Rmfa => write!(f, "rmfa"),
        }
    }
}

/// How the Huber threshold is chosen for the robust fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule<F> {
    /// Median of the per-observation residual norms at the initial
    /// estimators, held fixed across iterations.
    MedianResidual,
    /// Caller-supplied fixed threshold.
    Fixed(F),
}

/// Configuration for [`crate::estimation::fit_pe`] and
/// [`crate::estimation::fit_rmfa`].
///
/// Convergence is measured as the larger of the subspace distances between
/// successive row and column loading estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<F> {
    pub k1: usize,
    pub k2: usize,
    pub max_iters: usize,
    pub tol: F,
    pub tau_rule: TauRule<F>,
}

impl<F: Scalar> FitConfig<F> {
    pub fn new(k1: usize, k2: usize) -> Self {
        Self {
            k1,
            k2,
            max_iters: 100,
            tol: F::cast_f64(1e-6),
            tau_rule: TauRule::MedianResidual,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        assert!(max_iters >= 1, "max_iters must be at least 1");
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol(mut self, tol: F) -> Self {
        assert!(tol > F::zero(), "tol must be positive");
        self.tol = tol;
        self
    }

    pub fn with_tau_rule(mut self, tau_rule: TauRule<F>) -> Self {
        if let TauRule::Fixed(tau) = tau_rule {
            assert!(tau > F::zero(), "fixed tau must be positive");
        }
        self.tau_rule = tau_rule;
        self
    }
}

/// Complete estimation output.
///
/// `common[t]` is reconstructed as `row_loading * scores[t] * col_loading'`;
/// it is never stored independently of the parts. `final_objective` is the
/// value of the fitted method's own loss at the returned estimates: the mean
/// squared residual for PE, the mean Huber loss for RMFA.
///
/// For RMFA, `tau = None` signals that the median residual was numerically
/// zero and the fit fell back to the unweighted PE update path.
#[derive(Debug, Clone)]
pub struct FactorFit<F> {
    pub row_loading: LoadingMatrix<F>,
    pub col_loading: LoadingMatrix<F>,
    pub scores: FactorScores<F>,
    pub common: MatrixSeries<F>,
    pub n_iters: usize,
    pub converged: bool,
    pub final_objective: F,
    pub method: FitMethod,
    pub tau: Option<F>,
}
