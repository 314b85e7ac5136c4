//! Robust estimation of large-dimensional matrix factor models.
//!
//! The model is `X_t = R0 F_t C0' + E_t` for a `p1 x p2` panel observed at
//! `T` time points, with a `k1 x k2` latent factor matrix. This crate
//! provides:
//!
//! - least-squares projected estimation of the loading spaces and the
//!   Huber-weighted robust variant ([`estimation`]),
//! - eigenvalue-ratio selection of the factor-number pair, plain and
//!   robust-iterative ([`ranksel`]),
//! - the synthetic data-generating process used to benchmark the
//!   estimators ([`datagen`]),
//! - evaluation metrics: loading-space distance, common-component MSE, and
//!   rolling-validation statistics ([`evalmetrics`]).
//!
//! All numerics are generic over the scalar type through
//! [`scalar::Scalar`]; the `F64` aliases below are the intended production
//! instantiation.

pub mod datagen;
pub mod error;
pub mod estimation;
pub mod evalmetrics;
pub mod fit;
pub mod loading;
pub mod numerics;
pub mod ranksel;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use fit::{FactorFit, FitConfig, FitMethod, TauRule};
pub use loading::{normalize_loading, LoadingMatrix};
pub use scalar::{SampleScalar, Scalar};
pub use series::{validate_series, FactorScores, MatrixSeries};

/// `f64` instantiations of the core types.
pub type MatrixSeriesF64 = MatrixSeries<f64>;
pub type LoadingMatrixF64 = LoadingMatrix<f64>;
pub type FactorScoresF64 = FactorScores<f64>;
pub type FactorFitF64 = FactorFit<f64>;
pub type FitConfigF64 = FitConfig<f64>;
pub type DgpConfigF64 = datagen::DgpConfig<f64>;
pub type GroundTruthF64 = datagen::GroundTruth<f64>;
pub type RankEstimateF64 = ranksel::RankEstimate<f64>;
pub type RollingStatsF64 = evalmetrics::RollingStats<f64>;
