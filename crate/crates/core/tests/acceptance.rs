//! Acceptance suite: every release gate runs here, one pass/fail line per
//! criterion (run with `--nocapture` to see them all).
//!
//! The fast gates (1-6) are deterministic oracle and property checks. The
//! statistical gates (7-12) run 200-replication Monte-Carlo cells with
//! derived seeds; the heavy cells are computed once and shared between
//! criteria.
//!
//! Criterion 9 encodes an external reference level for the common-component
//! error that sits below the attainable floor of this generator (the score
//! projection alone contributes k1*k2/(p1*p2) = 0.009 on that cell, see the
//! in-test note); it is expected to fail and is kept as stated rather than
//! loosened.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use matfact::datagen::{derive_seed, gen_dataset, DgpConfig, ErrorDist};
use matfact::estimation::{
    alpha_pca_init, build_mc, build_mr, compute_tau, estimate_scores, fit_pe, fit_rmfa,
    huber_weights, HuberWeights,
};
use matfact::evalmetrics::{common_mse, rolling_validate, space_distance};
use matfact::ranksel::{eigen_ratio, iter_er, rit_er};
use matfact::{FitConfig, FitMethod, MatrixSeries, TauRule};
use ndarray::Array2;

fn report(id: u32, desc: &str, pass: bool) {
    println!(
        "ACCEPTANCE {}: criterion {id}: {desc}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {id} failed: {desc}");
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// --- shared Monte-Carlo cells ------------------------------------------------

struct Cell {
    d_r_pe: Vec<f64>,
    d_r_rmfa: Vec<f64>,
    d_c_pe: Vec<f64>,
    d_c_rmfa: Vec<f64>,
    mse_rmfa: Vec<f64>,
    rit_exact: usize,
    iter_exact: usize,
    reps: usize,
    fit_wall: Duration,
}

const REPS: usize = 200;

fn run_cell(dist: ErrorDist, t_len: usize, with_rank: bool, base: u64) -> Cell {
    let mut cell = Cell {
        d_r_pe: Vec::new(),
        d_r_rmfa: Vec::new(),
        d_c_pe: Vec::new(),
        d_c_rmfa: Vec::new(),
        mse_rmfa: Vec::new(),
        rit_exact: 0,
        iter_exact: 0,
        reps: REPS,
        fit_wall: Duration::ZERO,
    };
    for rep in 0..REPS {
        let seed = derive_seed(base, &[rep as u64]);
        let cfg = DgpConfig::<f64>::new(20, 50, t_len, 3, 3, seed)
            .with_ar(0.1, 0.1)
            .with_dist(dist);
        let truth = gen_dataset(&cfg).unwrap();
        let fit_cfg = FitConfig::new(3, 3);
        let t0 = Instant::now();
        let pe = fit_pe(&truth.x, &fit_cfg).unwrap();
        let rm = fit_rmfa(&truth.x, &fit_cfg).unwrap();
        cell.fit_wall += t0.elapsed();
        cell.d_r_pe
            .push(space_distance(&pe.row_loading.values().view(), &truth.r0.view()).unwrap());
        cell.d_r_rmfa
            .push(space_distance(&rm.row_loading.values().view(), &truth.r0.view()).unwrap());
        cell.d_c_pe
            .push(space_distance(&pe.col_loading.values().view(), &truth.c0.view()).unwrap());
        cell.d_c_rmfa
            .push(space_distance(&rm.col_loading.values().view(), &truth.c0.view()).unwrap());
        cell.mse_rmfa
            .push(common_mse(&rm.common, &truth.s0).unwrap());
        if with_rank {
            let rit = rit_er(&truth.x, 10, 100).unwrap();
            let ite = iter_er(&truth.x, 10, 100).unwrap();
            if rit.k1_hat == 3 && rit.k2_hat == 3 {
                cell.rit_exact += 1;
            }
            if ite.k1_hat == 3 && ite.k2_hat == 3 {
                cell.iter_exact += 1;
            }
        }
    }
    cell
}

fn cell_normal() -> &'static Cell {
    static CELL: OnceLock<Cell> = OnceLock::new();
    CELL.get_or_init(|| run_cell(ErrorDist::MatrixNormal, 50, true, 7001))
}

fn cell_t3() -> &'static Cell {
    static CELL: OnceLock<Cell> = OnceLock::new();
    CELL.get_or_init(|| run_cell(ErrorDist::MatrixT { nu: 3 }, 50, true, 7002))
}

fn cell_normal_t100() -> &'static Cell {
    static CELL: OnceLock<Cell> = OnceLock::new();
    CELL.get_or_init(|| run_cell(ErrorDist::MatrixNormal, 100, false, 7003))
}

// --- fast deterministic gates -------------------------------------------------

#[test]
fn c01_noise_free_exact_recovery() {
    let shapes = [(8, 8, 10, 2, 2), (20, 10, 15, 3, 2)];
    let mut pass = true;
    for seed in 0..20u64 {
        let (p1, p2, t_len, k1, k2) = shapes[(seed % 2) as usize];
        let cfg = DgpConfig::<f64>::new(p1, p2, t_len, k1, k2, derive_seed(100, &[seed]))
            .noise_free();
        let truth = gen_dataset(&cfg).unwrap();
        let fit_cfg = FitConfig::new(k1, k2);
        for fit in [
            fit_pe(&truth.x, &fit_cfg).unwrap(),
            fit_rmfa(&truth.x, &fit_cfg).unwrap(),
        ] {
            let dr =
                space_distance(&fit.row_loading.values().view(), &truth.r0.view()).unwrap();
            let dc =
                space_distance(&fit.col_loading.values().view(), &truth.c0.view()).unwrap();
            pass &= dr <= 1e-8 && dc <= 1e-8;
        }
    }
    report(1, "noise-free exact recovery at 1e-8 over 20 seeds", pass);
}

#[test]
fn c02_huber_to_least_squares_limit() {
    let mut pass = true;
    for seed in 0..20u64 {
        let cfg = DgpConfig::<f64>::new(10, 12, 15, 2, 2, derive_seed(200, &[seed]))
            .with_ar(0.1, 0.1);
        let truth = gen_dataset(&cfg).unwrap();
        let pe = fit_pe(&truth.x, &FitConfig::new(2, 2)).unwrap();
        let rm = fit_rmfa(
            &truth.x,
            &FitConfig::new(2, 2).with_tau_rule(TauRule::Fixed(1e12)),
        )
        .unwrap();
        let dr = space_distance(
            &pe.row_loading.values().view(),
            &rm.row_loading.values().view(),
        )
        .unwrap();
        let dc = space_distance(
            &pe.col_loading.values().view(),
            &rm.col_loading.values().view(),
        )
        .unwrap();
        pass &= dr <= 1e-10 && dc <= 1e-10;
    }
    report(2, "huge-tau robust fit matches least squares at 1e-10", pass);
}

#[test]
fn c03_score_oracle() {
    let mut r = rng(300);
    let mut pass = true;
    for _ in 0..50 {
        let row = random_loading(6, 2, &mut r);
        let col = random_loading(7, 3, &mut r);
        let x = random_matrix(6, 7, &mut r);
        let s = MatrixSeries::new(vec![x.clone()]).unwrap();
        let scores = estimate_scores(&s, &row, &col).unwrap();
        let oracle = scores_by_normal_equations(&x, row.values(), col.values());
        let rel = frob(&(scores.get(0) - &oracle)) / (1.0 + frob(&oracle));
        pass &= rel <= 1e-10;
    }
    report(3, "scores match vectorized normal equations at 1e-10", pass);
}

#[test]
fn c04_covariance_oracles() {
    let mut r = rng(400);
    let mut pass = true;
    for case in 0..50 {
        let t_len = 3 + case % 4;
        let data: Vec<Array2<f64>> = (0..t_len).map(|_| random_matrix(5, 6, &mut r)).collect();
        let s = MatrixSeries::new(data.clone()).unwrap();
        let col = random_loading(6, 2, &mut r);
        let row = random_loading(5, 2, &mut r);
        let w: Vec<f64> = (0..t_len)
            .map(|_| rand::Rng::random_range(&mut r, 0.05..=1.0))
            .collect();
        let weights = HuberWeights {
            w: w.clone(),
            tau: 1.0,
            residuals: vec![0.0; t_len],
        };
        let mc = build_mc(&s, &col, Some(&weights)).unwrap();
        let want = naive_projected_cov_rows(&data, col.values(), &w);
        pass &= frob(&(&mc - &want)) / frob(&want) <= 1e-12;

        let mr = build_mr(&s, &row, Some(&weights)).unwrap();
        let data_t: Vec<Array2<f64>> = data.iter().map(|m| m.t().to_owned()).collect();
        let want = naive_projected_cov_rows(&data_t, row.values(), &w);
        pass &= frob(&(&mr - &want)) / frob(&want) <= 1e-12;
    }
    report(4, "projected covariances match naive accumulation at 1e-12", pass);
}

#[test]
fn c05_weight_identity() {
    let mut pass = true;
    for seed in 0..20u64 {
        let cfg = DgpConfig::<f64>::new(8, 7, 12, 2, 2, derive_seed(500, &[seed]))
            .with_ar(0.1, 0.1);
        let truth = gen_dataset(&cfg).unwrap();
        let (row, col) = alpha_pca_init(&truth.x, 2, 2).unwrap();
        let tau = compute_tau(&truth.x, &row, &col).unwrap();
        let got = huber_weights(&truth.x, &row, &col, tau).unwrap();
        let want = trace_form_weights(truth.x.as_slice(), row.values(), col.values(), tau);
        for (a, b) in got.w.iter().zip(want.iter()) {
            pass &= (a - b).abs() / b <= 1e-10;
        }
    }
    report(5, "residual-form and trace-form weights agree at 1e-10", pass);
}

#[test]
fn c06_ratio_and_distance_properties() {
    let mut r = rng(600);
    let mut pass = true;
    // eigen-ratio argmax scale invariance, 200 cases
    for case in 0..200 {
        let n = 5 + case % 4;
        let w = random_matrix(n, n, &mut r);
        let m = w.t().dot(&w);
        let sym = (&m + &m.t()).mapv(|v| v / 2.0);
        let c: f64 = rand::Rng::random_range(&mut r, 1e-3..1e3);
        let scaled = sym.mapv(|v| c * v);
        let (k1, _) = eigen_ratio(&sym.view(), n - 2).unwrap();
        let (k2, _) = eigen_ratio(&scaled.view(), n - 2).unwrap();
        pass &= k1 == k2;
    }
    // space-distance symmetry and basis invariance, 200 cases
    for _ in 0..200 {
        let q1 = random_matrix(8, 2, &mut r);
        let q2 = random_matrix(8, 2, &mut r);
        let d12 = space_distance(&q1.view(), &q2.view()).unwrap();
        let d21 = space_distance(&q2.view(), &q1.view()).unwrap();
        pass &= (d12 - d21).abs() <= 1e-10;

        let mut a = random_matrix(2, 2, &mut r);
        a[[0, 0]] += 3.0;
        a[[1, 1]] += 3.0;
        let da = space_distance(&q1.dot(&a).view(), &q2.view()).unwrap();
        pass &= (d12 - da).abs() <= 1e-8;
    }
    report(
        6,
        "eigen-ratio scale invariance and distance symmetry/basis invariance (200 cases each)",
        pass,
    );
}

// --- desk-scale statistical gates ----------------------------------------------

#[test]
fn c07_loading_error_level_normal_noise() {
    let cell = cell_normal();
    let m_rmfa = mean(&cell.d_r_rmfa);
    let m_pe = mean(&cell.d_r_pe);
    let in_band = |v: f64| (0.030..=0.042).contains(&v);
    let within_budget = cell.fit_wall < Duration::from_secs(300);
    println!(
        "  detail: mean D_R rmfa={m_rmfa:.4} pe={m_pe:.4}, fit wall {:?}",
        cell.fit_wall
    );
    report(
        7,
        "Gaussian-noise row-loading error in [0.030, 0.042] for both fits, under 5 min",
        in_band(m_rmfa) && in_band(m_pe) && within_budget,
    );
}

#[test]
fn c08_robustness_under_heavy_tails() {
    let cell = cell_t3();
    let m_rmfa = mean(&cell.d_r_rmfa);
    let m_pe = mean(&cell.d_r_pe);
    println!(
        "  detail: mean D_R rmfa={m_rmfa:.4} pe={m_pe:.4} ratio={:.2}",
        m_pe / m_rmfa
    );
    report(
        8,
        "t3-noise robust loading error <= 0.07 and at least half the least-squares error",
        m_rmfa <= 0.07 && m_pe / m_rmfa >= 2.0,
    );
}

#[test]
fn c09_common_component_mse_level() {
    let cell = cell_normal();
    let m = mean(&cell.mse_rmfa);
    // The gate [0.0030, 0.0055] encodes an external reference level. With
    // k1*k2 = 9 factor cells and unit-variance noise, the score projection
    // alone contributes 9/(20*50) = 0.009 to this statistic, so values
    // below that are not attainable for this generator; measured levels sit
    // near 0.013. Kept as stated rather than loosened.
    println!("  detail: mean common-component MSE rmfa={m:.4}");
    report(
        9,
        "Gaussian-noise robust common-component MSE in [0.0030, 0.0055]",
        (0.0030..=0.0055).contains(&m),
    );
}

#[test]
fn c10_rank_recovery_frequencies() {
    let normal = cell_normal();
    let t3 = cell_t3();
    let f_normal = normal.rit_exact as f64 / normal.reps as f64;
    let f_rit = t3.rit_exact as f64 / t3.reps as f64;
    let f_iter = t3.iter_exact as f64 / t3.reps as f64;
    println!("  detail: exact-rank freq normal={f_normal:.3} t3 rit={f_rit:.3} iter={f_iter:.3}");
    report(
        10,
        "rank selection: >= 0.97 exact under Gaussian noise; robust >= 0.55 and >= non-robust under t3",
        f_normal >= 0.97 && f_rit >= 0.55 && f_rit >= f_iter,
    );
}

#[test]
fn c11_rolling_validation_trend() {
    let cfg = DgpConfig::<f64>::new(10, 10, 480, 2, 2, derive_seed(1100, &[0]))
        .with_ar(0.1, 0.1)
        .with_dist(ErrorDist::MatrixT { nu: 3 });
    let truth = gen_dataset(&cfg).unwrap();
    let mut pass = true;
    let mut v_pe = Vec::new();
    let mut v_rm = Vec::new();
    for n in [5usize, 10, 15] {
        let pe = rolling_validate(&truth.x, 12, n, 2, 2, FitMethod::Pe).unwrap();
        let rm = rolling_validate(&truth.x, 12, n, 2, 2, FitMethod::Rmfa).unwrap();
        pass &= rm.mean_mse() <= pe.mean_mse() + 0.005;
        v_pe.push(pe.mean_v());
        v_rm.push(rm.mean_v());
    }
    println!("  detail: mean v over n=5,10,15: pe={v_pe:.4?} rmfa={v_rm:.4?}");
    pass &= v_pe[0] >= v_pe[1] && v_pe[1] >= v_pe[2];
    pass &= v_rm[0] >= v_rm[1] && v_rm[1] >= v_rm[2];
    report(
        11,
        "loading-space drift weakly decreasing in bandwidth; robust pricing error within 0.005 of least squares",
        pass,
    );
}

#[test]
fn c12_error_rate_trend_in_t() {
    let base = cell_normal();
    let doubled = cell_normal_t100();
    let msq = |xs: &[f64]| xs.iter().map(|d| d * d).sum::<f64>() / xs.len() as f64;
    let ratio_pe = msq(&base.d_r_pe) / msq(&doubled.d_r_pe);
    let ratio_rmfa = msq(&base.d_r_rmfa) / msq(&doubled.d_r_rmfa);
    println!("  detail: squared-error ratios T=50/T=100: pe={ratio_pe:.2} rmfa={ratio_rmfa:.2}");
    let in_band = |v: f64| (1.5..=3.0).contains(&v);
    report(
        12,
        "doubling T cuts mean squared loading error by a factor in [1.5, 3.0]",
        in_band(ratio_pe) && in_band(ratio_rmfa),
    );
}
