//! Subcommand implementations. All outputs are byte-deterministic for a
//! fixed base seed: replications run in parallel but results are gathered
//! in replication order and written by one writer.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use matfact::datagen::{derive_seed, gen_dataset, DgpConfig};
use matfact::estimation::{alpha_pca_init, compose_common, estimate_scores, fit_pe, fit_rmfa};
use matfact::evalmetrics::{common_mse, rolling_validate, space_distance};
use matfact::ranksel::{iter_er, rit_er, RankEstimate};
use matfact::{FactorFit, FitConfig, FitMethod, MatrixSeriesF64};
use rayon::prelude::*;

use crate::config::{ExperimentSpec, FitKind, RankKind, SettingSpec};
use crate::error::{CliError, Result};
use crate::io::{fmt_f64, read_series_csv, write_matrix_csv};

const RANK_MAX_ITERS: usize = 100;

/// Per-replication metric values in a fixed order.
struct RepMetrics {
    /// `(method, [d_r, d_c, mse])` per requested fit method.
    fit: Vec<(FitKind, [f64; 3])>,
    /// `(method, [exact, under])` per requested rank method (0/1 indicators).
    rank: Vec<(RankKind, [f64; 2])>,
}

fn run_replication(setting: &SettingSpec, spec: &ExperimentSpec, seed: u64) -> Result<RepMetrics> {
    let cfg = DgpConfig::<f64>::new(
        setting.p1,
        setting.p2,
        setting.t_len,
        setting.k1,
        setting.k2,
        seed,
    )
    .with_ar(setting.phi, setting.psi)
    .with_dist(setting.dist)
    .with_burn_in(setting.burn_in);
    let truth = gen_dataset(&cfg)?;

    let mut fit_rows = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let fit_cfg = FitConfig::new(setting.k1, setting.k2);
        let (row, col, common) = match method {
            FitKind::Pe => {
                let f = fit_pe(&truth.x, &fit_cfg)?;
                (f.row_loading, f.col_loading, f.common)
            }
            FitKind::Rmfa => {
                let f = fit_rmfa(&truth.x, &fit_cfg)?;
                (f.row_loading, f.col_loading, f.common)
            }
            FitKind::AlphaPca => {
                let (row, col) = alpha_pca_init(&truth.x, setting.k1, setting.k2)?;
                let scores = estimate_scores(&truth.x, &row, &col)?;
                let common = compose_common(&row, &scores, &col)?;
                (row, col, common)
            }
        };
        let d_r = space_distance(&row.values().view(), &truth.r0.view())?;
        let d_c = space_distance(&col.values().view(), &truth.c0.view())?;
        let mse = common_mse(&common, &truth.s0)?;
        fit_rows.push((method, [d_r, d_c, mse]));
    }

    let mut rank_rows = Vec::with_capacity(spec.rank_methods.len());
    for &method in &spec.rank_methods {
        let est = match method {
            RankKind::RitEr => rit_er(&truth.x, setting.k_max, RANK_MAX_ITERS)?,
            RankKind::IterEr => iter_er(&truth.x, setting.k_max, RANK_MAX_ITERS)?,
        };
        let exact = (est.k1_hat == setting.k1 && est.k2_hat == setting.k2) as u8 as f64;
        let under = (est.k1_hat < setting.k1 || est.k2_hat < setting.k2) as u8 as f64;
        rank_rows.push((method, [exact, under]));
    }

    Ok(RepMetrics {
        fit: fit_rows,
        rank: rank_rows,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs every (setting x method x replication) cell and writes one summary
/// CSV with columns `setting_id,dist,T,p1,p2,method,metric,mean,sd,n_reps`.
///
/// Replication seeds derive from the base seed as
/// `derive_seed(setting_base, [rep])` with
/// `setting_base = derive_seed(base, [setting_index])`, or the setting's own
/// `seed` value when given.
pub fn cmd_simulate(
    spec: &ExperimentSpec,
    out_dir: &Path,
    base_seed: u64,
    threads_flag: Option<usize>,
) -> Result<()> {
    for setting in &spec.settings {
        if setting.k_max + 1 > setting.p1.min(setting.p2) && !spec.rank_methods.is_empty() {
            return Err(CliError::Config(format!(
                "setting `{}`: k_max = {} needs k_max + 1 <= min(p1, p2)",
                setting.id, setting.k_max
            )));
        }
    }
    fs::create_dir_all(out_dir)?;

    let threads = threads_flag.or(spec.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;

    let mut out = String::from("setting_id,dist,T,p1,p2,method,metric,mean,sd,n_reps\n");
    for (s_idx, setting) in spec.settings.iter().enumerate() {
        let setting_base = setting
            .seed
            .unwrap_or_else(|| derive_seed(base_seed, &[s_idx as u64]));
        let reps: Vec<RepMetrics> = pool.install(|| {
            (0..spec.replications)
                .into_par_iter()
                .map(|rep| run_replication(setting, spec, derive_seed(setting_base, &[rep as u64])))
                .collect::<Result<Vec<_>>>()
        })?;

        let prefix = format!(
            "{},{},{},{},{}",
            setting.id, setting.dist, setting.t_len, setting.p1, setting.p2
        );
        for (m_idx, &method) in spec.methods.iter().enumerate() {
            for (metric_idx, metric) in ["D_R", "D_C", "MSE"].iter().enumerate() {
                let values: Vec<f64> = reps.iter().map(|r| r.fit[m_idx].1[metric_idx]).collect();
                let (mean, sd) = mean_sd(&values);
                out.push_str(&format!(
                    "{prefix},{},{metric},{},{},{}\n",
                    method.name(),
                    fmt_f64(mean),
                    fmt_f64(sd),
                    spec.replications
                ));
            }
        }
        for (m_idx, &method) in spec.rank_methods.iter().enumerate() {
            for (metric_idx, metric) in ["rank_exact_freq", "rank_under_freq"].iter().enumerate() {
                let values: Vec<f64> = reps.iter().map(|r| r.rank[m_idx].1[metric_idx]).collect();
                let (mean, sd) = mean_sd(&values);
                out.push_str(&format!(
                    "{prefix},{},{metric},{},{},{}\n",
                    method.name(),
                    fmt_f64(mean),
                    fmt_f64(sd),
                    spec.replications
                ));
            }
        }
    }

    let path = out_dir.join(&spec.output_name);
    fs::write(&path, out)?;
    Ok(())
}

/// Fits one dataset and writes loadings, scores and diagnostics into the
/// output directory.
pub fn cmd_fit(
    input: &Path,
    k1: usize,
    k2: usize,
    method: FitMethod,
    out_dir: &Path,
) -> Result<()> {
    let series = read_series_csv(input)?;
    let fit_cfg = FitConfig::new(k1, k2);
    let fit: FactorFit<f64> = match method {
        FitMethod::Pe => fit_pe(&series, &fit_cfg)?,
        FitMethod::Rmfa => fit_rmfa(&series, &fit_cfg)?,
    };
    fs::create_dir_all(out_dir)?;
    write_matrix_csv(&out_dir.join("row_loading.csv"), fit.row_loading.values())?;
    write_matrix_csv(&out_dir.join("col_loading.csv"), fit.col_loading.values())?;

    let mut scores = String::from("t,i,j,value\n");
    for (t, f) in fit.scores.iter().enumerate() {
        for i in 0..fit.scores.k1() {
            for j in 0..fit.scores.k2() {
                scores.push_str(&format!("{t},{i},{j},{}\n", fmt_f64(f[[i, j]])));
            }
        }
    }
    fs::write(out_dir.join("scores.csv"), scores)?;

    let mut diag = String::from("key,value\n");
    diag.push_str(&format!("method,{}\n", fit.method));
    diag.push_str(&format!("k1,{k1}\n"));
    diag.push_str(&format!("k2,{k2}\n"));
    diag.push_str(&format!("n_iters,{}\n", fit.n_iters));
    diag.push_str(&format!("converged,{}\n", fit.converged));
    diag.push_str(&format!(
        "tau,{}\n",
        fit.tau.map_or_else(String::new, fmt_f64)
    ));
    diag.push_str(&format!("objective,{}\n", fmt_f64(fit.final_objective)));
    fs::write(out_dir.join("diagnostics.csv"), diag)?;
    Ok(())
}

/// Rank selection; prints the estimated pair and the per-iteration ratio
/// traces as CSV on stdout.
pub fn cmd_rank(input: &Path, k_max: usize, robust: bool) -> Result<()> {
    let series = read_series_csv(input)?;
    let est: RankEstimate<f64> = if robust {
        rit_er(&series, k_max, RANK_MAX_ITERS)?
    } else {
        iter_er(&series, k_max, RANK_MAX_ITERS)?
    };
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "k1_hat,k2_hat")?;
    writeln!(w, "{},{}", est.k1_hat, est.k2_hat)?;
    writeln!(w, "side,iter,j,ratio")?;
    for it in 0..est.n_iters {
        for (j, ratio) in est.ratio_trace_r[it].iter().enumerate() {
            writeln!(w, "row,{},{},{}", it + 1, j + 1, fmt_f64(*ratio))?;
        }
        for (j, ratio) in est.ratio_trace_c[it].iter().enumerate() {
            writeln!(w, "col,{},{},{}", it + 1, j + 1, fmt_f64(*ratio))?;
        }
    }
    Ok(())
}

/// Rolling validation; prints one row per evaluation window plus a trailing
/// mean row on stdout.
pub fn cmd_validate(
    input: &Path,
    window_years: usize,
    periods: usize,
    k: usize,
    method: FitMethod,
) -> Result<()> {
    let series: MatrixSeriesF64 = read_series_csv(input)?;
    let stats = rolling_validate(&series, periods, window_years, k, k, method)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "year,mse,rho,v")?;
    for (idx, (&mse, &rho)) in stats.mse_t.iter().zip(stats.rho_t.iter()).enumerate() {
        let v = if idx == 0 {
            String::new()
        } else {
            fmt_f64(stats.v_t[idx - 1])
        };
        writeln!(
            w,
            "{},{},{},{v}",
            stats.window_years + idx,
            fmt_f64(mse),
            fmt_f64(rho)
        )?;
    }
    writeln!(
        w,
        "mean,{},{},{}",
        fmt_f64(stats.mean_mse()),
        fmt_f64(stats.mean_rho()),
        fmt_f64(stats.mean_v())
    )?;
    Ok(())
}
