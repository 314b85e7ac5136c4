//! Independent oracles shared by the integration suites. Everything here is
//! deliberately written along different computational routes than the
//! library: cyclic Jacobi rotations instead of tridiagonal QL, modified
//! Gram-Schmidt instead of Householder reflections, index-formula loops
//! instead of block assignment, dense normal equations instead of the
//! closed-form projection.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

pub fn frob(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues sorted descending with matching eigenvector columns.
pub fn jacobi_eig(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let scale = 1.0 + frob(m);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if off.sqrt() <= 1e-13 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                if a[[p, q]].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[[y, y]].partial_cmp(&a[[x, x]]).unwrap());
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// Modified Gram-Schmidt orthonormalization (column order preserved).
pub fn mgs_orthonormalize(m: &Array2<f64>) -> Array2<f64> {
    let (p, k) = m.dim();
    let mut q = m.clone();
    for j in 0..k {
        for prev in 0..j {
            let dot = (0..p).map(|i| q[[i, prev]] * q[[i, j]]).sum::<f64>();
            for i in 0..p {
                q[[i, j]] -= dot * q[[i, prev]];
            }
        }
        let norm = (0..p).map(|i| q[[i, j]] * q[[i, j]]).sum::<f64>().sqrt();
        for i in 0..p {
            q[[i, j]] /= norm;
        }
    }
    q
}

/// Kronecker product by the index formula, one entry at a time.
pub fn naive_kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (m, n) = a.dim();
    let (p, q) = b.dim();
    let mut out = Array2::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            for r in 0..p {
                for s in 0..q {
                    out[[i * p + r, j * q + s]] = a[[i, j]] * b[[r, s]];
                }
            }
        }
    }
    out
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = a.nrows();
    let mut aug = Array2::zeros((n, n + 1));
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = a[[i, j]];
        }
        aug[[i, n]] = b[i];
    }
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if aug[[r, col]].abs() > aug[[piv, col]].abs() {
                piv = r;
            }
        }
        if piv != col {
            for j in 0..=n {
                let tmp = aug[[col, j]];
                aug[[col, j]] = aug[[piv, j]];
                aug[[piv, j]] = tmp;
            }
        }
        for r in (col + 1)..n {
            let factor = aug[[r, col]] / aug[[col, col]];
            for j in col..=n {
                aug[[r, j]] -= factor * aug[[col, j]];
            }
        }
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut sum = aug[[i, n]];
        for j in (i + 1)..n {
            sum -= aug[[i, j]] * x[j];
        }
        x[i] = sum / aug[[i, i]];
    }
    x
}

/// Column-major vectorization.
pub fn vec_col_major(m: &Array2<f64>) -> Array1<f64> {
    let (rows, cols) = m.dim();
    let mut v = Array1::zeros(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            v[j * rows + i] = m[[i, j]];
        }
    }
    v
}

/// Per-observation least-squares scores via dense normal equations on the
/// vectorized model `vec(X) = (C (x) R) vec(F)`.
pub fn scores_by_normal_equations(
    x: &Array2<f64>,
    r_loading: &Array2<f64>,
    c_loading: &Array2<f64>,
) -> Array2<f64> {
    let k1 = r_loading.ncols();
    let k2 = c_loading.ncols();
    let design = naive_kron(c_loading, r_loading);
    let gram = design.t().dot(&design);
    let rhs = design.t().dot(&vec_col_major(x));
    let sol = gauss_solve(&gram, &rhs);
    let mut f = Array2::zeros((k1, k2));
    for j in 0..k2 {
        for i in 0..k1 {
            f[[i, j]] = sol[j * k1 + i];
        }
    }
    f
}

/// Weighted projected covariance by explicit scalar loops:
/// `(1/(T p2)) sum_t w_t X_t G X_t'` with `G = C C'` also built by loops.
pub fn naive_projected_cov_rows(
    series: &[Array2<f64>],
    c_values: &Array2<f64>,
    weights: &[f64],
) -> Array2<f64> {
    let t_len = series.len();
    let p1 = series[0].nrows();
    let p2 = series[0].ncols();
    let k = c_values.ncols();
    let mut g: Array2<f64> = Array2::zeros((p2, p2));
    for j in 0..p2 {
        for jp in 0..p2 {
            let mut acc = 0.0;
            for a in 0..k {
                acc += c_values[[j, a]] * c_values[[jp, a]];
            }
            g[[j, jp]] = acc;
        }
    }
    let mut m: Array2<f64> = Array2::zeros((p1, p1));
    for (t, x) in series.iter().enumerate() {
        for i in 0..p1 {
            for ip in 0..p1 {
                let mut acc = 0.0;
                for j in 0..p2 {
                    for jp in 0..p2 {
                        acc += x[[i, j]] * g[[j, jp]] * x[[ip, jp]];
                    }
                }
                m[[i, ip]] += weights[t] * acc;
            }
        }
    }
    m.mapv(|v| v / (t_len as f64 * p2 as f64))
}

/// Huber weights by the trace form
/// `tau / sqrt(Tr(X'X) - Tr(X'RR'XCC')/(p1 p2))`.
pub fn trace_form_weights(
    series: &[Array2<f64>],
    r_values: &Array2<f64>,
    c_values: &Array2<f64>,
    tau: f64,
) -> Vec<f64> {
    let p1 = r_values.nrows();
    let p2 = c_values.nrows();
    let rrt = r_values.dot(&r_values.t());
    let cct = c_values.dot(&c_values.t());
    series
        .iter()
        .map(|x| {
            let tr_xx = x.t().dot(x).diag().sum();
            let tr_proj = x.t().dot(&rrt).dot(x).dot(&cct).diag().sum();
            let rad = tr_xx - tr_proj / (p1 as f64 * p2 as f64);
            let resid = rad.max(0.0).sqrt();
            if resid <= tau {
                1.0
            } else {
                tau / resid
            }
        })
        .collect()
}

/// Loadings with entries drawn from a standard normal, normalized onto the
/// identifiability manifold for use as generic valid inputs.
pub fn random_loading(p: usize, k: usize, rng: &mut ChaCha8Rng) -> matfact::LoadingMatrixF64 {
    loop {
        let m = random_matrix(p, k, rng);
        if let Ok(l) = matfact::normalize_loading(&m.view()) {
            return l;
        }
    }
}
