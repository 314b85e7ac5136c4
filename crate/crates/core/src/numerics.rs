//! Dense linear-algebra kernel: top-k eigenpairs of symmetric PSD matrices,
//! Kronecker products, Frobenius inner products, and orthonormalization.
//!
//! The symmetric eigensolver is the classic two-stage route: Householder
//! reduction to tridiagonal form followed by the implicit-shift QL iteration,
//! with determinism enforced at the wrapper (descending eigenvalue order and
//! a fixed column-sign convention), not in the backend.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Max-abs asymmetry tolerated by [`top_k_eig`].
const SYMMETRY_TOL: f64 = 1e-10;

/// Negative eigenvalues in `[-1e-10, 0)` are treated as floating-point noise
/// on PSD input and clamped to zero.
const PSD_CLAMP: f64 = 1e-10;

/// Relative threshold below which a QR diagonal entry flags rank deficiency.
const RANK_TOL: f64 = 1e-10;

/// Leading eigenpairs of a symmetric PSD matrix.
///
/// `values` are sorted descending with small negatives clamped to zero;
/// `vectors` is column-orthonormal with each column's largest-magnitude entry
/// made positive (ties broken by lowest row index).
#[derive(Debug, Clone)]
pub struct EigenPairs<F> {
    pub values: Vec<F>,
    pub vectors: Array2<F>,
}

/// Leading `k` eigenpairs of the symmetric PSD matrix `m`.
///
/// Errors with [`Error::NotSymmetric`] when the max-abs asymmetry exceeds
/// 1e-10 and with [`Error::Dim`] when `k` is zero or exceeds the order of `m`.
pub fn top_k_eig<F: Scalar>(m: &ArrayView2<F>, k: usize) -> Result<EigenPairs<F>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Dim(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Dim(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let sym_tol = F::cast_f64(SYMMETRY_TOL);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[[i, j]] - m[[j, i]]).abs() > sym_tol {
                return Err(Error::NotSymmetric);
            }
        }
    }

    let (mut values, vectors) = sym_eig(m)?;
    let clamp = -F::cast_f64(PSD_CLAMP);
    for v in values.iter_mut() {
        if *v < F::zero() && *v >= clamp {
            *v = F::zero();
        }
    }
    values.truncate(k);
    let mut vectors = vectors.slice(s![.., ..k]).to_owned();
    fix_column_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// No symmetry check, no PSD clamp, no sign convention; callers that need the
/// deterministic contract go through [`top_k_eig`].
pub fn sym_eig<F: Scalar>(m: &ArrayView2<F>) -> Result<(Vec<F>, Array2<F>)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Dim(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 1 {
        return Ok((vec![m[[0, 0]]], Array2::eye(1)));
    }
    let mut z = m.to_owned();
    let mut d = vec![F::zero(); n];
    let mut e = vec![F::zero(); n];
    tridiagonalize(&mut z, &mut d, &mut e);
    tridiag_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<F> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&z.column(src));
    }
    Ok((values, vectors))
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulated transformations (EISPACK `tred2`). On exit `a` holds the
/// orthogonal matrix, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize<F: Scalar>(a: &mut Array2<F>, d: &mut [F], e: &mut [F]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = F::zero();
        if l > 0 {
            let mut scale = F::zero();
            for k in 0..=l {
                scale += a[[i, k]].abs();
            }
            if scale == F::zero() {
                e[i] = a[[i, l]];
            } else {
                for k in 0..=l {
                    a[[i, k]] /= scale;
                    h += a[[i, k]] * a[[i, k]];
                }
                let f = a[[i, l]];
                let g = if f >= F::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[[i, l]] = f - g;
                let mut f_acc = F::zero();
                for j in 0..=l {
                    a[[j, i]] = a[[i, j]] / h;
                    let mut g_acc = F::zero();
                    for k in 0..=j {
                        g_acc += a[[j, k]] * a[[i, k]];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[[k, j]] * a[[i, k]];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[[i, j]];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[[i, j]];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * a[[i, k]];
                        a[[j, k]] -= upd;
                    }
                }
            }
        } else {
            e[i] = a[[i, l]];
        }
        d[i] = h;
    }
    d[0] = F::zero();
    e[0] = F::zero();
    for i in 0..n {
        if d[i] != F::zero() {
            for j in 0..i {
                let mut g = F::zero();
                for k in 0..i {
                    g += a[[i, k]] * a[[k, j]];
                }
                for k in 0..i {
                    a[[k, j]] = a[[k, j]] - g * a[[k, i]];
                }
            }
        }
        d[i] = a[[i, i]];
        a[[i, i]] = F::one();
        for j in 0..i {
            a[[j, i]] = F::zero();
            a[[i, j]] = F::zero();
        }
    }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix (`tql2`),
/// rotating the accumulated transformation matrix `z` alongside.
fn tridiag_ql<F: Scalar>(d: &mut [F], e: &mut [F], z: &mut Array2<F>) -> Result<()> {
    let n = d.len();
    let two = F::cast_f64(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = F::zero();
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= F::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenNoConverge);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(F::one());
            let denom = g + if g >= F::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = F::one();
            let mut c = F::one();
            let mut p = F::zero();
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == F::zero() {
                    d[i + 1] -= p;
                    e[m] = F::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.nrows() {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = F::zero();
        }
    }
    Ok(())
}

/// Make the largest-magnitude entry of each column positive, ties broken by
/// lowest row index.
pub(crate) fn fix_column_signs<F: Scalar>(m: &mut Array2<F>) {
    for mut col in m.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = F::zero();
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < F::zero() {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Kronecker product: entry `((i*p + r), (j*q + s)) = a[i,j] * b[r,s]`.
pub fn kron<F: Scalar>(a: &ArrayView2<F>, b: &ArrayView2<F>) -> Array2<F> {
    let (m, n) = a.dim();
    let (p, q) = b.dim();
    let mut out = Array2::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            let aij = a[[i, j]];
            let mut block = out.slice_mut(s![i * p..(i + 1) * p, j * q..(j + 1) * q]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

/// Frobenius norm.
pub fn frob_norm<F: Scalar>(m: &ArrayView2<F>) -> F {
    m.iter().map(|&x| x * x).sum::<F>().sqrt()
}

/// Frobenius inner product `<a, b> = sum_ij a_ij b_ij`.
pub fn frob_inner<F: Scalar>(a: &ArrayView2<F>, b: &ArrayView2<F>) -> F {
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

/// Column-orthonormal basis of the column space of `m` via Householder QR.
///
/// Column order follows the input. Errors with [`Error::RankDeficient`] when
/// a diagonal entry of the triangular factor falls below `1e-10` times the
/// largest one (the numerical-rank proxy).
pub fn orthonormal_basis<F: Scalar>(m: &ArrayView2<F>) -> Result<Array2<F>> {
    let (p, k) = m.dim();
    if p == 0 || k == 0 || k > p {
        return Err(Error::Dim(format!(
            "cannot orthonormalize a {p}x{k} matrix"
        )));
    }
    let mut a = m.to_owned();
    let mut reflectors: Vec<(Array1<F>, F)> = Vec::with_capacity(k);
    let mut rdiag = vec![F::zero(); k];

    for j in 0..k {
        let x = a.slice(s![j.., j]).to_owned();
        let normx = x.iter().map(|&v| v * v).sum::<F>().sqrt();
        if normx == F::zero() {
            rdiag[j] = F::zero();
            reflectors.push((Array1::zeros(p - j), F::zero()));
            continue;
        }
        let alpha = if x[0] >= F::zero() { -normx } else { normx };
        let mut v = x;
        v[0] -= alpha;
        let vtv = v.iter().map(|&w| w * w).sum::<F>();
        let beta = if vtv > F::zero() {
            F::cast_f64(2.0) / vtv
        } else {
            F::zero()
        };
        for c in j..k {
            let w = v
                .iter()
                .zip(a.slice(s![j.., c]).iter())
                .map(|(&vi, &ai)| vi * ai)
                .sum::<F>();
            let mut col = a.slice_mut(s![j.., c]);
            for (ci, &vi) in col.iter_mut().zip(v.iter()) {
                *ci -= beta * w * vi;
            }
        }
        rdiag[j] = alpha;
        reflectors.push((v, beta));
    }

    let max_diag = rdiag
        .iter()
        .map(|r| r.abs())
        .fold(F::zero(), |acc, v| if v > acc { v } else { acc });
    let rank_tol = F::cast_f64(RANK_TOL) * max_diag;
    if max_diag == F::zero() || rdiag.iter().any(|r| r.abs() < rank_tol) {
        return Err(Error::RankDeficient);
    }

    // Accumulate Q's first k columns by applying the reflectors in reverse.
    let mut q: Array2<F> = Array2::zeros((p, k));
    for i in 0..k {
        q[[i, i]] = F::one();
    }
    for j in (0..k).rev() {
        let (v, beta) = &reflectors[j];
        if *beta == F::zero() {
            continue;
        }
        for c in 0..k {
            let w = v
                .iter()
                .zip(q.slice(s![j.., c]).iter())
                .map(|(&vi, &qi)| vi * qi)
                .sum::<F>();
            let mut col = q.slice_mut(s![j.., c]);
            for (qi, &vi) in col.iter_mut().zip(v.iter()) {
                *qi -= *beta * w * vi;
            }
        }
    }
    Ok(q)
}
