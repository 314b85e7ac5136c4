//! Synthetic data generation: uniform loadings, AR(1) matrix factors, AR(1)
//! idiosyncratic errors with matrix-normal or matrix-variate-t innovations.
//!
//! All draws come from a single seeded ChaCha8 stream in a fixed order:
//! row loadings (row-major), column loadings (row-major), factors
//! (initial state then one innovation per step, column-major within each
//! matrix), errors (same layout, with the chi-square mixer drawn after the
//! normal block for t innovations). A configuration is therefore
//! bit-reproducible across runs and platforms.

use ndarray::Array2;
use rand::distr::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::scalar::{SampleScalar, Scalar};
use crate::series::{FactorScores, MatrixSeries};

/// Distribution of the error innovations `U_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorDist {
    /// `U_t ~ MN(0, U_E, V_E)`, i.e. `Vec(U_t) ~ N(0, V_E (x) U_E)`.
    MatrixNormal,
    /// Matrix-variate t with `nu` degrees of freedom: a matrix-normal draw
    /// inflated by a per-observation chi-square mixer,
    /// `U_t = MN(0, U_E, V_E) * sqrt(nu / chi2_nu)`, so every entry is a
    /// classic t with `nu` degrees of freedom (variance `nu/(nu-2)`) and
    /// whole matrices become outliers together.
    MatrixT { nu: u32 },
}

impl std::fmt::Display for ErrorDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorDist::MatrixNormal => write!(f, "normal"),
            ErrorDist::MatrixT { nu } => write!(f, "t{nu}"),
        }
    }
}

/// Full specification of a synthetic experiment.
///
/// `U_E` and `V_E` are constructed internally with unit diagonals and
/// off-diagonal entries `1/p1` and `1/p2` respectively. `noise_free` is a
/// diagnostic switch that zeroes the error term.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig<F> {
    pub p1: usize,
    pub p2: usize,
    pub t_len: usize,
    pub k1: usize,
    pub k2: usize,
    pub phi: F,
    pub psi: F,
    pub dist: ErrorDist,
    pub seed: u64,
    pub burn_in: usize,
    pub noise_free: bool,
}

impl<F: Scalar> DgpConfig<F> {
    pub fn new(p1: usize, p2: usize, t_len: usize, k1: usize, k2: usize, seed: u64) -> Self {
        Self {
            p1,
            p2,
            t_len,
            k1,
            k2,
            phi: F::zero(),
            psi: F::zero(),
            dist: ErrorDist::MatrixNormal,
            seed,
            burn_in: 50,
            noise_free: false,
        }
    }

    pub fn with_ar(mut self, phi: F, psi: F) -> Self {
        self.phi = phi;
        self.psi = psi;
        self
    }

    pub fn with_dist(mut self, dist: ErrorDist) -> Self {
        self.dist = dist;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn noise_free(mut self) -> Self {
        self.noise_free = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1 == 0 || self.p2 == 0 || self.t_len == 0 || self.k1 == 0 || self.k2 == 0 {
            return Err(Error::Config("all dimensions must be positive".into()));
        }
        if self.k1 > self.p1 || self.k2 > self.p2 {
            return Err(Error::Config(format!(
                "factor numbers ({}, {}) exceed panel dimensions ({}, {})",
                self.k1, self.k2, self.p1, self.p2
            )));
        }
        if self.phi.abs() >= F::one() || self.psi.abs() >= F::one() {
            return Err(Error::Config("|phi| and |psi| must be below 1".into()));
        }
        if let ErrorDist::MatrixT { nu } = self.dist {
            if nu < 3 {
                return Err(Error::Config(format!("nu = {nu} must be at least 3")));
            }
        }
        Ok(())
    }
}

/// Ground truth for one synthetic dataset. `x[t] = s0[t] + errors[t]`
/// entry-exactly; `s0[t] = r0 * f0[t] * c0'`.
#[derive(Debug, Clone)]
pub struct GroundTruth<F> {
    pub r0: Array2<F>,
    pub c0: Array2<F>,
    pub f0: FactorScores<F>,
    pub s0: MatrixSeries<F>,
    pub x: MatrixSeries<F>,
    pub errors: MatrixSeries<F>,
}

/// SplitMix64-style mixer used to derive replication seeds from a base seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &p in parts {
        state = splitmix64(state ^ p);
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Loading matrix with i.i.d. Uniform(-1, 1) entries drawn row-major.
/// Deliberately not normalized: the truth need not satisfy identifiability,
/// and the evaluation metric is basis-free.
pub fn gen_loadings<F, R>(p: usize, k: usize, rng: &mut R) -> Array2<F>
where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    let uniform = Uniform::new(-F::one(), F::one()).expect("valid uniform range");
    Array2::from_shape_fn((p, k), |_| uniform.sample(rng))
}

/// AR(1) factor scores: `Vec(F_t) = phi Vec(F_{t-1}) + sqrt(1-phi^2) eps_t`
/// with standard-normal innovations, started from a stationary draw and
/// burned in for `cfg.burn_in` steps.
pub fn gen_factors<F, R>(cfg: &DgpConfig<F>, rng: &mut R) -> FactorScores<F>
where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    let innov_scale = (F::one() - cfg.phi * cfg.phi).sqrt();
    let mut state = draw_standard_normal(cfg.k1, cfg.k2, rng);
    for _ in 0..cfg.burn_in {
        ar_step(&mut state, cfg.phi, innov_scale, rng);
    }
    let mut out = Vec::with_capacity(cfg.t_len);
    for _ in 0..cfg.t_len {
        ar_step(&mut state, cfg.phi, innov_scale, rng);
        out.push(state.clone());
    }
    FactorScores::new(out).expect("generated factors are valid")
}

/// AR(1) idiosyncratic errors:
/// `Vec(E_t) = psi Vec(E_{t-1}) + sqrt(1-psi^2) Vec(U_t)` with innovations
/// from the configured matrix distribution, started at one innovation draw
/// and burned in.
pub fn gen_errors<F, R>(cfg: &DgpConfig<F>, rng: &mut R) -> Result<MatrixSeries<F>>
where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    let sampler = InnovationSampler::new(cfg)?;
    let innov_scale = (F::one() - cfg.psi * cfg.psi).sqrt();
    let mut state = sampler.draw(rng);
    for _ in 0..cfg.burn_in {
        error_step(&mut state, cfg.psi, innov_scale, &sampler, rng);
    }
    let mut out = Vec::with_capacity(cfg.t_len);
    for _ in 0..cfg.t_len {
        error_step(&mut state, cfg.psi, innov_scale, &sampler, rng);
        out.push(state.clone());
    }
    MatrixSeries::new(out)
}

/// Assembles a full dataset from one seeded stream: loadings, then factors,
/// then errors; `X_t = R0 F_t C0' + E_t`.
pub fn gen_dataset<F>(cfg: &DgpConfig<F>) -> Result<GroundTruth<F>>
where
    F: SampleScalar,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r0: Array2<F> = gen_loadings(cfg.p1, cfg.k1, &mut rng);
    let c0: Array2<F> = gen_loadings(cfg.p2, cfg.k2, &mut rng);
    let f0 = gen_factors(cfg, &mut rng);
    let errors = if cfg.noise_free {
        MatrixSeries::new(vec![Array2::zeros((cfg.p1, cfg.p2)); cfg.t_len])?
    } else {
        gen_errors(cfg, &mut rng)?
    };
    let s0_data: Vec<Array2<F>> = f0
        .iter()
        .map(|f| r0.dot(f).dot(&c0.t()))
        .collect();
    let x_data: Vec<Array2<F>> = s0_data
        .iter()
        .zip(errors.iter())
        .map(|(s, e)| s + e)
        .collect();
    Ok(GroundTruth {
        r0,
        c0,
        f0,
        s0: MatrixSeries::new(s0_data)?,
        x: MatrixSeries::new(x_data)?,
        errors,
    })
}

fn draw_standard_normal<F, R>(rows: usize, cols: usize, rng: &mut R) -> Array2<F>
where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    // column-major draw order to match the Vec(.) convention
    let mut m = Array2::zeros((rows, cols));
    for j in 0..cols {
        for i in 0..rows {
            m[[i, j]] = F::sample_standard_normal(rng);
        }
    }
    m
}

fn ar_step<F, R>(state: &mut Array2<F>, coef: F, innov_scale: F, rng: &mut R)
where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    let innov = draw_standard_normal(state.nrows(), state.ncols(), rng);
    state.zip_mut_with(&innov, |s, &e| *s = coef * *s + innov_scale * e);
}

fn error_step<F, R>(
    state: &mut Array2<F>,
    coef: F,
    innov_scale: F,
    sampler: &InnovationSampler<F>,
    rng: &mut R,
) where
    F: SampleScalar,
    R: Rng + ?Sized,
{
    let innov = sampler.draw(rng);
    state.zip_mut_with(&innov, |s, &u| *s = coef * *s + innov_scale * u);
}

/// Precomputed factors for drawing `U_t`.
struct InnovationSampler<F> {
    dist: ErrorDist,
    p1: usize,
    p2: usize,
    /// Cholesky factor of `U_E` (matrix-normal row mixing).
    chol_u: Array2<F>,
    /// Cholesky factor of `V_E` (column mixing).
    chol_v: Array2<F>,
}

impl<F: SampleScalar> InnovationSampler<F> {
    fn new(cfg: &DgpConfig<F>) -> Result<Self> {
        let u_e = equicorrelation(cfg.p1);
        let v_e = equicorrelation(cfg.p2);
        let chol_u = cholesky_lower(&u_e)?;
        let chol_v = cholesky_lower(&v_e)?;
        Ok(Self {
            dist: cfg.dist,
            p1: cfg.p1,
            p2: cfg.p2,
            chol_u,
            chol_v,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Array2<F> {
        match self.dist {
            ErrorDist::MatrixNormal => {
                let z = draw_standard_normal(self.p1, self.p2, rng);
                self.chol_u.dot(&z).dot(&self.chol_v.t())
            }
            ErrorDist::MatrixT { nu } => {
                let z = draw_standard_normal(self.p1, self.p2, rng);
                let chi = F::sample_chi_squared(F::cast_usize(nu as usize), rng);
                let scale = (F::cast_usize(nu as usize) / chi).sqrt();
                self.chol_u.dot(&z).dot(&self.chol_v.t()).mapv(|v| v * scale)
            }
        }
    }
}

/// `p x p` matrix with unit diagonal and off-diagonal entries `1/p`.
fn equicorrelation<F: Scalar>(p: usize) -> Array2<F> {
    let off = F::one() / F::cast_usize(p);
    Array2::from_shape_fn((p, p), |(i, j)| if i == j { F::one() } else { off })
}


/// Lower Cholesky factor; [`Error::CovNotPd`] on a non-positive pivot.
fn cholesky_lower<F: Scalar>(m: &Array2<F>) -> Result<Array2<F>> {
    let n = m.nrows();
    let mut l: Array2<F> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= F::zero() {
                    return Err(Error::CovNotPd);
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}
