//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type through [`Scalar`], with `f64` as the intended
//! production type (see the aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// Floating-point scalar usable by the linear-algebra and estimation kernels.
pub trait Scalar:
    Float + NumAssign + Sum + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Conversion from `f64` for tolerances and constants.
    fn cast_f64(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("constant not representable")
    }

    /// Conversion from a size (dimension counts enter many normalizations).
    fn cast_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("dimension not representable")
    }
}

impl<T> Scalar for T where
    T: Float + NumAssign + Sum + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Scalar that the random generators can produce samples of (`f32`, `f64`).
pub trait SampleScalar: Scalar + SampleUniform {
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn sample_chi_squared<R: Rng + ?Sized>(df: Self, rng: &mut R) -> Self;
}

macro_rules! impl_sample_scalar {
    ($($t:ty),*) => {
        $(
            impl SampleScalar for $t {
                fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                    rng.sample(StandardNormal)
                }

                fn sample_chi_squared<R: Rng + ?Sized>(df: Self, rng: &mut R) -> Self {
                    ChiSquared::new(df).expect("positive dof").sample(rng)
                }
            }
        )*
    };
}

impl_sample_scalar!(f32, f64);
