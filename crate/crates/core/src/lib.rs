//! Determinantal point process (DPP) models of cellular base-station layouts.
//!
//! The crate is organised in layers:
//!
//! * [`kernel`] — stationary covariance kernels (Gauss, Cauchy, generalized
//!   Gamma, plus a Poisson reference), spectral densities, existence checks,
//!   Palm kernels and the repulsiveness coefficient.
//! * [`numerics`] — Sobol sequences, robust PSD determinants, Bessel/Gamma
//!   functions, quadrature and the QMC evaluator for alternating
//!   determinantal series.
//! * [`metrics`] — empty-space / nearest-neighbour functions, interference
//!   moments, Laplace transforms and SIR coverage.
//! * [`sim`] — spectral DPP sampling, perturbed hexagonal grids, Monte-Carlo
//!   coverage, empirical summary statistics and envelope tests.
//! * [`data`] — CSV point patterns, named presets and curve/manifest output.
//!
//! The kernel layer and the numeric primitives are generic over the
//! floating-point type; the aliases below fix the common choices.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_clamp, clippy::needless_range_loop)]

pub mod data;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod numerics;
pub mod sim;

pub use error::{Error, Result};

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point types the generic layers are written against.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Widening conversion to `f64`.
    #[inline]
    fn f(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type KernelModel = kernel::KernelModel<f64>;
pub type KernelModel32 = kernel::KernelModel<f32>;
pub type PalmKernel = kernel::PalmKernel<f64>;
pub type PalmKernel32 = kernel::PalmKernel<f32>;
pub type ExistenceReport = kernel::ExistenceReport<f64>;
