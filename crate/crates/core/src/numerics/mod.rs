//! Numerical building blocks.

pub mod angular;
mod det;
mod joe_kuo;
pub mod quadrature;
pub mod radial;
pub mod series;
pub mod sobol;
pub mod special;

pub use angular::{AngularModes, RadialGrid};
pub use det::{psd_det, psd_det_in_place};
pub use quadrature::{gauss_legendre, integrate, integrate_gl, integrate_to_inf};
pub use radial::{Domain, RadialMap, RadialWeight};
pub use series::{
    eval_determinantal_series, eval_determinantal_series_multi, pairwise_sum, DeterminantRule,
    SeriesJob, SeriesOptions, SeriesResult,
};
pub use sobol::{sobol_points, Sobol};
pub use special::{bessel_i0, bessel_i0_scaled, bessel_j0, gamma, ln_gamma};
