//! Analytic performance metrics of DPP-modelled networks.

mod coverage;
mod curve;
mod fredholm;
mod interference;
mod palm;
mod pathloss;
mod spatial;

pub use coverage::{
    db_grid, db_to_linear, ppp_coverage, ppp_rho, sir_ccdf, sir_ccdf_diag_approx, SirMethod,
    SirOptions,
};
pub use curve::{isotonic_increasing, CurveKind, CurveMeta, CurveTable, RAW_DEVIATION_LIMIT};
pub use fredholm::{
    fredholm_void, laplace_interference_fredholm, mean_interference_nearest_fredholm,
};
pub use interference::{
    interference_deficit, laplace_interference, laplace_interference_curve,
    mean_interference_fixed, mean_interference_fixed_gauss, mean_interference_fixed_quadrature,
    mean_interference_nearest, sir_ccdf_conditional,
};
pub use pathloss::{Association, InterferenceQuery, PathLossKind, PathLossModel};
pub use spatial::{empty_space_fn, esf_density, nearest_neighbor_fn, ripley_k_analytic};
