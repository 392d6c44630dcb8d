//! Monte Carlo simulation of base-station patterns and empirical statistics.

mod config;
mod coverage;
mod dpp;
mod envelope;
mod lattice;
mod pattern;
mod stats;

pub use config::{sample_dpp, SimConfig, SimSource, Simulator};
pub use coverage::{
    conditional_coverage, coverage_from_patterns, quantile, run_coverage, sir_sample, CoverageRun,
};
pub use dpp::DppSampler;
pub use envelope::{envelope_test, Envelope, EnvelopeReport, EnvelopeStatistic};
pub use lattice::{hex_cell_radius, hex_intensity, sample_hex_perturbed, sample_poisson};
pub use pattern::{PointPattern, Window};
pub use stats::{
    empirical_esf, empirical_nn, ripley_k, ripley_k_pooled, EstimatorOptions, NeighborIndex,
};
