use thiserror::Error;

use crate::metrics::CurveTable;
use crate::numerics::SeriesResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "kernel violates the existence condition: sup of spectral density is {max_spectral} (> 1)"
    )]
    Existence { max_spectral: f64 },

    #[error("{0} kernel has no spectral representation")]
    NoSpectralRepresentation(&'static str),

    #[error("Palm kernel undefined: K(x0, x0) = {0}")]
    DegenerateAnchor(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("series did not converge within {orders} orders (tail bound {tail_bound:.3e})")]
    NonConvergence {
        orders: usize,
        tail_bound: f64,
        partial: Box<SeriesResult>,
    },

    #[error("{points} point(s) of the {} curve did not converge", curve.meta.metric)]
    CurveNonConvergence {
        points: usize,
        curve: Box<CurveTable>,
    },

    #[error("mean interference diverges: {0}")]
    DivergentInterference(String),

    #[error("conditioning event has negligible probability ({0:.3e})")]
    Conditioning(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidParameter(msg.into())
    }

    /// True when the failure is a user-side configuration problem.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Self::InvalidParameter(_)
                | Self::Existence { .. }
                | Self::NoSpectralRepresentation(_)
                | Self::DegenerateAnchor(_)
                | Self::DivergentInterference(_)
                | Self::Conditioning(_)
                | Self::GridMismatch(_)
                | Self::UnknownPreset(_)
                | Self::Config(_)
                | Self::Parse(_)
        )
    }

    /// True for series / curve non-convergence (partial results available).
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Self::NonConvergence { .. } | Self::CurveNonConvergence { .. }
        )
    }
}
