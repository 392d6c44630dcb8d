use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conditional_coverage, ripley_k, CoverageRun, PointPattern, Simulator};
use crate::metrics::{CurveTable, PathLossModel};
use crate::{Error, Result};

/// Abscissae are considered equal up to this absolute difference.
const GRID_TOL: f64 = 1e-12;

/// Summary statistic used for envelope tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "statistic", rename_all = "snake_case")]
pub enum EnvelopeStatistic {
    /// Translation-corrected Ripley K; envelope = pointwise min/max.
    RipleyK { r_grid: Vec<f64> },
    /// Conditional coverage at the window centre; envelope = 2.5–97.5 % band.
    Coverage {
        pathloss: PathLossModel,
        thresholds_db: Vec<f64>,
    },
}

impl EnvelopeStatistic {
    pub fn abscissa(&self) -> &[f64] {
        match self {
            Self::RipleyK { r_grid } => r_grid,
            Self::Coverage { thresholds_db, .. } => thresholds_db,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RipleyK { .. } => "ripley_k",
            Self::Coverage { .. } => "coverage",
        }
    }

    /// The statistic of one pattern.
    pub fn evaluate(&self, pattern: &PointPattern) -> Result<Vec<f64>> {
        match self {
            Self::RipleyK { r_grid } => ripley_k(pattern, r_grid),
            Self::Coverage {
                pathloss,
                thresholds_db,
            } => conditional_coverage(pattern, pattern.window.center(), *pathloss, thresholds_db),
        }
    }
}

/// Pointwise band built once from simulated curves, checked many times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub statistic: String,
    pub abscissa: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub replications: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub statistic: String,
    pub passed: bool,
    /// Fraction of abscissae where the observed curve leaves the band.
    pub exceedance_fraction: f64,
    pub exceedances: Vec<usize>,
    pub abscissa: Vec<f64>,
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Envelope {
    /// Pointwise minimum and maximum of the curves.
    pub fn min_max(statistic: &str, abscissa: Vec<f64>, curves: &[Vec<f64>]) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::invalid("envelope needs at least one curve"));
        }
        if let Some(c) = curves.iter().find(|c| c.len() != abscissa.len()) {
            return Err(Error::GridMismatch(format!(
                "curve has {} points, grid has {}",
                c.len(),
                abscissa.len()
            )));
        }
        let lower = (0..abscissa.len())
            .map(|k| curves.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min))
            .collect();
        let upper = (0..abscissa.len())
            .map(|k| {
                curves
                    .iter()
                    .map(|c| c[k])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Ok(Self {
            statistic: statistic.to_string(),
            abscissa,
            lower,
            upper,
            replications: curves.len(),
        })
    }

    /// The 2.5–97.5 % band of a coverage run.
    pub fn from_coverage(run: &CoverageRun) -> Self {
        Self {
            statistic: "coverage".into(),
            abscissa: run.thresholds_db.clone(),
            lower: run.lower.clone(),
            upper: run.upper.clone(),
            replications: run.replications,
        }
    }

    /// Builds the envelope of `statistic` over the simulator's replications.
    pub fn simulate(sim: &Simulator, statistic: &EnvelopeStatistic) -> Result<Self> {
        let patterns = sim.patterns()?;
        Self::from_patterns(&patterns, statistic)
    }

    pub fn from_patterns(patterns: &[PointPattern], statistic: &EnvelopeStatistic) -> Result<Self> {
        let curves = patterns
            .par_iter()
            .filter(|p| !p.is_empty())
            .map(|p| statistic.evaluate(p))
            .collect::<Result<Vec<_>>>()?;
        match statistic {
            EnvelopeStatistic::RipleyK { .. } => {
                Self::min_max(statistic.name(), statistic.abscissa().to_vec(), &curves)
            }
            EnvelopeStatistic::Coverage { thresholds_db, .. } => {
                let run = CoverageRun::from_samples(thresholds_db.clone(), Vec::new(), curves, 0);
                Ok(Self::from_coverage(&run))
            }
        }
    }

    /// Compares an observed curve sampled on `abscissa`.
    pub fn check(&self, abscissa: &[f64], observed: &[f64]) -> Result<EnvelopeReport> {
        let same = abscissa.len() == self.abscissa.len()
            && observed.len() == abscissa.len()
            && abscissa
                .iter()
                .zip(&self.abscissa)
                .all(|(a, b)| (a - b).abs() <= GRID_TOL);
        if !same {
            return Err(Error::GridMismatch(format!(
                "observed curve has {} points on a different grid than the {}-point envelope",
                observed.len(),
                self.abscissa.len()
            )));
        }
        let exceedances: Vec<usize> = observed
            .iter()
            .enumerate()
            .filter(|(k, v)| **v < self.lower[*k] || **v > self.upper[*k])
            .map(|(k, _)| k)
            .collect();
        Ok(EnvelopeReport {
            statistic: self.statistic.clone(),
            passed: exceedances.is_empty(),
            exceedance_fraction: exceedances.len() as f64 / observed.len().max(1) as f64,
            exceedances,
            abscissa: abscissa.to_vec(),
            observed: observed.to_vec(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        })
    }

    pub fn check_curve(&self, observed: &CurveTable) -> Result<EnvelopeReport> {
        self.check(&observed.abscissa, &observed.value)
    }

    pub fn check_pattern(
        &self,
        pattern: &PointPattern,
        statistic: &EnvelopeStatistic,
    ) -> Result<EnvelopeReport> {
        self.check(statistic.abscissa(), &statistic.evaluate(pattern)?)
    }
}

/// Simulates the envelope of `statistic` under `sim` and tests `observed`.
pub fn envelope_test(
    observed: &PointPattern,
    sim: &Simulator,
    statistic: &EnvelopeStatistic,
) -> Result<EnvelopeReport> {
    if observed.window != sim.window() {
        log::warn!(
            "observed window {:?} differs from the simulation window",
            observed.window
        );
    }
    Envelope::simulate(sim, statistic)?.check_pattern(observed, statistic)
}
