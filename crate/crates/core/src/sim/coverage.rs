use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NeighborIndex, PointPattern, Simulator};
use crate::metrics::{db_to_linear, PathLossModel};
use crate::{Error, Result};

/// Monte Carlo coverage of a user at the window centre served by its
/// nearest base station, Rayleigh fading, no noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRun {
    pub thresholds_db: Vec<f64>,
    pub replications: usize,
    /// Replications that had to be redrawn because the pattern was empty.
    pub resampled: usize,
    /// One SIR sample per replication (infinite with a single station).
    pub sir: Vec<f64>,
    /// P(SIR > T | pattern) per replication and threshold.
    pub conditional: Vec<Vec<f64>>,
    /// Mean of the conditional coverage (Rao–Blackwellised estimate).
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Fraction of SIR samples above each threshold.
    pub empirical: Vec<f64>,
    /// 2.5 %, 50 % and 97.5 % quantiles of the conditional coverage.
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

/// P(SIR > T | pattern) for a user at `user` served by the nearest point:
/// Π_i 1 / (1 + T l(r_i) / l(r_0)). Errors on an empty pattern.
pub fn conditional_coverage(
    pattern: &PointPattern,
    user: [f64; 2],
    pathloss: PathLossModel,
    thresholds_db: &[f64],
) -> Result<Vec<f64>> {
    let gains = gains(pattern, user, pathloss)?;
    Ok(thresholds_db
        .iter()
        .map(|&tdb| {
            let t = db_to_linear(tdb);
            gains
                .1
                .iter()
                .map(|g| 1.0 / (1.0 + t * g / gains.0))
                .product()
        })
        .collect())
}

/// Serving gain and interferer gains.
fn gains(
    pattern: &PointPattern,
    user: [f64; 2],
    pathloss: PathLossModel,
) -> Result<(f64, Vec<f64>)> {
    let index = NeighborIndex::new(&pattern.points, pattern.window);
    let (d0, serving) = index
        .nearest(user, None)
        .ok_or_else(|| Error::invalid("coverage needs at least one base station"))?;
    let inter = pattern
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != serving)
        .map(|(_, p)| pathloss.eval((p[0] - user[0]).hypot(p[1] - user[1])))
        .collect();
    Ok((pathloss.eval(d0), inter))
}

/// SIR with unit-mean exponential fades on every link.
pub fn sir_sample<R: Rng + ?Sized>(
    pattern: &PointPattern,
    user: [f64; 2],
    pathloss: PathLossModel,
    rng: &mut R,
) -> Result<f64> {
    let (g0, inter) = gains(pattern, user, pathloss)?;
    let h0: f64 = rng.sample(Exp1);
    let interference: f64 = inter.iter().map(|g| g * rng.sample::<f64, _>(Exp1)).sum();
    Ok(if interference == 0.0 {
        f64::INFINITY
    } else {
        h0 * g0 / interference
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl CoverageRun {
    pub fn from_samples(
        thresholds_db: Vec<f64>,
        sir: Vec<f64>,
        conditional: Vec<Vec<f64>>,
        resampled: usize,
    ) -> Self {
        let reps = conditional.len();
        let m = thresholds_db.len();
        let mut mean = vec![0.0; m];
        let mut std_error = vec![0.0; m];
        let mut empirical = vec![0.0; m];
        let mut lower = vec![0.0; m];
        let mut median = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for k in 0..m {
            let mut col: Vec<f64> = conditional.iter().map(|c| c[k]).collect();
            let n = col.len().max(1) as f64;
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            mean[k] = mu;
            std_error[k] = (var / n).sqrt();
            let t = db_to_linear(thresholds_db[k]);
            empirical[k] = sir.iter().filter(|&&s| s > t).count() as f64 / sir.len().max(1) as f64;
            col.sort_by(f64::total_cmp);
            lower[k] = quantile(&col, 0.025);
            median[k] = quantile(&col, 0.5);
            upper[k] = quantile(&col, 0.975);
        }
        Self {
            thresholds_db,
            replications: reps,
            resampled,
            sir,
            conditional,
            mean,
            std_error,
            empirical,
            lower,
            median,
            upper,
        }
    }
}

/// Runs all replications of `sim`; empty patterns are redrawn and logged.
pub fn run_coverage(
    sim: &Simulator,
    pathloss: PathLossModel,
    thresholds_db: &[f64],
) -> Result<CoverageRun> {
    pathloss.validate()?;
    let user = sim.window().center();
    let results: Vec<(f64, Vec<f64>, usize)> = (0..sim.config().replications)
        .into_par_iter()
        .map(|rep| {
            let (pattern, mut rng, redraws) = sim.sample_nonempty(rep)?;
            let cond = conditional_coverage(&pattern, user, pathloss, thresholds_db)?;
            let sir = sir_sample(&pattern, user, pathloss, &mut rng)?;
            Ok((sir, cond, redraws))
        })
        .collect::<Result<_>>()?;
    let resampled = results.iter().filter(|r| r.2 > 0).count();
    let (sir, cond): (Vec<f64>, Vec<Vec<f64>>) = results.into_iter().map(|r| (r.0, r.1)).unzip();
    Ok(CoverageRun::from_samples(
        thresholds_db.to_vec(),
        sir,
        cond,
        resampled,
    ))
}

/// Coverage summary over given (non-empty) patterns, without fading samples.
pub fn coverage_from_patterns(
    patterns: &[PointPattern],
    pathloss: PathLossModel,
    thresholds_db: &[f64],
) -> Result<CoverageRun> {
    pathloss.validate()?;
    let cond = patterns
        .par_iter()
        .filter(|p| !p.is_empty())
        .map(|p| conditional_coverage(p, p.window.center(), pathloss, thresholds_db))
        .collect::<Result<Vec<_>>>()?;
    if cond.is_empty() {
        return Err(Error::invalid("all patterns are empty"));
    }
    Ok(CoverageRun::from_samples(
        thresholds_db.to_vec(),
        Vec::new(),
        cond,
        0,
    ))
}
