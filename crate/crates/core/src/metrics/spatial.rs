//! Empty-space, nearest-neighbour and K functions of a stationary model.

use rayon::prelude::*;

use super::palm::{anchored_rule, base_rule, palm_rule};
use super::{CurveKind, CurveTable};
use crate::kernel::Family;
use crate::numerics::{
    eval_determinantal_series, integrate, DeterminantRule, RadialWeight, SeriesJob, SeriesOptions,
    SeriesResult,
};
use crate::{Error, KernelModel, Result};

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::invalid(
            "radius grid must be non-empty and non-negative",
        ));
    }
    Ok(())
}

/// Void probability of B(0, r) under `rule`; `Ok(Err(partial))` on non-convergence.
pub(crate) fn void_series(
    rule: &DeterminantRule,
    r: f64,
    opts: &SeriesOptions,
) -> Result<Result<SeriesResult, SeriesResult>> {
    if r == 0.0 {
        return Ok(Ok(SeriesResult {
            value: 1.0,
            orders_used: 0,
            tail_bound: 0.0,
            per_order_terms: vec![1.0],
            hadamard_constant: 0.0,
            qmc_points: opts.qmc_points,
        }));
    }
    let job = SeriesJob {
        rule: rule.clone(),
        weight: RadialWeight::disk(r)?,
        leading: None,
        options: *opts,
    };
    match eval_determinantal_series(&job) {
        Ok(res) => Ok(Ok(res)),
        Err(Error::NonConvergence { partial, .. }) => Ok(Err(*partial)),
        Err(e) => Err(e),
    }
}

/// Build a CDF curve 1 − void(r); non-converged points keep their partial value.
fn void_cdf(
    metric: &str,
    model: &KernelModel,
    rule: &DeterminantRule,
    r_grid: &[f64],
    opts: &SeriesOptions,
) -> Result<CurveTable> {
    check_grid(r_grid)?;
    opts.validate()?;
    let results: Vec<_> = r_grid
        .par_iter()
        .map(|&r| void_series(rule, r, opts))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = results
        .iter()
        .map(|res| 1.0 - res.as_ref().map_or_else(|p| p.value, |v| v.value))
        .collect();
    let mut curve = CurveTable::new(metric, "r_km", r_grid.to_vec(), raw, CurveKind::Cdf)?
        .with_model(model.spec())
        .with_series(opts);
    let mut failed = 0;
    for (i, res) in results.iter().enumerate() {
        if let Err(p) = res {
            failed += 1;
            curve.flag(
                i,
                format!(
                    "r = {}: series not converged at order {} (tail bound {:.3e})",
                    r_grid[i], p.orders_used, p.tail_bound
                ),
            );
        }
    }
    if failed > 0 {
        return Err(Error::CurveNonConvergence {
            points: failed,
            curve: Box::new(curve),
        });
    }
    Ok(curve)
}

/// Empty-space function F(r) = 1 − P(no point in B(0, r)).
pub fn empty_space_fn(
    model: &KernelModel,
    r_grid: &[f64],
    opts: &SeriesOptions,
) -> Result<CurveTable> {
    void_cdf("empty_space", model, &base_rule(model), r_grid, opts)
}

/// Nearest-neighbour distance CDF D(r), via the Palm kernel at the origin.
pub fn nearest_neighbor_fn(
    model: &KernelModel,
    r_grid: &[f64],
    opts: &SeriesOptions,
) -> Result<CurveTable> {
    let rule = palm_rule(model, [0.0, 0.0])?;
    void_cdf("nearest_neighbor", model, &rule, r_grid, opts)
}

/// Density f(r) = F'(r) of the contact distance.
pub fn esf_density(model: &KernelModel, r: f64, opts: &SeriesOptions) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("esf_density needs r > 0, got {r}")));
    }
    let job = SeriesJob {
        rule: anchored_rule(model, [r, 0.0]),
        weight: RadialWeight::disk(r)?,
        leading: None,
        options: *opts,
    };
    let res = eval_determinantal_series(&job)?;
    Ok(std::f64::consts::TAU * r * res.value)
}

/// Analytic Ripley K: πr² − (2π/λ²) ∫₀^r t K0(t)² dt (πr² for Poisson).
pub fn ripley_k_analytic(model: &KernelModel, r_grid: &[f64]) -> Result<CurveTable> {
    check_grid(r_grid)?;
    let lambda = model.lambda();
    let values: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let pi_r2 = std::f64::consts::PI * r * r;
            if model.family() == Family::Poisson || r == 0.0 {
                return pi_r2;
            }
            let deficit = integrate(
                |t| {
                    let k = model.radial(t);
                    t * k * k
                },
                0.0,
                r,
                1e-15,
                1e-12,
            );
            pi_r2 - std::f64::consts::TAU / (lambda * lambda) * deficit
        })
        .collect();
    Ok(CurveTable::new(
        "ripley_k",
        "r_km",
        r_grid.to_vec(),
        values,
        CurveKind::Plain,
    )?
    .with_model(model.spec()))
}
