//! Coverage probability P(SIR > T) of the typical user (nearest-BS
//! association, Rayleigh fading, no noise).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fredholm::coverage_numerators;
use super::interference::{conditional_numerator, sir_outer};
use super::palm::{palm_diag_mass, void_radius};
use super::{CurveKind, CurveTable, PathLossModel};
use crate::numerics::{gauss_legendre, integrate, integrate_to_inf, SeriesOptions};
use crate::{Error, KernelModel, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Nodes whose Hadamard bound e^{-C} is below this contribute nothing.
const NEGLIGIBLE_NODE: f64 = 1e-7;
/// Extrapolated contributions above this mark a curve point unreliable.
const EXTRAPOLATION_FLAG: f64 = 1e-3;

/// How the per-r0 numerators of the coverage integral are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SirMethod {
    /// Series summed as a Fredholm determinant by angular mode decomposition.
    #[default]
    Fredholm,
    /// Truncated determinantal series with QMC integration of every order.
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SirOptions {
    pub method: SirMethod,
    pub series: SeriesOptions,
    /// Gauss–Legendre nodes for the outer r0 integral.
    pub r0_nodes: usize,
    /// The outer integral stops where the Palm void bound falls below this.
    pub void_floor: f64,
}

impl Default for SirOptions {
    fn default() -> Self {
        Self {
            method: SirMethod::default(),
            series: SeriesOptions::default(),
            r0_nodes: 32,
            void_floor: 1e-6,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// T grid in dB from `start:step:stop` (inclusive, tolerant to rounding).
pub fn db_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("bad dB grid {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// ρ(T, β) = T^{2/β} ∫_{T^{-2/β}}^∞ du / (1 + u^{β/2}).
pub fn ppp_rho(t: f64, beta: f64) -> f64 {
    if (beta - 4.0).abs() < 1e-15 {
        let s = t.sqrt();
        return s * (std::f64::consts::FRAC_PI_2 - (1.0 / s).atan());
    }
    let d = 2.0 / beta;
    t.powf(d)
        * integrate_to_inf(
            |u| 1.0 / (1.0 + u.powf(beta / 2.0)),
            t.powf(-d),
            1e-15,
            1e-12,
        )
}

/// Coverage of a Poisson network, 1/(1 + ρ(T, β)); independent of λ.
pub fn ppp_coverage(t: f64, beta: f64) -> f64 {
    1.0 / (1.0 + ppp_rho(t, beta))
}

fn check_inputs(pathloss: &PathLossModel, t_grid_db: &[f64]) -> Result<()> {
    pathloss.validate()?;
    if t_grid_db.is_empty() || t_grid_db.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(
            "threshold grid must be non-empty and finite",
        ));
    }
    Ok(())
}

/// C_T(r0) = ∫ K^!_{x0}(x, x) w_T(x) dx with w_T = 1 on B(0, r0) and the
/// coverage weight outside: the exponent of the Hadamard bound.
fn hadamard_exponent(model: &KernelModel, pathloss: PathLossModel, t: f64, r0: f64) -> f64 {
    let g = sir_outer(pathloss, t, r0);
    palm_diag_mass(model, r0, 0.0, r0, |_| 1.0)
        + palm_diag_mass(model, r0, r0, f64::INFINITY, |r| g(r))
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Negligible,
    Converged { value: f64, bound: f64 },
    Failed { partial: f64, bound: f64 },
}

/// Exact coverage probability, integrated over the nearest-BS distance r0
/// with Gauss–Legendre nodes; the numerator at each node is evaluated as
/// selected by [`SirMethod`].
///
/// Each node uses the Hadamard bound N ≤ e^{-C}: negligible nodes are
/// skipped, values are clamped to [0, e^{-C}], and nodes that fail (series
/// not converged within `n_max` orders, or a non-positive Fredholm
/// factorisation) take the ratio N/e^{-C} of the nearest good node (flagged
/// in the curve meta).
pub fn sir_ccdf(
    model: &KernelModel,
    pathloss: PathLossModel,
    t_grid_db: &[f64],
    opts: &SirOptions,
) -> Result<CurveTable> {
    check_inputs(&pathloss, t_grid_db)?;
    opts.series.validate()?;
    if opts.r0_nodes == 0 || !(opts.void_floor > 0.0 && opts.void_floor < 1.0) {
        return Err(Error::Config(
            "r0_nodes must be positive and void_floor in (0, 1)".into(),
        ));
    }
    let lambda = model.lambda();
    let r_star = void_radius(model, -opts.void_floor.ln());
    let (x, w) = gauss_legendre(opts.r0_nodes);
    let nodes: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| (0.5 * r_star * (xi + 1.0), 0.5 * r_star * wi))
        .collect();
    let ts: Vec<f64> = t_grid_db.iter().map(|&tdb| db_to_linear(tdb)).collect();
    let evaluated: Vec<Node> = match opts.method {
        SirMethod::Series => series_nodes(model, pathloss, &ts, &nodes, &opts.series)?,
        SirMethod::Fredholm => fredholm_nodes(model, pathloss, &ts, &nodes)?,
    };

    let mut raw = Vec::with_capacity(t_grid_db.len());
    let mut notes = Vec::new();
    let mut flagged = Vec::new();
    for (ti, &tdb) in t_grid_db.iter().enumerate() {
        let row = &evaluated[ti * nodes.len()..(ti + 1) * nodes.len()];
        let mut total = 0.0;
        let mut extrapolated = 0.0;
        let mut failed = 0;
        for (ni, node) in row.iter().enumerate() {
            let (r0, wq) = nodes[ni];
            let jac = wq * TWO_PI * lambda * r0;
            let v = match *node {
                Node::Negligible => 0.0,
                Node::Converged { value, .. } => value,
                Node::Failed { bound, partial } => {
                    failed += 1;
                    let ratio = nearest_ratio(row, ni).unwrap_or(1.0);
                    let v = ratio * bound;
                    log::debug!(
                        "T = {tdb} dB, r0 = {r0:.4}: partial {partial:.4e} replaced by {v:.4e}"
                    );
                    extrapolated += jac * v;
                    v
                }
            };
            total += jac * v;
        }
        if failed > 0 {
            notes.push(format!(
                "T = {tdb} dB: {failed} r0 node(s) extrapolated from neighbouring ratios (weight {extrapolated:.3e})"
            ));
            if extrapolated > EXTRAPOLATION_FLAG {
                flagged.push(ti);
            }
        }
        raw.push(total);
    }
    let mut curve = CurveTable::new("sir_ccdf", "t_db", t_grid_db.to_vec(), raw, CurveKind::Ccdf)?
        .with_model(model.spec())
        .with_series(&opts.series);
    curve.meta.notes.extend(notes);
    for ti in flagged {
        curve.flag(
            ti,
            format!("T = {} dB relies on extrapolated nodes", t_grid_db[ti]),
        );
    }
    Ok(curve)
}

/// Node values laid out threshold-major (index ti * nodes + ni).
fn series_nodes(
    model: &KernelModel,
    pathloss: PathLossModel,
    ts: &[f64],
    nodes: &[(f64, f64)],
    series: &SeriesOptions,
) -> Result<Vec<Node>> {
    let tasks: Vec<(usize, usize)> = (0..ts.len())
        .flat_map(|ti| (0..nodes.len()).map(move |ni| (ti, ni)))
        .collect();
    tasks
        .par_iter()
        .map(|&(ti, ni)| {
            let (t, r0) = (ts[ti], nodes[ni].0);
            let bound = (-hadamard_exponent(model, pathloss, t, r0)).exp();
            if bound < NEGLIGIBLE_NODE {
                return Ok(Node::Negligible);
            }
            match conditional_numerator(model, pathloss, t, r0, series) {
                Ok((res, far)) => Ok(Node::Converged {
                    value: (res.value * far).clamp(0.0, bound),
                    bound,
                }),
                Err(Error::NonConvergence { partial, .. }) => Ok(Node::Failed {
                    partial: partial.value,
                    bound,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn fredholm_nodes(
    model: &KernelModel,
    pathloss: PathLossModel,
    ts: &[f64],
    nodes: &[(f64, f64)],
) -> Result<Vec<Node>> {
    let per_node: Vec<Vec<Node>> = nodes
        .par_iter()
        .map(|&(r0, _)| {
            let bounds: Vec<f64> = ts
                .iter()
                .map(|&t| (-hadamard_exponent(model, pathloss, t, r0)).exp())
                .collect();
            let active: Vec<bool> = bounds.iter().map(|b| *b >= NEGLIGIBLE_NODE).collect();
            match coverage_numerators(model, pathloss, ts, &active, r0) {
                Ok(values) => Ok(values
                    .into_iter()
                    .zip(&bounds)
                    .map(|(v, &bound)| match v {
                        None => Node::Negligible,
                        Some(v) => Node::Converged {
                            value: v.clamp(0.0, bound),
                            bound,
                        },
                    })
                    .collect()),
                Err(Error::Numeric(msg)) => {
                    log::warn!("r0 = {r0:.4}: {msg}");
                    Ok(bounds
                        .iter()
                        .zip(&active)
                        .map(|(&bound, &a)| {
                            if a {
                                Node::Failed {
                                    partial: f64::NAN,
                                    bound,
                                }
                            } else {
                                Node::Negligible
                            }
                        })
                        .collect())
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok((0..ts.len())
        .flat_map(|ti| per_node.iter().map(move |row| row[ti]))
        .collect())
}

/// N/e^{-C} at the converged node nearest to `ni`.
fn nearest_ratio(row: &[Node], ni: usize) -> Option<f64> {
    (1..row.len()).find_map(|d| {
        [ni.checked_sub(d), Some(ni + d)]
            .into_iter()
            .flatten()
            .filter_map(|j| match row.get(j) {
                Some(Node::Converged { value, bound }) if *bound > 0.0 => Some(value / bound),
                _ => None,
            })
            .next()
    })
}

/// Diagonal approximation: every Gram determinant replaced by the product of
/// its diagonal, giving ∫ 2πλ r0 exp(−C_T(r0)) dr0. Exact for Poisson and an
/// upper bound on the exact coverage for any DPP.
pub fn sir_ccdf_diag_approx(
    model: &KernelModel,
    pathloss: PathLossModel,
    t_grid_db: &[f64],
) -> Result<CurveTable> {
    check_inputs(&pathloss, t_grid_db)?;
    let lambda = model.lambda();
    let r_star = void_radius(model, 25.0);
    let raw: Vec<f64> = t_grid_db
        .par_iter()
        .map(|&tdb| {
            let t = db_to_linear(tdb);
            let f = |r0: f64| {
                if r0 == 0.0 {
                    return 0.0;
                }
                TWO_PI * lambda * r0 * (-hadamard_exponent(model, pathloss, t, r0)).exp()
            };
            let pieces = 8;
            (0..pieces)
                .map(|k| {
                    let a = r_star * k as f64 / pieces as f64;
                    let b = r_star * (k + 1) as f64 / pieces as f64;
                    integrate(f, a, b, 1e-12, 1e-9)
                })
                .sum()
        })
        .collect();
    Ok(CurveTable::new(
        "sir_ccdf_diag_approx",
        "t_db",
        t_grid_db.to_vec(),
        raw,
        CurveKind::Ccdf,
    )?
    .with_model(model.spec()))
}
