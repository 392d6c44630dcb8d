//! Interference moments and Laplace transforms at the typical user.

use std::sync::Arc;

use super::palm::{palm_rule, ring_sq, ring_sq_numeric, QUAD_REL};
use super::spatial::void_series;
use super::{Association, InterferenceQuery, PathLossKind};
use crate::kernel::Family;
use crate::numerics::{
    bessel_i0_scaled, eval_determinantal_series, eval_determinantal_series_multi, integrate,
    integrate_to_inf, Domain, RadialWeight, SeriesJob, SeriesOptions, SeriesResult,
};
use crate::{Error, KernelModel, Result};

const TWO_PI: f64 = std::f64::consts::TAU;
/// Below this the conditioning (void) probability is treated as degenerate.
const MIN_CONDITIONING: f64 = 1e-12;
const MAX_CUT: f64 = 1e4;

/// ∫₀^∞ f(r) dr split at the given interior points.
fn radial_integral(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b.is_finite()));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(&f, w[0], w[1], 1e-15, QUAD_REL);
    }
    total + integrate_to_inf(&f, *edges.last().expect("non-empty"), 1e-15, QUAD_REL)
}

fn breaks(q: &InterferenceQuery) -> Vec<f64> {
    let a = q.model.alpha();
    vec![1.0, q.r0 - 5.0 * a, q.r0, q.r0 + 5.0 * a]
}

fn fixed_preconditions(q: &InterferenceQuery) -> Result<()> {
    q.expect(Association::FixedBs)?;
    if q.pathloss.kind == PathLossKind::PurePower {
        return Err(Error::DivergentInterference(
            "pure power-law path loss is not integrable at the origin for a fixed tagged BS".into(),
        ));
    }
    Ok(())
}

/// Reduction (P/λ) ∫ K0(x − x0)² l(x) dx of the mean interference relative to
/// a Poisson network of equal intensity, with x0 = (r0, 0).
pub fn interference_deficit(q: &InterferenceQuery) -> Result<f64> {
    fixed_preconditions(q)?;
    Ok(deficit_with(q, ring_sq))
}

fn deficit_with(q: &InterferenceQuery, ring: fn(&KernelModel, f64, f64) -> f64) -> f64 {
    if q.model.family() == Family::Poisson {
        return 0.0;
    }
    let lambda = q.model.lambda();
    let pl = q.pathloss;
    q.power / lambda * radial_integral(|r| pl.eval(r) * r * ring(&q.model, r, q.r0), &breaks(q))
}

/// Mean interference with a fixed tagged BS at distance r0 (which is excluded
/// from the sum). Uses the Bessel closed form for the Gauss family and radial
/// quadrature otherwise.
pub fn mean_interference_fixed(q: &InterferenceQuery) -> Result<f64> {
    if q.model.family() == Family::Gauss {
        mean_interference_fixed_gauss(q)
    } else {
        mean_interference_fixed_quadrature(q)
    }
}

/// General path: P[λ ∫ l − (1/λ) ∫ K0(x − x0)² l(x) dx] with the angular
/// integral done numerically for every family.
pub fn mean_interference_fixed_quadrature(q: &InterferenceQuery) -> Result<f64> {
    fixed_preconditions(q)?;
    let poisson = q.power * q.model.lambda() * q.pathloss.total_mass();
    Ok(poisson - deficit_with(q, ring_sq_numeric))
}

/// Gauss closed form
/// E[I] = Pπλβ/(β−2) − 2Pπλ e^{−2r0²/α²}(A1 + A2),
/// A1 = ∫₀¹ e^{−2r²/α²} I0(4rr0/α²) r dr, A2 = ∫₁^∞ e^{−2r²/α²} I0(4rr0/α²) r^{1−β} dr.
pub fn mean_interference_fixed_gauss(q: &InterferenceQuery) -> Result<f64> {
    fixed_preconditions(q)?;
    if q.model.family() != Family::Gauss {
        return Err(Error::invalid(
            "closed form applies to the Gauss family only",
        ));
    }
    let (lambda, a2, r0, beta) = (
        q.model.lambda(),
        q.model.alpha().powi(2),
        q.r0,
        q.pathloss.beta,
    );
    // e^{-2r0²/α²} e^{-2r²/α²} I0(4rr0/α²) = e^{-2(r-r0)²/α²} · [e^{-z} I0(z)]
    let g = |r: f64| (-2.0 * (r - r0).powi(2) / a2).exp() * bessel_i0_scaled(4.0 * r * r0 / a2);
    let a = a2.sqrt();
    let inner: Vec<f64> = [r0 - 5.0 * a, r0, r0 + 5.0 * a]
        .into_iter()
        .filter(|&b| b > 0.0 && b < 1.0)
        .collect();
    let mut e = vec![0.0];
    e.extend(inner);
    e.push(1.0);
    let a1: f64 = e
        .windows(2)
        .map(|w| integrate(|r| g(r) * r, w[0], w[1], 1e-15, QUAD_REL))
        .sum();
    let outer: Vec<f64> = [r0 - 5.0 * a, r0, r0 + 5.0 * a]
        .into_iter()
        .filter(|&b| b > 1.0)
        .collect();
    let mut e = vec![1.0];
    e.extend(outer);
    let f2 = |r: f64| g(r) * r.powf(1.0 - beta);
    let mut a2_int: f64 = e
        .windows(2)
        .map(|w| integrate(f2, w[0], w[1], 1e-15, QUAD_REL))
        .sum();
    a2_int += integrate_to_inf(f2, *e.last().expect("non-empty"), 1e-15, QUAD_REL);
    let pi = std::f64::consts::PI;
    Ok(q.power * (pi * lambda * beta / (beta - 2.0) - 2.0 * pi * lambda * (a1 + a2_int)))
}

/// Truncation radius for an outer weight bounded by `coeff · r^{-β}` (r ≥ 1).
fn cut_radius(model: &KernelModel, r0: f64, coeff: f64, beta: f64, tail_tol: f64) -> f64 {
    let lambda = model.lambda();
    let needed = (20.0 * std::f64::consts::PI * lambda * coeff / ((beta - 2.0) * tail_tol))
        .powf(1.0 / (beta - 2.0));
    needed
        .max(4.0 * r0)
        .max(r0 + 10.0 * model.alpha())
        .max(2.0)
        .min(MAX_CUT)
}

type Outer = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Weight 1 on B(0, r0) and g(r) outside, truncated at `cut`.
fn void_and_outer(r0: f64, cut: f64, g: Outer) -> Result<RadialWeight> {
    RadialWeight::new(
        Domain::Disk { radius: cut },
        move |r| if r < r0 { 1.0 } else { g(r) },
        &[r0, 1.0],
    )
}

/// exp(−λ ∫_{|x|>cut} g): the omitted far field, where the Palm kernel is λ.
fn far_field(model: &KernelModel, cut: f64, g: &Outer) -> f64 {
    let tail = integrate_to_inf(|r| TWO_PI * r * g(r), cut, 1e-15, 1e-10);
    (-model.lambda() * tail).exp()
}

fn palm_void(model: &KernelModel, r0: f64, opts: &SeriesOptions) -> Result<f64> {
    let rule = palm_rule(model, [r0, 0.0])?;
    let den = match void_series(&rule, r0, opts)? {
        Ok(res) => res,
        Err(partial) => {
            return Err(Error::NonConvergence {
                orders: partial.orders_used,
                tail_bound: partial.tail_bound,
                partial: Box::new(partial),
            })
        }
    };
    if den.value < MIN_CONDITIONING {
        return Err(Error::Conditioning(den.value));
    }
    Ok(den.value)
}

fn check_r0(r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::invalid(format!(
            "the nearest-BS distance r0 must be positive (r0 = 0 is excluded), got {r0}"
        )));
    }
    Ok(())
}

/// Palm numerator Σ (−1)^n/n! ∫ det[K^!] Π w for each outer weight, sharing
/// samples drawn from `outers[proposal]`.
fn palm_numerators(
    model: &KernelModel,
    r0: f64,
    outers: &[Outer],
    proposal: usize,
    cut: f64,
    opts: &SeriesOptions,
) -> Result<Vec<Result<(SeriesResult, f64)>>> {
    let weights = outers
        .iter()
        .map(|g| void_and_outer(r0, cut, g.clone()))
        .collect::<Result<Vec<_>>>()?;
    let job = SeriesJob {
        rule: palm_rule(model, [r0, 0.0])?,
        weight: weights[proposal].clone(),
        leading: None,
        options: *opts,
    };
    let res = if outers.len() == 1 {
        vec![eval_determinantal_series(&job)]
    } else {
        eval_determinantal_series_multi(&job, &weights)?
    };
    Ok(res
        .into_iter()
        .zip(outers)
        .map(|(r, g)| r.map(|v| (v, far_field(model, cut, g))))
        .collect())
}

/// Laplace transform E[exp(−sI) | nearest BS at distance r0] of the
/// Rayleigh-faded interference.
pub fn laplace_interference(q: &InterferenceQuery, s: f64, opts: &SeriesOptions) -> Result<f64> {
    Ok(laplace_interference_curve(q, &[s], opts)?[0])
}

/// [`laplace_interference`] at several `s`, all from one set of QMC samples
/// (so finite differences in `s` are smooth).
pub fn laplace_interference_curve(
    q: &InterferenceQuery,
    s_values: &[f64],
    opts: &SeriesOptions,
) -> Result<Vec<f64>> {
    q.expect(Association::NearestBs)?;
    check_r0(q.r0)?;
    opts.validate()?;
    if s_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid("s must be non-negative"));
    }
    if s_values.iter().all(|&s| s == 0.0) {
        return Ok(vec![1.0; s_values.len()]);
    }
    let s_max = s_values.iter().copied().fold(0.0, f64::max);
    let (proposal, _) = s_values
        .iter()
        .enumerate()
        .find(|(_, &s)| s == s_max)
        .expect("non-empty");
    let (p, pl) = (q.power, q.pathloss);
    let outers: Vec<Outer> = s_values
        .iter()
        .map(|&s| -> Outer {
            Arc::new(move |r: f64| {
                let x = s * p * pl.eval(r);
                x / (1.0 + x)
            })
        })
        .collect();
    let cut = cut_radius(&q.model, q.r0, s_max * p, pl.beta, opts.tail_tol);
    let den = palm_void(&q.model, q.r0, opts)?;
    let nums = palm_numerators(&q.model, q.r0, &outers, proposal, cut, opts)?;
    s_values
        .iter()
        .zip(nums)
        .map(|(&s, num)| {
            if s == 0.0 {
                return Ok(1.0);
            }
            let (num, far) = num?;
            Ok(num.value * far / den)
        })
        .collect()
}

/// Mean interference given the nearest BS at distance r0.
pub fn mean_interference_nearest(q: &InterferenceQuery, opts: &SeriesOptions) -> Result<f64> {
    q.expect(Association::NearestBs)?;
    check_r0(q.r0)?;
    opts.validate()?;
    let lambda = q.model.lambda();
    let cut = (10.0 * q.r0 + 20.0 * q.model.alpha())
        .max(50.0)
        .min(MAX_CUT);
    let (p, pl) = (q.power, q.pathloss);
    let lead = RadialWeight::new(
        Domain::Annulus {
            inner: q.r0,
            outer: cut,
        },
        move |r| p * pl.eval(r),
        &[1.0],
    )?;
    let job = SeriesJob {
        rule: palm_rule(&q.model, q.anchor())?,
        weight: RadialWeight::disk(q.r0)?,
        leading: Some(lead),
        options: *opts,
    };
    let den = palm_void(&q.model, q.r0, opts)?;
    let num = eval_determinantal_series(&job)?;
    Ok(num.value / den + lambda * p * pl.tail_mass(cut))
}

/// P(SIR > T | nearest BS at r0) under Rayleigh fading (`t` linear).
pub fn sir_ccdf_conditional(
    model: &KernelModel,
    pathloss: super::PathLossModel,
    t: f64,
    r0: f64,
    opts: &SeriesOptions,
) -> Result<f64> {
    let res = conditional_numerator(model, pathloss, t, r0, opts)?;
    let den = palm_void(model, r0, opts)?;
    Ok(res.0.value * res.1 / den)
}

/// Outer weight 1 − 1/(1 + T l(x)/l(x0)).
pub(crate) fn sir_outer(pathloss: super::PathLossModel, t: f64, r0: f64) -> Outer {
    let l0 = pathloss.eval(r0);
    Arc::new(move |r: f64| {
        let x = t * pathloss.eval(r) / l0;
        x / (1.0 + x)
    })
}

/// Palm numerator (void of B(0, r0) and coverage), with far-field factor.
pub(crate) fn conditional_numerator(
    model: &KernelModel,
    pathloss: super::PathLossModel,
    t: f64,
    r0: f64,
    opts: &SeriesOptions,
) -> Result<(SeriesResult, f64)> {
    pathloss.validate()?;
    check_r0(r0)?;
    opts.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "threshold must be positive, got {t}"
        )));
    }
    let g = sir_outer(pathloss, t, r0);
    let cut = cut_radius(
        model,
        r0,
        t / pathloss.eval(r0),
        pathloss.beta,
        opts.tail_tol,
    );
    palm_numerators(model, r0, &[g], 0, cut, opts)?
        .pop()
        .expect("one weight")
}
