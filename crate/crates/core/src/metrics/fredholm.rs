//! Determinantal series summed in closed form: for a radial weight the
//! series equals the Fredholm determinant det(I − K W), evaluated by angular
//! mode decomposition (see [`AngularModes`]). Free of the cancellation that
//! limits QMC at large void probabilities.

use super::{Association, InterferenceQuery, PathLossModel};
use crate::kernel::Family;
use crate::numerics::{integrate_to_inf, AngularModes, RadialGrid};
use crate::{Error, KernelModel, Result};

/// Gauss–Legendre nodes per panel; panels are one kernel scale α wide.
const PANEL_ORDER: usize = 8;
/// Beyond the radius where the coverage weight drops below this, the
/// determinant is replaced by its diagonal (exp of minus the trace).
const NEAR_WEIGHT: f64 = 1e-3;
/// Hard cap on the near-field radius, in kernel scales beyond r0.
const MAX_NEAR_SCALES: f64 = 60.0;

fn modes(model: &KernelModel, breaks: &[f64], anchor: Option<f64>) -> Result<AngularModes> {
    let grid = RadialGrid::new(breaks, model.alpha(), PANEL_ORDER)?;
    // The tabulated GenGamma covariance is only accurate to ~1e-9.
    let tol = if model.family() == Family::GenGamma {
        1e-9
    } else {
        1e-13
    };
    AngularModes::new(|d| model.radial(d), grid, anchor, tol)
}

/// P(no point in B(0, r)), for the Palm distribution at the origin when
/// `palm` is set. Poisson has the closed form exp(−λπr²).
pub fn fredholm_void(model: &KernelModel, r: f64, palm: bool) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be finite and non-negative, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    if model.family() == Family::Poisson {
        return Ok((-model.lambda() * std::f64::consts::PI * r * r).exp());
    }
    let m = modes(model, &[r], palm.then_some(0.0))?;
    m.det(&vec![1.0; m.grid().len()])
}

/// Coverage weight g(r) = x/(1 + x), x = T l(r)/l(r0).
fn outer_weight(pathloss: PathLossModel, t: f64, r0: f64) -> impl Fn(f64) -> f64 {
    let l0 = pathloss.eval(r0);
    move |r: f64| {
        let x = t * pathloss.eval(r) / l0;
        x / (1.0 + x)
    }
}

/// Radius beyond which g ≤ NEAR_WEIGHT.
fn near_radius(model: &KernelModel, pathloss: PathLossModel, t: f64, r0: f64) -> f64 {
    let target = pathloss.eval(r0) * NEAR_WEIGHT / ((1.0 - NEAR_WEIGHT) * t.abs());
    let r_g = target.powf(-1.0 / pathloss.beta);
    let a = model.alpha();
    r_g.max(r0 + 6.0 * a).min(r0 + MAX_NEAR_SCALES * a)
}

/// Palm numerators N(r0, T) = E^!_{x0}[1{no BS in B(0, r0)} Π (1 − g)] for
/// every threshold in `ts` (linear) whose entry in `active` is set; one
/// radial grid is shared by all thresholds.
pub(crate) fn coverage_numerators(
    model: &KernelModel,
    pathloss: PathLossModel,
    ts: &[f64],
    active: &[bool],
    r0: f64,
) -> Result<Vec<Option<f64>>> {
    let lambda = model.lambda();
    let t_max = ts
        .iter()
        .zip(active)
        .filter(|(_, a)| **a)
        .map(|(t, _)| *t)
        .fold(f64::NAN, f64::max);
    if t_max.is_nan() {
        return Ok(vec![None; ts.len()]);
    }
    let far_trace = |t: f64, from: f64| {
        let g = outer_weight(pathloss, t, r0);
        lambda * integrate_to_inf(|r| std::f64::consts::TAU * r * g(r), from, 1e-15, 1e-10)
    };
    if model.family() == Family::Poisson {
        return Ok(ts
            .iter()
            .zip(active)
            .map(|(&t, &a)| {
                a.then(|| (-(lambda * std::f64::consts::PI * r0 * r0) - far_trace(t, r0)).exp())
            })
            .collect());
    }
    let outer = near_radius(model, pathloss, t_max, r0);
    let m = modes(model, &[r0, outer], Some(r0))?;
    ts.iter()
        .zip(active)
        .map(|(&t, &a)| {
            if !a {
                return Ok(None);
            }
            let g = outer_weight(pathloss, t, r0);
            let w: Vec<f64> = m
                .grid()
                .r
                .iter()
                .map(|&r| if r < r0 { 1.0 } else { g(r) })
                .collect();
            Ok(Some(m.det(&w)? * (-far_trace(t, outer)).exp()))
        })
        .collect()
}

/// Denominator floor shared with the series path.
const MIN_CONDITIONING: f64 = 1e-12;
/// Step of the difference quotient for the mean, in units of T.
const MEAN_STEP: f64 = 1e-4;

fn nearest_query(q: &InterferenceQuery) -> Result<()> {
    q.validate()?;
    if q.association != Association::NearestBs {
        return Err(Error::invalid("operation needs a nearest-BS query"));
    }
    if !(q.r0 > 0.0) {
        return Err(Error::invalid("r0 must be positive"));
    }
    Ok(())
}

/// [`laplace_interference`](super::laplace_interference) at several `s`,
/// with numerator and denominator evaluated as Fredholm determinants.
pub fn laplace_interference_fredholm(q: &InterferenceQuery, s_values: &[f64]) -> Result<Vec<f64>> {
    nearest_query(q)?;
    if s_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid("s must be non-negative"));
    }
    // 1/(1 + sP l(x)) is the coverage weight with T = sP l(r0).
    let scale = q.power * q.pathloss.eval(q.r0);
    let mut ts = vec![0.0];
    ts.extend(s_values.iter().map(|s| s * scale));
    let n = coverage_numerators(&q.model, q.pathloss, &ts, &vec![true; ts.len()], q.r0)?;
    let den = n[0].expect("active");
    if !(den > MIN_CONDITIONING) {
        return Err(Error::Conditioning(den));
    }
    Ok(n[1..]
        .iter()
        .map(|v| (v.expect("active") / den).min(1.0))
        .collect())
}

/// [`mean_interference_nearest`](super::mean_interference_nearest) as
/// −d/ds log L(s) at 0, by a second-order one-sided difference of
/// Fredholm determinants.
pub fn mean_interference_nearest_fredholm(q: &InterferenceQuery) -> Result<f64> {
    nearest_query(q)?;
    let h = MEAN_STEP;
    let n = coverage_numerators(&q.model, q.pathloss, &[0.0, h, 2.0 * h], &[true; 3], q.r0)?;
    let f: Vec<f64> = n.iter().map(|v| v.expect("active")).collect();
    if !(f[0] > MIN_CONDITIONING) {
        return Err(Error::Conditioning(f[0]));
    }
    let dlog_dt = (-3.0 * f[0].ln() + 4.0 * f[1].ln() - f[2].ln()) / (2.0 * h);
    Ok(-dlog_dt * q.power * q.pathloss.eval(q.r0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_mean_and_laplace_are_closed_form() {
        let m = KernelModel::poisson(0.4492).unwrap();
        let pl = PathLossModel::pure_power(4.0).unwrap();
        let q = InterferenceQuery::new(m, pl, 1.0, 0.8, Association::NearestBs).unwrap();
        let want = 0.4492 * std::f64::consts::PI / 0.64;
        assert!((mean_interference_nearest_fredholm(&q).unwrap() - want).abs() < 1e-7 * want);
        let l = laplace_interference_fredholm(&q, &[0.0, 1.0]).unwrap();
        let ppp =
            (-0.4492 * std::f64::consts::PI * (std::f64::consts::FRAC_PI_2 - 0.64f64.atan())).exp();
        assert_eq!(l[0], 1.0);
        assert!((l[1] - ppp).abs() < 1e-9);
    }
}
