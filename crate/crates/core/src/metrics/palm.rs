//! Palm-diagonal integrals and determinant rules shared by the metrics.

use std::sync::Arc;

use crate::kernel::Family;
use crate::numerics::{bessel_i0_scaled, integrate, integrate_to_inf, DeterminantRule};
use crate::{KernelModel, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Relative tolerance for the deterministic radial quadratures.
pub(crate) const QUAD_REL: f64 = 1e-11;

pub(crate) fn base_rule(model: &KernelModel) -> DeterminantRule {
    match model.family() {
        Family::Poisson => DeterminantRule::Poisson {
            lambda: model.lambda(),
            anchored: false,
        },
        _ => DeterminantRule::Kernel(Arc::new(model.clone())),
    }
}

/// Kernel of the reduced Palm process at `anchor`; the Poisson rule is its own Palm version.
pub(crate) fn palm_rule(model: &KernelModel, anchor: [f64; 2]) -> Result<DeterminantRule> {
    Ok(match model.family() {
        Family::Poisson => DeterminantRule::Poisson {
            lambda: model.lambda(),
            anchored: false,
        },
        _ => DeterminantRule::Kernel(Arc::new(model.palm(anchor)?)),
    })
}

pub(crate) fn anchored_rule(model: &KernelModel, anchor: [f64; 2]) -> DeterminantRule {
    match model.family() {
        Family::Poisson => DeterminantRule::Poisson {
            lambda: model.lambda(),
            anchored: true,
        },
        _ => DeterminantRule::Anchored {
            kernel: Arc::new(model.clone()),
            anchor,
        },
    }
}

/// ∫₀^{2π} K0(|x − x0|)² dθ over the circle |x| = r, with |x0| = r0.
pub(crate) fn ring_sq(model: &KernelModel, r: f64, r0: f64) -> f64 {
    let lambda = model.lambda();
    match model.family() {
        Family::Poisson => 0.0,
        Family::Gauss => {
            // e^{-2(r²+r0²)/α²} I0(4 r r0/α²), fused to avoid overflow
            let a2 = model.alpha() * model.alpha();
            let d = r - r0;
            TWO_PI
                * lambda
                * lambda
                * (-2.0 * d * d / a2).exp()
                * bessel_i0_scaled(4.0 * r * r0 / a2)
        }
        _ => ring_sq_numeric(model, r, r0),
    }
}

/// [`ring_sq`] by periodic trapezoid for any family (no closed forms).
/// Converged to 1e-13 relative to 2πλ², the scale it is subtracted from.
pub(crate) fn ring_sq_numeric(model: &KernelModel, r: f64, r0: f64) -> f64 {
    let f = |t: f64| {
        let d2 = r * r + r0 * r0 - 2.0 * r * r0 * t.cos();
        let k = model.radial(d2.max(0.0).sqrt());
        k * k
    };
    let tol = 1e-13 * TWO_PI * model.lambda() * model.lambda();
    // periodic trapezoid on [0, π] (even integrand), refined by halving
    let mut m = 32usize;
    let h0 = std::f64::consts::PI;
    let mut sum = 0.5 * (f(0.0) + f(h0)) + (1..m).map(|j| f(h0 * j as f64 / m as f64)).sum::<f64>();
    let mut est = sum * h0 / m as f64;
    while m < 1 << 15 {
        sum += (0..m)
            .map(|j| f(h0 * (2 * j + 1) as f64 / (2 * m) as f64))
            .sum::<f64>();
        m *= 2;
        let next = sum * h0 / m as f64;
        let done = (next - est).abs() <= tol;
        est = next;
        if done {
            break;
        }
    }
    2.0 * est
}

/// ∫ K^!_{x0}(x, x) dθ over the circle |x| = r, with |x0| = r0.
pub(crate) fn palm_ring(model: &KernelModel, r: f64, r0: f64) -> f64 {
    let lambda = model.lambda();
    (TWO_PI * lambda - ring_sq(model, r, r0) / lambda).max(0.0)
}

/// ∫_{a ≤ |x| ≤ b} g(|x|) K^!_{x0}(x, x) dx; `b` may be infinite.
pub(crate) fn palm_diag_mass(
    model: &KernelModel,
    r0: f64,
    a: f64,
    b: f64,
    g: impl Fn(f64) -> f64,
) -> f64 {
    let f = |r: f64| {
        let gv = g(r);
        if gv == 0.0 {
            0.0
        } else {
            gv * r * palm_ring(model, r, r0)
        }
    };
    if a >= b {
        return 0.0;
    }
    let scale = model.alpha().max(1e-3);
    let mut edges = vec![a];
    for e in [r0 - 5.0 * scale, r0, r0 + 5.0 * scale, 1.0] {
        if e > a && e < b {
            edges.push(e);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(f, w[0], w[1], 1e-15, QUAD_REL);
    }
    let last = *edges.last().expect("non-empty");
    if b.is_infinite() {
        total += integrate_to_inf(f, last, 1e-15, QUAD_REL);
    } else {
        total += integrate(f, last, b, 1e-15, QUAD_REL);
    }
    total
}

/// −log of the Hadamard bound on the Palm void probability of B(0, r0)
/// given a point at (r0, 0): ∫_{B(0,r0)} K^!(x, x) dx.
pub(crate) fn palm_void_exponent(model: &KernelModel, r0: f64) -> f64 {
    palm_diag_mass(model, r0, 0.0, r0, |_| 1.0)
}

/// Smallest r0 with `palm_void_exponent(r0) ≥ target` (bracketed bisection).
pub(crate) fn void_radius(model: &KernelModel, target: f64) -> f64 {
    let mut hi = (target / (std::f64::consts::PI * model.lambda())).sqrt();
    while palm_void_exponent(model, hi) < target {
        hi *= 1.5;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if palm_void_exponent(model, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    hi
}
