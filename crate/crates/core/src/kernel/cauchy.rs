//! Spectral density of the Cauchy kernel.
//!
//! (1 + r²/α²)^{-(ν+1)} is a Gamma scale mixture of Gaussians, which gives
//! φ(ξ) = λπα²/Γ(ν+1) · ∫ exp(νs − eˢ − z²e⁻ˢ) ds with z = πα|ξ|.
//! The integrand is smooth and doubly-exponentially decaying in s, so the
//! trapezoid rule centred on the peak converges geometrically.

/// Log-integrand drop at which marching stops.
const CUTOFF: f64 = 40.0;

pub(super) fn mixture_integral(nu: f64, z: f64) -> f64 {
    let z2 = z * z;
    let g = |s: f64| nu * s - s.exp() - z2 * (-s).exp();
    let t = 0.5 * (nu + (nu * nu + 4.0 * z2).sqrt());
    let s0 = t.ln();
    let g0 = g(s0);
    let curvature = t + z2 / t;
    let h = 0.2 / curvature.max(1.0).sqrt();
    let mut sum = 1.0;
    for dir in [-1.0, 1.0] {
        for k in 1..200_000 {
            let d = g(s0 + dir * h * k as f64) - g0;
            if d < -CUTOFF {
                break;
            }
            sum += d.exp();
        }
    }
    sum * h * g0.exp()
}
