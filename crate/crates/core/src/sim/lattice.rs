use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{PointPattern, Window};
use crate::{Error, Result};

/// Circumradius of the hexagonal cell with area 1/λ.
pub fn hex_cell_radius(lambda: f64) -> f64 {
    (2.0 / (3.0 * 3f64.sqrt() * lambda)).sqrt()
}

/// Intensity of the lattice with hexagonal cells of circumradius `r`.
pub fn hex_intensity(r: f64) -> f64 {
    2.0 / (3.0 * 3f64.sqrt() * r * r)
}

/// Triangular lattice of intensity λ with a uniformly random offset; each
/// point is displaced by a distance U(0, η·r) in a uniform direction, where r
/// is the hexagonal cell radius.
pub fn sample_hex_perturbed<R: Rng + ?Sized>(
    window: Window,
    lambda: f64,
    eta: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    window.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid("eta must be non-negative"));
    }
    let r = hex_cell_radius(lambda);
    let d = 3f64.sqrt() * r;
    let a1 = [d, 0.0];
    let a2 = [0.5 * d, 0.5 * 3f64.sqrt() * d];
    let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
    let offset = [u1 * a1[0] + u2 * a2[0], u2 * a2[1]];
    let reach = eta * r;
    let ext = window.expanded(reach + 2.0 * d);
    let j_lo = ((ext.y_min - offset[1]) / a2[1]).floor() as i64;
    let j_hi = ((ext.y_max - offset[1]) / a2[1]).ceil() as i64;
    let mut points = Vec::new();
    for j in j_lo..=j_hi {
        let y = offset[1] + j as f64 * a2[1];
        let shift = offset[0] + j as f64 * a2[0];
        let i_lo = ((ext.x_min - shift) / d).floor() as i64;
        let i_hi = ((ext.x_max - shift) / d).ceil() as i64;
        for i in i_lo..=i_hi {
            let mut p = [shift + i as f64 * d, y];
            if reach > 0.0 {
                let rho = rng.gen::<f64>() * reach;
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                p[0] += rho * theta.cos();
                p[1] += rho * theta.sin();
            }
            if window.contains(p) {
                points.push(p);
            }
        }
    }
    Ok(PointPattern::new_unchecked(window, points))
}

/// Homogeneous Poisson process of intensity λ on the window.
pub fn sample_poisson<R: Rng + ?Sized>(
    window: Window,
    lambda: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    window.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let count = Poisson::new(lambda * window.area())
        .map_err(|e| Error::invalid(e.to_string()))?
        .sample(rng) as usize;
    let points = (0..count)
        .map(|_| {
            [
                window.x_min + rng.gen::<f64>() * window.width(),
                window.y_min + rng.gen::<f64>() * window.height(),
            ]
        })
        .collect();
    Ok(PointPattern::new_unchecked(window, points))
}
