//! Fredholm determinants det(I − K W) of an isotropic stationary kernel
//! against a radial weight. Rotational symmetry splits the operator into
//! angular Fourier modes m, each a 1-D integral operator in the radius with
//! kernel k_m(r, s) = (1/2π) ∫ K0(|r e^{iu} − s|) cos(mu) du; each mode is
//! discretised by Gauss–Legendre panels (Nyström).

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::gauss_legendre;
use crate::{Error, Result};

const MAX_ANGLES: usize = 1 << 16;

/// Gauss–Legendre nodes r_i with measure weights q_i = 2π r_i ω_i.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

impl RadialGrid {
    /// Panels no wider than `max_panel` between consecutive `breaks`
    /// (starting at 0), `order` nodes per panel.
    pub fn new(breaks: &[f64], max_panel: f64, order: usize) -> Result<Self> {
        if !(max_panel > 0.0) || order == 0 {
            return Err(Error::invalid(
                "radial grid needs a positive panel width and order",
            ));
        }
        let mut edges = vec![0.0];
        edges.extend(breaks.iter().copied().filter(|b| *b > 0.0 && b.is_finite()));
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        if edges.len() < 2 {
            return Err(Error::invalid("radial grid needs a positive outer radius"));
        }
        let (x, w) = gauss_legendre(order);
        let mut grid = Self {
            r: Vec::new(),
            q: Vec::new(),
        };
        for e in edges.windows(2) {
            let panels = ((e[1] - e[0]) / max_panel).ceil().max(1.0) as usize;
            let h = (e[1] - e[0]) / panels as f64;
            for p in 0..panels {
                let a = e[0] + p as f64 * h;
                for (xi, wi) in x.iter().zip(&w) {
                    let r = a + 0.5 * h * (xi + 1.0);
                    grid.r.push(r);
                    grid.q.push(std::f64::consts::TAU * r * 0.5 * h * wi);
                }
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn outer(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }
}

#[derive(Clone, Debug)]
struct ModeBlock {
    /// 1 for m = 0, 2 for m ≥ 1 (modes ±m coincide).
    mult: f64,
    first: usize,
    /// k_m(r_i, r_j) for i, j ≥ first, row-major.
    k: Vec<f64>,
    /// k_m(r_i, r_anchor) for i ≥ first.
    anchor: Vec<f64>,
}

/// Mode decomposition of an isotropic kernel on a radial grid, optionally
/// with a rank-one Palm correction at an anchor (r_a, 0).
#[derive(Clone, Debug)]
pub struct AngularModes {
    grid: RadialGrid,
    k00: f64,
    palm: bool,
    blocks: Vec<ModeBlock>,
}

/// Cosine coefficients c_m = (1/2π) ∫ f(u) cos(mu) du, m = 0..n/2, by the
/// trapezoid rule on n angles (spectrally accurate for periodic f).
fn cosine_coefficients(
    f: impl Fn(f64) -> f64,
    n: usize,
    planner: &mut FftPlanner<f64>,
) -> Vec<f64> {
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|l| Complex::new(f(std::f64::consts::TAU * l as f64 / n as f64), 0.0))
        .collect();
    fft.process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.re / n as f64).collect()
}

fn pair_fn(k0: &(impl Fn(f64) -> f64 + Sync), r: f64, s: f64) -> impl Fn(f64) -> f64 + '_ {
    move |u: f64| {
        let d2 = (r - s).powi(2) + 2.0 * r * s * (1.0 - u.cos());
        k0(d2.max(0.0).sqrt())
    }
}

impl AngularModes {
    /// `k0` is the radial covariance; with `anchor = Some(r_a)` determinants
    /// are taken for the Palm kernel at (r_a, 0). Angular coefficients are
    /// resolved to `tol` relative to K0(0), which should not be set below the
    /// accuracy of `k0` itself.
    pub fn new(
        k0: impl Fn(f64) -> f64 + Sync,
        grid: RadialGrid,
        anchor: Option<f64>,
        tol: f64,
    ) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::invalid("angular tolerance must lie in (0, 1)"));
        }
        let n = grid.len();
        if n == 0 {
            return Err(Error::invalid("empty radial grid"));
        }
        let k00 = k0(0.0);
        if !(k00 > 0.0 && k00.is_finite()) {
            return Err(Error::invalid("kernel must be positive at the origin"));
        }
        let r_out = grid.outer();
        // Angles: enough that the most peaked pair (outermost diagonal) is resolved.
        let mut planner = FftPlanner::new();
        let mut angles = 64;
        loop {
            let c = cosine_coefficients(pair_fn(&k0, r_out, r_out), angles, &mut planner);
            let tail = c[c.len() - 4..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if tail <= tol * k00 {
                break;
            }
            angles *= 2;
            if angles > MAX_ANGLES {
                return Err(Error::Numeric(
                    "angular resolution exceeds the limit".into(),
                ));
            }
        }
        let diag: Vec<Vec<f64>> = grid
            .r
            .par_iter()
            .map_init(FftPlanner::new, |p, &r| {
                cosine_coefficients(pair_fn(&k0, r, r), angles, p)
            })
            .collect();
        // Modes and radial ranges that matter: q_i k_m(r_i, r_i) above the floor.
        let scale = grid
            .q
            .iter()
            .zip(&diag)
            .map(|(q, d)| q * d[0])
            .fold(0.0, f64::max);
        let floor = tol * scale.max(f64::MIN_POSITIVE);
        let mut firsts = Vec::new();
        for m in 0..=angles / 2 {
            match (0..n).find(|&i| grid.q[i] * diag[i][m].abs() > floor) {
                Some(first) => firsts.push(first),
                None => break,
            }
        }
        let modes = firsts.len();
        if modes == 0 {
            return Err(Error::Numeric(
                "kernel has no resolvable angular modes".into(),
            ));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map_init(FftPlanner::new, |p, i| {
                // Row i: coefficients for j ≥ i, then the anchor column.
                let mut out = Vec::with_capacity((n - i + 1) * modes);
                for j in i..n {
                    let c = if i == j {
                        diag[i].clone()
                    } else {
                        cosine_coefficients(pair_fn(&k0, grid.r[i], grid.r[j]), angles, p)
                    };
                    out.extend_from_slice(&c[..modes]);
                }
                if let Some(ra) = anchor {
                    let c = cosine_coefficients(pair_fn(&k0, grid.r[i], ra), angles, p);
                    out.extend_from_slice(&c[..modes]);
                }
                out
            })
            .collect();
        let blocks = (0..modes)
            .map(|m| {
                let first = firsts[m];
                let nb = n - first;
                let mut k = vec![0.0; nb * nb];
                let mut a = vec![0.0; nb];
                for i in first..n {
                    let row = &rows[i];
                    for j in i..n {
                        let v = row[(j - i) * modes + m];
                        k[(i - first) * nb + (j - first)] = v;
                        k[(j - first) * nb + (i - first)] = v;
                    }
                    if anchor.is_some() {
                        a[i - first] = row[(n - i) * modes + m];
                    }
                }
                ModeBlock {
                    mult: if m == 0 { 1.0 } else { 2.0 },
                    first,
                    k,
                    anchor: a,
                }
            })
            .collect();
        Ok(Self {
            grid,
            k00,
            palm: anchor.is_some(),
            blocks,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn mode_count(&self) -> usize {
        self.blocks.len()
    }

    /// det(I − K W) (or with the Palm kernel) for weights `w` ∈ [0, 1] at
    /// the grid nodes.
    pub fn det(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.grid.len() {
            return Err(Error::invalid(
                "weight vector does not match the radial grid",
            ));
        }
        let mut log_det = 0.0;
        let mut quad = 0.0;
        for b in &self.blocks {
            let nb = self.grid.len() - b.first;
            let s: Vec<f64> = (b.first..self.grid.len())
                .map(|i| (self.grid.q[i] * w[i].clamp(0.0, 1.0)).sqrt())
                .collect();
            let mut a = vec![0.0; nb * nb];
            for i in 0..nb {
                for j in 0..nb {
                    a[i * nb + j] = -s[i] * b.k[i * nb + j] * s[j];
                }
                a[i * nb + i] += 1.0;
            }
            let l = cholesky(&mut a, nb)?;
            log_det += b.mult * l;
            if self.palm {
                let mut u: Vec<f64> = (0..nb).map(|i| s[i] * b.anchor[i]).collect();
                let norm: f64 = u.iter().map(|v| v * v).sum();
                if norm > 0.0 {
                    cholesky_solve(&a, nb, &mut u);
                    quad += b.mult * (0..nb).map(|i| s[i] * b.anchor[i] * u[i]).sum::<f64>();
                }
            }
        }
        let factor = if self.palm {
            1.0 + quad / self.k00
        } else {
            1.0
        };
        let v = log_det.exp() * factor;
        if !v.is_finite() {
            return Err(Error::NonFinite("fredholm determinant"));
        }
        Ok(v)
    }
}

/// In-place lower Cholesky factor; returns ln det.
fn cholesky(a: &mut [f64], n: usize) -> Result<f64> {
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::Numeric(format!(
                "I − K W is not positive definite (pivot {d:.3e}); the kernel may violate existence"
            )));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        log_det += 2.0 * d.ln();
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    Ok(log_det)
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_mode_zero_matches_bessel_form() {
        let (lambda, alpha) = (0.4492, 0.8417);
        let k0 = move |d: f64| lambda * (-(d * d) / (alpha * alpha)).exp();
        let mut p = FftPlanner::new();
        for (r, s) in [(0.3, 0.7), (2.0, 2.5), (5.0, 5.1)] {
            let c = cosine_coefficients(pair_fn(&k0, r, s), 256, &mut p);
            let z: f64 = 2.0 * r * s / (alpha * alpha);
            let expect = lambda
                * (-(r - s) * (r - s) / (alpha * alpha)).exp()
                * crate::numerics::bessel_i0_scaled(z);
            assert!(
                (c[0] - expect).abs() < 1e-13,
                "{r} {s}: {} vs {expect}",
                c[0]
            );
        }
    }
}
