use num_complex::Complex64;
use rand::Rng;

use super::{PointPattern, Window};
use crate::kernel::Family;
use crate::{Error, KernelModel, Result};

/// Spectral mass left out of the truncated mode set.
const SPECTRAL_TAIL: f64 = 1e-4;
const MAX_MODES: usize = 4_000_000;

/// Simulates a stationary DPP by its periodic approximation on a torus that
/// contains the window plus a margin. Each Fourier mode k/L enters with
/// probability φ(k/L); the resulting projection DPP is sampled sequentially.
#[derive(Clone, Debug)]
pub struct DppSampler {
    window: Window,
    origin: [f64; 2],
    torus: [f64; 2],
    modes: Vec<([i32; 2], f64)>,
    /// Σ φ(k/L) over the whole lattice and over the kept modes.
    total_mass: f64,
    kept_mass: f64,
}

impl DppSampler {
    pub fn new(model: &KernelModel, window: Window, margin: f64) -> Result<Self> {
        window.validate()?;
        if model.family() == Family::Poisson {
            return Err(Error::NoSpectralRepresentation("poisson"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::invalid("margin must be finite and non-negative"));
        }
        model.ensure_exists()?;
        let torus = [
            window.width() + 2.0 * margin,
            window.height() + 2.0 * margin,
        ];
        let origin = [window.x_min - margin, window.y_min - margin];

        // Poisson summation: Σ_k φ(k/L) = |A| Σ_m K0(m ∘ L).
        let mut periodized = 0.0;
        for m1 in -3i32..=3 {
            for m2 in -3i32..=3 {
                periodized += model.radial((m1 as f64 * torus[0]).hypot(m2 as f64 * torus[1]));
            }
        }
        let total_mass = torus[0] * torus[1] * periodized;
        let target = (1.0 - SPECTRAL_TAIL) * total_mass;

        let mut cutoff = 1.0 / model.alpha();
        let mut modes = loop {
            let k = [
                (cutoff * torus[0]).ceil() as i32,
                (cutoff * torus[1]).ceil() as i32,
            ];
            let count = (2 * k[0] as usize + 1) * (2 * k[1] as usize + 1);
            if count > MAX_MODES {
                return Err(Error::Config(format!(
                    "spectral truncation needs more than {MAX_MODES} modes; shrink the window"
                )));
            }
            let mut modes = Vec::with_capacity(count);
            let mut mass = 0.0;
            for k1 in -k[0]..=k[0] {
                for k2 in -k[1]..=k[1] {
                    let xi = [k1 as f64 / torus[0], k2 as f64 / torus[1]];
                    let phi = model.spectral_density(xi)?;
                    mass += phi;
                    modes.push(([k1, k2], phi));
                }
            }
            if mass >= target {
                break modes;
            }
            cutoff *= 1.5;
        };
        // Keep the strongest modes until the target mass is reached.
        modes.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut kept_mass = 0.0;
        let mut keep = 0;
        for (_, phi) in &modes {
            if kept_mass >= target {
                break;
            }
            kept_mass += phi;
            keep += 1;
        }
        modes.truncate(keep);
        for m in modes.iter_mut() {
            m.1 = m.1.min(1.0);
        }
        Ok(Self {
            window,
            origin,
            torus,
            modes,
            total_mass,
            kept_mass,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Fraction of the spectral mass captured by the kept modes.
    pub fn captured_fraction(&self) -> f64 {
        self.kept_mass / self.total_mass
    }

    /// Expected number of points on the whole torus.
    pub fn expected_torus_count(&self) -> f64 {
        self.modes.iter().map(|m| m.1).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PointPattern {
        let freqs: Vec<[f64; 2]> = self
            .modes
            .iter()
            .filter(|m| rng.gen::<f64>() < m.1)
            .map(|m| {
                [
                    std::f64::consts::TAU * m.0[0] as f64 / self.torus[0],
                    std::f64::consts::TAU * m.0[1] as f64 / self.torus[1],
                ]
            })
            .collect();
        let n = freqs.len();
        let nf = n as f64;
        // Orthonormal basis of the span of the accepted feature vectors.
        let mut basis: Vec<Complex64> = Vec::with_capacity(n * n);
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        let mut points = Vec::new();
        for i in 0..n {
            loop {
                let x = [
                    rng.gen::<f64>() * self.torus[0],
                    rng.gen::<f64>() * self.torus[1],
                ];
                for (vk, f) in v.iter_mut().zip(&freqs) {
                    *vk = Complex64::cis(f[0] * x[0] + f[1] * x[1]);
                }
                // Accept with probability (n - Σ|<q_j, v>|²) / n.
                let threshold = rng.gen::<f64>() * nf;
                let mut residual = nf;
                let mut rejected = false;
                for j in 0..i {
                    let q = &basis[j * n..(j + 1) * n];
                    let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    coeff[j] = c;
                    residual -= c.norm_sqr();
                    if residual < threshold {
                        rejected = true;
                        break;
                    }
                }
                if rejected {
                    continue;
                }
                for _pass in 0..2 {
                    for j in 0..i {
                        let q = &basis[j * n..(j + 1) * n];
                        let c = coeff[j];
                        for (vk, qk) in v.iter_mut().zip(q) {
                            *vk -= c * qk;
                        }
                    }
                    for j in 0..i {
                        let q = &basis[j * n..(j + 1) * n];
                        coeff[j] = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    }
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(norm > 1e-12) {
                    continue;
                }
                basis.extend(v.iter().map(|z| z / norm));
                let p = [x[0] + self.origin[0], x[1] + self.origin[1]];
                if self.window.contains(p) {
                    points.push(p);
                }
                break;
            }
        }
        PointPattern::new_unchecked(self.window, points)
    }
}
