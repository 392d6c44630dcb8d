//! Generalized-Gamma kernel: K0 has no closed form and is obtained from
//! K0(r)/λ = ν/Γ(2/ν) ∫₀^∞ exp(−u^ν) J0(2π(r/α)u) u du, tabulated once per ν.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::special::{j0_f64, ln_gamma_f64};

const SAMPLES: usize = 4096;
/// Table covers r/α ∈ [0, SPAN]; beyond it the power-law tail
/// K0 ∝ s^{-(2+ν)} is matched to the last sample.
const SPAN: f64 = 10.0;
const PANEL_NODES: usize = 10;
const MAX_PANELS: usize = 4000;

/// K0/λ on a uniform grid in r/α.
pub(super) struct Table {
    nu: f64,
    step: f64,
    values: Vec<f64>,
    tail: f64,
}

/// Quadrature nodes and weights (including exp(−u^ν)·u·ν/Γ(2/ν)).
struct Rule {
    u: Vec<f64>,
    w: Vec<f64>,
}

fn rule(nu: f64, s_max: f64) -> Rule {
    let upper = 42f64.powf(1.0 / nu);
    let width = (upper / 64.0).min(0.5 / s_max.max(1.0));
    let panels = ((upper / width).ceil() as usize).clamp(1, MAX_PANELS);
    let width = upper / panels as f64;
    let (gx, gw) = gauss_legendre(PANEL_NODES);
    let norm = nu / ln_gamma_f64(2.0 / nu).exp();
    let mut u = Vec::with_capacity(panels * PANEL_NODES);
    let mut w = Vec::with_capacity(panels * PANEL_NODES);
    for p in 0..panels {
        let c = (p as f64 + 0.5) * width;
        for (x, wx) in gx.iter().zip(&gw) {
            let ui = c + 0.5 * width * x;
            u.push(ui);
            w.push(0.5 * width * wx * norm * (-ui.powf(nu)).exp() * ui);
        }
    }
    Rule { u, w }
}

fn integrate(rule: &Rule, s: f64) -> f64 {
    let k = 2.0 * std::f64::consts::PI * s;
    rule.u
        .iter()
        .zip(&rule.w)
        .map(|(&u, &w)| w * j0_f64(k * u))
        .sum()
}

impl Table {
    fn build(nu: f64) -> Self {
        let r = rule(nu, SPAN);
        let step = SPAN / (SAMPLES - 1) as f64;
        let values: Vec<f64> = (0..SAMPLES)
            .map(|i| integrate(&r, i as f64 * step))
            .collect();
        let tail = values[SAMPLES - 1] * SPAN.powf(2.0 + nu);
        Self {
            nu,
            step,
            values,
            tail,
        }
    }

    /// K0(s·α)/λ.
    pub(super) fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        if s > SPAN {
            return self.tail * s.powf(-(2.0 + self.nu));
        }
        let x = s / self.step;
        let i = (x.floor() as usize).min(SAMPLES - 3);
        // 4-point Lagrange through i-1..=i+2 (mirrored at the origin, K0 is even)
        let t = x - i as f64;
        let at = |k: isize| self.values[k.unsigned_abs()];
        let i = i as isize;
        let (f0, f1, f2, f3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3
    }
}

pub(super) fn table(nu: f64) -> Arc<Table> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Table>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = nu.to_bits();
    if let Some(t) = cache.lock().expect("table cache").get(&key) {
        return t.clone();
    }
    let t = Arc::new(Table::build(nu));
    cache.lock().expect("table cache").insert(key, t.clone());
    t
}
