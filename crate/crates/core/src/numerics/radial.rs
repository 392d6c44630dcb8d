//! Radially symmetric weights and the importance maps used to integrate them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre;
use crate::{Error, Result};

const CELLS_PER_SEGMENT: usize = 256;

/// Integration domain centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Disk { radius } => (0.0, radius),
            Domain::Annulus { inner, outer } => (inner, outer),
        }
    }

    pub fn area(&self) -> f64 {
        let (a, b) = self.bounds();
        std::f64::consts::PI * (b * b - a * a)
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.bounds();
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b > a) {
            return Err(Error::invalid(format!("bad integration domain [{a}, {b}]")));
        }
        Ok(())
    }
}

type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Non-negative weight w(|x|) supported on a [`Domain`].
#[derive(Clone)]
pub struct RadialWeight {
    domain: Domain,
    func: Option<WeightFn>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialWeight")
            .field("domain", &self.domain)
            .field("indicator", &self.func.is_none())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl RadialWeight {
    /// Indicator of the domain.
    pub fn indicator(domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            domain,
            func: None,
            breakpoints: Vec::new(),
        })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::indicator(Domain::Disk { radius })
    }

    /// General weight. `breakpoints` are radii where `f` has kinks or jumps;
    /// they split the importance table so that no cell straddles them.
    pub fn new(
        domain: Domain,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breakpoints: &[f64],
    ) -> Result<Self> {
        domain.validate()?;
        let (a, b) = domain.bounds();
        let mut bp: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&r| r > a && r < b)
            .collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        Ok(Self {
            domain,
            func: Some(Arc::new(f)),
            breakpoints: bp,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_indicator(&self) -> bool {
        self.func.is_none()
    }

    /// w(r); zero outside the domain.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let (a, b) = self.domain.bounds();
        if r < a || r > b {
            return 0.0;
        }
        match &self.func {
            None => 1.0,
            Some(f) => f(r),
        }
    }

    fn segments(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.domain.bounds();
        let mut edges = vec![a];
        edges.extend(&self.breakpoints);
        edges.push(b);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Importance map whose radial density is proportional to 2πr·w(r).
    pub fn importance_map(&self) -> Result<RadialMap> {
        let (a, b) = self.domain.bounds();
        if self.func.is_none() {
            return Ok(RadialMap::EqualArea {
                inner2: a * a,
                outer2: b * b,
            });
        }
        let (gx, gw) = gauss_legendre(6);
        let mut r = vec![a];
        let mut cum = vec![0.0];
        let mut total = 0.0;
        for (lo, hi) in self.segments() {
            let geometric = lo > 0.0 && hi / lo > 4.0;
            for k in 1..=CELLS_PER_SEGMENT {
                let t = k as f64 / CELLS_PER_SEGMENT as f64;
                let edge = if k == CELLS_PER_SEGMENT {
                    hi
                } else if geometric {
                    lo * (hi / lo).powf(t)
                } else {
                    lo + (hi - lo) * t
                };
                let left = *r.last().expect("non-empty");
                let h = 0.5 * (edge - left);
                let c = 0.5 * (edge + left);
                let mut m = 0.0;
                for (x, w) in gx.iter().zip(&gw) {
                    let rr = c + h * x;
                    let v = self.value(rr);
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::invalid(format!("weight is {v} at r = {rr}")));
                    }
                    m += w * v * 2.0 * std::f64::consts::PI * rr;
                }
                total += m * h;
                r.push(edge);
                cum.push(total);
            }
        }
        if total == 0.0 {
            return Ok(RadialMap::Empty);
        }
        if !total.is_finite() {
            return Err(Error::invalid(format!("weight has mass {total}")));
        }
        let u = cum.iter().map(|c| c / total).collect();
        Ok(RadialMap::Table { r, u, mass: total })
    }

    /// ∫ w(|x|) dx over the plane.
    pub fn mass(&self) -> Result<f64> {
        Ok(self.importance_map()?.mass())
    }
}

/// Map from u ∈ [0, 1) to a radius, together with the measure factor 2πr·dr/du.
#[derive(Clone, Debug)]
pub enum RadialMap {
    EqualArea {
        inner2: f64,
        outer2: f64,
    },
    Table {
        r: Vec<f64>,
        u: Vec<f64>,
        mass: f64,
    },
    /// Weight vanishing identically.
    Empty,
}

impl RadialMap {
    #[inline]
    pub fn sample(&self, u: f64) -> (f64, f64) {
        match self {
            RadialMap::EqualArea { inner2, outer2 } => {
                let span = outer2 - inner2;
                ((inner2 + u * span).sqrt(), std::f64::consts::PI * span)
            }
            RadialMap::Empty => (0.0, 0.0),
            RadialMap::Table { r, u: cdf, .. } => {
                // last cell with cdf[k] <= u, skipping empty cells
                let k = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1) - 1;
                let du = cdf[k + 1] - cdf[k];
                if du <= 0.0 {
                    return (r[k], 0.0);
                }
                let dr = r[k + 1] - r[k];
                let rad = r[k] + (u - cdf[k]) / du * dr;
                (rad, 2.0 * std::f64::consts::PI * rad * dr / du)
            }
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            RadialMap::EqualArea { inner2, outer2 } => std::f64::consts::PI * (outer2 - inner2),
            RadialMap::Table { mass, .. } => *mass,
            RadialMap::Empty => 0.0,
        }
    }
}
