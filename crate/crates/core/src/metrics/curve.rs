use serde::{Deserialize, Serialize};

use crate::kernel::KernelSpec;
use crate::{Error, Result};

/// Raw values further than this outside the admissible range mark a point unreliable.
pub const RAW_DEVIATION_LIMIT: f64 = 0.01;

/// Shape constraint applied when cleaning a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Probability, non-decreasing in the abscissa.
    Cdf,
    /// Probability, non-increasing in the abscissa.
    Ccdf,
    /// Probability without a monotonicity constraint.
    Probability,
    /// Unconstrained (powers, K-function values, densities).
    Plain,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub metric: String,
    pub abscissa: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qmc_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Largest distance of a raw value outside the admissible range/shape.
    pub max_raw_deviation: f64,
    pub unreliable_points: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A sampled curve: cleaned values, the raw estimates, and reliability flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub abscissa: Vec<f64>,
    pub value: Vec<f64>,
    pub raw_value: Vec<f64>,
    pub reliable: Vec<bool>,
    pub kind: CurveKind,
    pub meta: CurveMeta,
}

impl CurveTable {
    /// Clean `raw` according to `kind`: clamp probabilities to [0, 1] and
    /// enforce monotonicity by isotonic regression. Points whose raw value
    /// deviates by more than [`RAW_DEVIATION_LIMIT`] are flagged.
    pub fn new(
        metric: &str,
        abscissa_label: &str,
        abscissa: Vec<f64>,
        raw: Vec<f64>,
        kind: CurveKind,
    ) -> Result<Self> {
        if abscissa.len() != raw.len() {
            return Err(Error::invalid("abscissa and values differ in length"));
        }
        if abscissa.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "{metric}: abscissa must be strictly increasing"
            )));
        }
        if abscissa.iter().chain(&raw).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curve values"));
        }
        let mut value = raw.clone();
        if kind != CurveKind::Plain {
            for v in value.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }
        match kind {
            CurveKind::Cdf => isotonic_increasing(&mut value),
            CurveKind::Ccdf => {
                value.reverse();
                isotonic_increasing(&mut value);
                value.reverse();
            }
            _ => {}
        }
        let dev: Vec<f64> = raw.iter().zip(&value).map(|(r, v)| (r - v).abs()).collect();
        let reliable: Vec<bool> = dev.iter().map(|&d| d <= RAW_DEVIATION_LIMIT).collect();
        let meta = CurveMeta {
            metric: metric.to_string(),
            abscissa: abscissa_label.to_string(),
            max_raw_deviation: dev.iter().copied().fold(0.0, f64::max),
            unreliable_points: reliable.iter().filter(|r| !**r).count(),
            ..Default::default()
        };
        Ok(Self {
            abscissa,
            value,
            raw_value: raw,
            reliable,
            kind,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// Mark point `i` unreliable, with a note.
    pub fn flag(&mut self, i: usize, note: impl Into<String>) {
        if self.reliable[i] {
            self.reliable[i] = false;
            self.meta.unreliable_points += 1;
        }
        self.meta.notes.push(note.into());
    }

    pub(crate) fn with_model(mut self, spec: KernelSpec) -> Self {
        self.meta.model = Some(spec);
        self
    }

    pub(crate) fn with_series(mut self, opts: &crate::numerics::SeriesOptions) -> Self {
        self.meta.qmc_points = Some(opts.qmc_points);
        self.meta.tail_tol = Some(opts.tail_tol);
        self.meta.n_max = Some(opts.n_max);
        self
    }

    /// Linear interpolation of the cleaned values (clamped at the ends).
    pub fn interpolate(&self, x: f64) -> f64 {
        let a = &self.abscissa;
        if x <= a[0] {
            return self.value[0];
        }
        let k = a.partition_point(|&t| t <= x);
        if k >= a.len() {
            return *self.value.last().expect("non-empty");
        }
        let t = (x - a[k - 1]) / (a[k] - a[k - 1]);
        self.value[k - 1] + t * (self.value[k] - self.value[k - 1])
    }
}

/// Pool-adjacent-violators, unweighted, in place.
pub fn isotonic_increasing(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().expect("non-empty") =
                ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (m, n) in blocks {
        v[i..i + n].iter_mut().for_each(|x| *x = m);
        i += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pava_pools_violators() {
        let mut v = [0.1, 0.3, 0.2, 0.5, 0.4, 0.4];
        isotonic_increasing(&mut v);
        assert_eq!(v[1], v[2]);
        assert!((v[1] - 0.25).abs() < 1e-15);
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn flags_large_raw_deviation() {
        let c = CurveTable::new(
            "esf",
            "r_km",
            vec![1.0, 2.0],
            vec![0.5, 1.05],
            CurveKind::Cdf,
        )
        .unwrap();
        assert_eq!(c.value, vec![0.5, 1.0]);
        assert_eq!(c.reliable, vec![true, false]);
        assert!(
            CurveTable::new("x", "r", vec![1.0, 1.0], vec![0.0, 0.0], CurveKind::Plain).is_err()
        );
    }
}
