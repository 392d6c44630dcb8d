use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned observation window, km.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let w = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        w.validate()?;
        Ok(w)
    }

    /// [0, width] × [0, height].
    pub fn rect(width: f64, height: f64) -> Result<Self> {
        Self::new(0.0, width, 0.0, height)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("degenerate window {self:?}")))
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    /// Distance from `p` (inside) to the window boundary.
    pub fn border_distance(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.x_min)
            .min(self.x_max - p[0])
            .min(p[1] - self.y_min)
            .min(self.y_max - p[1])
    }

    pub fn expanded(&self, m: f64) -> Self {
        Self {
            x_min: self.x_min - m,
            x_max: self.x_max + m,
            y_min: self.y_min - m,
            y_max: self.y_max + m,
        }
    }

    /// Smallest window containing all points (errors when degenerate).
    pub fn bounding_box(points: &[[f64; 2]]) -> Result<Self> {
        let mut w = Self {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in points {
            w.x_min = w.x_min.min(p[0]);
            w.x_max = w.x_max.max(p[0]);
            w.y_min = w.y_min.min(p[1]);
            w.y_max = w.y_max.max(p[1]);
        }
        w.validate()?;
        Ok(w)
    }
}

/// Finite point configuration observed in a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    pub window: Window,
    pub points: Vec<[f64; 2]>,
}

impl PointPattern {
    /// Validates that all points are inside the window and pairwise distinct.
    pub fn new(window: Window, points: Vec<[f64; 2]>) -> Result<Self> {
        window.validate()?;
        if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
            return Err(Error::invalid(format!(
                "point {p:?} lies outside the window"
            )));
        }
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate points in pattern"));
        }
        Ok(Self { window, points })
    }

    pub(crate) fn new_unchecked(window: Window, points: Vec<[f64; 2]>) -> Self {
        Self { window, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn intensity(&self) -> f64 {
        self.len() as f64 / self.window.area()
    }
}
