use serde::{Deserialize, Serialize};

use super::{PointPattern, Window};
use crate::metrics::{CurveKind, CurveTable};
use crate::{Error, Result};

/// Uniform-grid bucket index for nearest-neighbour queries.
#[derive(Clone, Debug)]
pub struct NeighborIndex<'a> {
    points: &'a [[f64; 2]],
    window: Window,
    cell: f64,
    dims: [usize; 2],
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [[f64; 2]], window: Window) -> Self {
        let n = points.len().max(1) as f64;
        let cell = (window.area() / n).sqrt().max(1e-9);
        let dims = [
            ((window.width() / cell).ceil() as usize).clamp(1, 4096),
            ((window.height() / cell).ceil() as usize).clamp(1, 4096),
        ];
        let mut idx = Self {
            points,
            window,
            cell,
            dims,
            start: Vec::new(),
            order: Vec::new(),
        };
        let ncell = dims[0] * dims[1];
        let cells: Vec<usize> = points.iter().map(|p| idx.cell_of(*p)).collect();
        let mut count = vec![0usize; ncell + 1];
        for &c in &cells {
            count[c + 1] += 1;
        }
        for i in 0..ncell {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut order = vec![0; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        idx.start = count;
        idx.order = order;
        idx
    }

    fn coord(&self, p: [f64; 2]) -> [i64; 2] {
        [
            ((p[0] - self.window.x_min) / self.cell).floor() as i64,
            ((p[1] - self.window.y_min) / self.cell).floor() as i64,
        ]
    }

    fn cell_of(&self, p: [f64; 2]) -> usize {
        let c = self.coord(p);
        let cx = c[0].clamp(0, self.dims[0] as i64 - 1) as usize;
        let cy = c[1].clamp(0, self.dims[1] as i64 - 1) as usize;
        cy * self.dims[0] + cx
    }

    /// Distance to and index of the nearest point other than `exclude`.
    pub fn nearest(&self, p: [f64; 2], exclude: Option<usize>) -> Option<(f64, usize)> {
        let available = self.points.len() - usize::from(exclude.is_some());
        if available == 0 {
            return None;
        }
        let c = self.coord(p);
        let c = [
            c[0].clamp(0, self.dims[0] as i64 - 1),
            c[1].clamp(0, self.dims[1] as i64 - 1),
        ];
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.dims[0].max(self.dims[1]) as i64;
        for ring in 0..=max_ring {
            // Every point in ring k is at least (k - 1) cells away.
            if let Some((d, _)) = best {
                if d < (ring - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (cx, cy) = (c[0] + dx, c[1] + dy);
                    if cx < 0 || cy < 0 || cx >= self.dims[0] as i64 || cy >= self.dims[1] as i64 {
                        continue;
                    }
                    let cell = cy as usize * self.dims[0] + cx as usize;
                    for &i in &self.order[self.start[cell]..self.start[cell + 1]] {
                        if Some(i) == exclude {
                            continue;
                        }
                        let q = self.points[i];
                        let d = (q[0] - p[0]).hypot(q[1] - p[1]);
                        if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                            best = Some((d, i));
                        }
                    }
                }
            }
        }
        best
    }
}

/// Border-method options for the empirical distance distributions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Test points per axis for the empty-space function.
    pub grid: usize,
    /// Only reference points at least this far from the border are used;
    /// defaults to max r, capped at a quarter of the shorter side.
    pub border: Option<f64>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            border: None,
        }
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::invalid(
            "distance grid must be non-empty, finite and non-negative",
        ));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("distance grid must be strictly increasing"));
    }
    Ok(())
}

fn border_for(window: &Window, r_grid: &[f64], opts: &EstimatorOptions) -> Result<f64> {
    let half = 0.5 * window.width().min(window.height());
    let b = opts
        .border
        .unwrap_or_else(|| r_grid[r_grid.len() - 1].min(0.5 * half));
    if !(b >= 0.0 && b < half) {
        return Err(Error::invalid(format!(
            "border {b} leaves no interior in the window"
        )));
    }
    Ok(b)
}

fn pooled_cdf(distances: &[f64], r_grid: &[f64]) -> Vec<f64> {
    let mut d = distances.to_vec();
    d.sort_by(f64::total_cmp);
    let n = d.len().max(1) as f64;
    r_grid
        .iter()
        .map(|&r| d.partition_point(|&x| x <= r) as f64 / n)
        .collect()
}

fn nonempty(patterns: &[PointPattern]) -> impl Iterator<Item = &PointPattern> {
    let empty = patterns.iter().filter(|p| p.is_empty()).count();
    if empty > 0 {
        log::info!("skipping {empty} empty pattern(s)");
    }
    patterns.iter().filter(|p| !p.is_empty())
}

fn first_window(patterns: &[PointPattern]) -> Result<Window> {
    patterns
        .first()
        .map(|p| p.window)
        .ok_or_else(|| Error::invalid("no patterns given"))
}

/// Empty-space function: fraction of interior test locations within r of a
/// point, averaged over the non-empty patterns.
pub fn empirical_esf(
    patterns: &[PointPattern],
    r_grid: &[f64],
    opts: &EstimatorOptions,
) -> Result<CurveTable> {
    check_grid(r_grid)?;
    if opts.grid == 0 {
        return Err(Error::invalid("test grid must be positive"));
    }
    let mut dist = Vec::with_capacity(patterns.len() * opts.grid * opts.grid);
    for pat in nonempty(patterns) {
        let w = pat.window;
        let b = border_for(&w, r_grid, opts)?;
        let index = NeighborIndex::new(&pat.points, w);
        let (sx, sy) = (
            (w.width() - 2.0 * b) / opts.grid as f64,
            (w.height() - 2.0 * b) / opts.grid as f64,
        );
        for iy in 0..opts.grid {
            for ix in 0..opts.grid {
                let p = [
                    w.x_min + b + (ix as f64 + 0.5) * sx,
                    w.y_min + b + (iy as f64 + 0.5) * sy,
                ];
                dist.push(index.nearest(p, None).map_or(f64::INFINITY, |x| x.0));
            }
        }
    }
    if dist.is_empty() {
        return Err(Error::invalid("no non-empty patterns given"));
    }
    CurveTable::new(
        "empty_space_empirical",
        "r",
        r_grid.to_vec(),
        pooled_cdf(&dist, r_grid),
        CurveKind::Cdf,
    )
}

/// Nearest-neighbour distance distribution from interior points, pooled
/// over the non-empty patterns (a ratio estimator).
pub fn empirical_nn(
    patterns: &[PointPattern],
    r_grid: &[f64],
    opts: &EstimatorOptions,
) -> Result<CurveTable> {
    check_grid(r_grid)?;
    let mut dist = Vec::new();
    for pat in nonempty(patterns) {
        let w = pat.window;
        let b = border_for(&w, r_grid, opts)?;
        let index = NeighborIndex::new(&pat.points, w);
        for (i, p) in pat.points.iter().enumerate() {
            if w.border_distance(*p) >= b {
                dist.push(index.nearest(*p, Some(i)).map_or(f64::INFINITY, |x| x.0));
            }
        }
    }
    if dist.is_empty() {
        return Err(Error::invalid("no interior points to estimate from"));
    }
    CurveTable::new(
        "nearest_neighbor_empirical",
        "r",
        r_grid.to_vec(),
        pooled_cdf(&dist, r_grid),
        CurveKind::Cdf,
    )
}

/// Translation-corrected Ripley K estimate of one pattern (zeros when the
/// pattern has fewer than two points).
pub fn ripley_k(pattern: &PointPattern, r_grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(r_grid)?;
    let w = pattern.window;
    let n = pattern.len();
    let mut k = vec![0.0; r_grid.len()];
    if n < 2 {
        return Ok(k);
    }
    let rmax = r_grid[r_grid.len() - 1];
    let mut inc = vec![0.0; r_grid.len()];
    let pts = &pattern.points;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (pts[i][0] - pts[j][0]).abs();
            let dy = (pts[i][1] - pts[j][1]).abs();
            let d = dx.hypot(dy);
            if d > rmax {
                continue;
            }
            let overlap = (w.width() - dx) * (w.height() - dy);
            if overlap <= 0.0 {
                continue;
            }
            let slot = r_grid.partition_point(|&r| r < d);
            inc[slot] += 2.0 * w.area() / overlap;
        }
    }
    let scale = w.area() / (n as f64 * (n as f64 - 1.0));
    let mut acc = 0.0;
    for (kv, v) in k.iter_mut().zip(&inc) {
        acc += v;
        *kv = scale * acc;
    }
    Ok(k)
}

/// Mean of the per-pattern K estimates.
pub fn ripley_k_pooled(patterns: &[PointPattern], r_grid: &[f64]) -> Result<CurveTable> {
    first_window(patterns)?;
    let mut sum = vec![0.0; r_grid.len()];
    let mut used = 0usize;
    for p in patterns.iter().filter(|p| p.len() >= 2) {
        for (s, v) in sum.iter_mut().zip(ripley_k(p, r_grid)?) {
            *s += v;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::invalid("no pattern has two or more points"));
    }
    let mean = sum.iter().map(|s| s / used as f64).collect();
    CurveTable::new(
        "ripley_k_empirical",
        "r",
        r_grid.to_vec(),
        mean,
        CurveKind::Plain,
    )
}
