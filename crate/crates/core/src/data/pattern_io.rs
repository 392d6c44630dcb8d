use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sim::{PointPattern, Window};
use crate::{Error, Result};

const WINDOW_TAG: &str = "# window:";

/// How the observation window of a loaded pattern is determined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    /// The `# window:` header written by [`write_pattern`] if present,
    /// otherwise the bounding box.
    #[default]
    Auto,
    BoundingBox,
    Explicit(Window),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub window: WindowSpec,
    pub x_column: String,
    pub y_column: String,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            window: WindowSpec::Auto,
            x_column: "x_km".into(),
            y_column: "y_km".into(),
        }
    }
}

impl LoadOptions {
    pub fn with_window(window: Window) -> Self {
        Self {
            window: WindowSpec::Explicit(window),
            ..Default::default()
        }
    }
}

/// A point dropped because it lies outside the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedPoint {
    /// 1-based line number in the file.
    pub line: usize,
    pub point: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub pattern: PointPattern,
    pub name: String,
    pub source: PathBuf,
    pub rejected: Vec<RejectedPoint>,
    pub duplicates: usize,
}

impl Dataset {
    /// Human-readable warnings about dropped rows.
    pub fn warnings(&self) -> Vec<String> {
        let mut w: Vec<String> = self
            .rejected
            .iter()
            .map(|r| {
                format!(
                    "line {}: point ({}, {}) outside the window",
                    r.line, r.point[0], r.point[1]
                )
            })
            .collect();
        if self.duplicates > 0 {
            w.push(format!("{} duplicate point(s) removed", self.duplicates));
        }
        w
    }
}

/// Points per km².
pub fn estimate_intensity(dataset: &Dataset) -> f64 {
    dataset.pattern.intensity()
}

/// Reads a base-station CSV (header with the configured column names).
pub fn load_pattern(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut ds = read_pattern(file, opts)?;
    ds.name = name;
    ds.source = path.to_path_buf();
    Ok(ds)
}

pub fn read_pattern(mut reader: impl Read, opts: &LoadOptions) -> Result<Dataset> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let header_window = text
        .lines()
        .find_map(|l| l.trim().strip_prefix(WINDOW_TAG))
        .map(parse_window)
        .transpose()?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Parse(format!(
                "missing column '{name}' (have: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (xi, yi) = (column(&opts.x_column)?, column(&opts.y_column)?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("line {line}: '{raw}' is not a finite number")))
        };
        rows.push((line, [field(xi)?, field(yi)?]));
    }
    let window = match opts.window {
        WindowSpec::Explicit(w) => {
            w.validate()?;
            w
        }
        WindowSpec::Auto if header_window.is_some() => header_window.expect("checked"),
        _ => {
            let pts: Vec<[f64; 2]> = rows.iter().map(|r| r.1).collect();
            if pts.is_empty() {
                return Err(Error::Parse("no data rows".into()));
            }
            Window::bounding_box(&pts)?
        }
    };
    let mut rejected = Vec::new();
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(rows.len());
    let mut seen = std::collections::HashSet::new();
    let mut duplicates = 0;
    for (line, p) in rows {
        if !window.contains(p) {
            log::warn!(
                "line {line}: point ({}, {}) outside the window, dropped",
                p[0],
                p[1]
            );
            rejected.push(RejectedPoint { line, point: p });
        } else if !seen.insert([p[0].to_bits(), p[1].to_bits()]) {
            duplicates += 1;
        } else {
            points.push(p);
        }
    }
    if duplicates > 0 {
        log::warn!("{duplicates} duplicate point(s) removed");
    }
    if points.is_empty() {
        return Err(Error::Parse("no points left after filtering".into()));
    }
    Ok(Dataset {
        pattern: PointPattern::new(window, points)?,
        name: String::new(),
        source: PathBuf::new(),
        rejected,
        duplicates,
    })
}

fn parse_window(s: &str) -> Result<Window> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad window header '{s}': {e}")))?;
    match v[..] {
        [x0, x1, y0, y1] => Window::new(x0, x1, y0, y1),
        _ => Err(Error::Parse(format!(
            "window header needs 4 values, got '{s}'"
        ))),
    }
}

/// Writes `x_km,y_km` rows preceded by a `# window:` comment; values use the
/// shortest exact decimal form, so loading the file reproduces the pattern.
pub fn write_pattern_to(mut out: impl Write, pattern: &PointPattern) -> Result<()> {
    let w = pattern.window;
    writeln!(
        out,
        "{WINDOW_TAG} {},{},{},{}",
        w.x_min, w.x_max, w.y_min, w.y_max
    )?;
    writeln!(out, "x_km,y_km")?;
    for p in &pattern.points {
        writeln!(out, "{},{}", p[0], p[1])?;
    }
    Ok(())
}

pub fn write_pattern(path: impl AsRef<Path>, pattern: &PointPattern) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pattern_to(&mut f, pattern)?;
    f.flush()?;
    Ok(())
}
