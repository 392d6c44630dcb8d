use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::CurveTable;
use crate::Result;

/// Writes `<abscissa>,value,raw_value,reliable_flag` rows. Numbers use the
/// shortest exact decimal form, so equal curves give identical bytes.
pub fn write_curve_csv_to(mut out: impl Write, curve: &CurveTable) -> Result<()> {
    let label = if curve.meta.abscissa.is_empty() {
        "x"
    } else {
        curve.meta.abscissa.as_str()
    };
    writeln!(out, "{label},value,raw_value,reliable_flag")?;
    for i in 0..curve.len() {
        writeln!(
            out,
            "{},{},{},{}",
            curve.abscissa[i],
            curve.value[i],
            curve.raw_value[i],
            u8::from(curve.reliable[i])
        )?;
    }
    Ok(())
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &CurveTable) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_curve_csv_to(&mut f, curve)?;
    f.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn build_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        })
}

/// Record of one run: enough to reproduce every output it lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// The fully resolved configuration; accepted back as `--config`.
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub created_unix: u64,
    #[serde(default)]
    pub status: String,
}
