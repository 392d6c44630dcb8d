use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::preset_spec;
use crate::kernel::KernelSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigFormat {
    Json,
    Toml,
}

impl ConfigFormat {
    /// From the file extension (`.json`, `.toml`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Self::Json),
            "toml" => Some(Self::Toml),
            _ => None,
        }
    }
}

pub fn parse_config<T: DeserializeOwned>(text: &str, format: ConfigFormat) -> Result<T> {
    match format {
        ConfigFormat::Json => {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON config: {e}")))
        }
        ConfigFormat::Toml => {
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML config: {e}")))
        }
    }
}

/// Reads a JSON or TOML file; without a known extension JSON is tried first.
pub fn load_config<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    match ConfigFormat::from_path(path) {
        Some(f) => parse_config(&text, f),
        None => parse_config(&text, ConfigFormat::Json)
            .or_else(|_| parse_config(&text, ConfigFormat::Toml)),
    }
}

/// A kernel given either by preset name or by explicit parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelConfig {
    Preset { preset: String },
    Spec(KernelSpec),
}

impl KernelConfig {
    pub fn resolve(&self) -> Result<KernelSpec> {
        match self {
            Self::Preset { preset } => preset_spec(preset),
            Self::Spec(s) => Ok(*s),
        }
    }
}
