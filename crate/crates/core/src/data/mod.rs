//! Base-station data files, fitted presets, configuration and run outputs.

mod config;
mod output;
mod pattern_io;
mod presets;

pub use config::{load_config, parse_config, ConfigFormat, KernelConfig};
pub use output::{build_timestamp, write_curve_csv, write_curve_csv_to, write_json, RunManifest};
pub use pattern_io::{
    estimate_intensity, load_pattern, read_pattern, write_pattern, write_pattern_to, Dataset,
    LoadOptions, RejectedPoint, WindowSpec,
};
pub use presets::{preset, preset_spec, preset_window, PRESET_NAMES};
