//! Resolution of flags and config files into fully specified run configs.

use std::path::{Path, PathBuf};

use dppcell::data::{load_config, preset_spec, preset_window, KernelConfig, RunManifest};
use dppcell::kernel::{Family, KernelSpec};
use dppcell::metrics::{db_grid, PathLossKind, PathLossModel, SirMethod, SirOptions};
use dppcell::numerics::SeriesOptions;
use dppcell::sim::Window;
use dppcell::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{ModelArgs, PathLossArgs, SeriesArgs, SimArgs};

const DEFAULT_WINDOW: f64 = 16.0;

fn cfg_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Base configuration (from `--config`) plus whatever a manifest carried.
#[derive(Debug, Default)]
pub struct Base {
    pub value: Map<String, Value>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl Base {
    /// Loads `path`; a manifest contributes its config echo, seed and threads.
    pub fn load(path: Option<&Path>, subcommand: &str) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let value: Value = load_config(path)?;
        if value.get("subcommand").is_some() && value.get("config").is_some() {
            let m: RunManifest = serde_json::from_value(value).map_err(cfg_err)?;
            if m.subcommand != subcommand {
                return Err(Error::Config(format!(
                    "manifest is for '{}', not '{subcommand}'",
                    m.subcommand
                )));
            }
            let Value::Object(map) = m.config else {
                return Err(Error::Config("manifest config must be an object".into()));
            };
            return Ok(Self {
                value: map,
                seed: m.seed,
                threads: Some(m.threads),
            });
        }
        let Value::Object(mut map) = value else {
            return Err(Error::Config("config must be a table/object".into()));
        };
        let seed = match map.remove("seed") {
            Some(v) => Some(serde_json::from_value(v).map_err(cfg_err)?),
            None => None,
        };
        let threads = match map.remove("threads") {
            Some(v) => Some(serde_json::from_value(v).map_err(cfg_err)?),
            None => None,
        };
        Ok(Self {
            value: map,
            seed,
            threads,
        })
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.value
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone())
                    .map_err(|e| Error::Config(format!("'{key}': {e}")))
            })
            .transpose()
    }
}

/// Accumulates overrides on top of a base and deserializes the result.
pub struct Builder<'a> {
    base: &'a Base,
    map: Map<String, Value>,
}

impl<'a> Builder<'a> {
    pub fn new(base: &'a Base) -> Self {
        Self {
            base,
            map: base.value.clone(),
        }
    }

    pub fn set(&mut self, key: &str, v: Option<impl Serialize>) -> &mut Self {
        if let Some(v) = v {
            self.map.insert(
                key.into(),
                serde_json::to_value(v).expect("serializable override"),
            );
        }
        self
    }

    fn put(&mut self, key: &str, v: impl Serialize) {
        self.map.insert(
            key.into(),
            serde_json::to_value(v).expect("serializable override"),
        );
    }

    /// Resolves `kernel` (and `hex_eta` when `sim`) from flags and base.
    pub fn kernel(&mut self, m: &ModelArgs, sim: bool) -> Result<Option<KernelSpec>> {
        if m.preset.is_some() && m.model.is_some() {
            return Err(Error::Config(
                "--preset and --model are mutually exclusive".into(),
            ));
        }
        let base_spec = match self.base.get::<KernelConfig>("kernel")? {
            Some(k) => Some(k.resolve()?),
            None => None,
        };
        let model = m.model.as_deref().map(str::to_ascii_lowercase);
        let hex = model.as_deref() == Some("hex");
        if hex && !sim {
            return Err(Error::Config(
                "the hex lattice is only available to simulations".into(),
            ));
        }
        let mut spec = if let Some(p) = &m.preset {
            Some(preset_spec(p)?)
        } else if hex {
            Some(KernelSpec {
                family: Family::Poisson,
                lambda: base_spec.map_or(f64::NAN, |s| s.lambda),
                alpha: None,
                nu: None,
            })
        } else if let Some(f) = &model {
            Some(KernelSpec {
                family: f.parse()?,
                lambda: f64::NAN,
                alpha: None,
                nu: None,
            })
        } else {
            base_spec
        };
        if let Some(s) = spec.as_mut() {
            if let Some(l) = m.lambda {
                s.lambda = l;
            }
            if m.alpha.is_some() {
                s.alpha = m.alpha;
            }
            if m.nu.is_some() {
                s.nu = m.nu;
            }
            if s.lambda.is_nan() {
                return Err(Error::Config("--model needs --lambda".into()));
            }
            self.put("kernel", *s);
        } else if m.lambda.is_some() || m.alpha.is_some() || m.nu.is_some() {
            return Err(Error::Config(
                "kernel parameters given without --preset or --model".into(),
            ));
        }
        if sim {
            if hex {
                let eta: Option<f64> = self.base.get("hex_eta")?;
                self.put("hex_eta", eta.unwrap_or(0.0));
            } else if m.preset.is_some() || m.model.is_some() {
                self.map.remove("hex_eta");
            }
        }
        Ok(spec)
    }

    pub fn series(&mut self, key: &str, a: &SeriesArgs) -> Result<()> {
        let mut s: SeriesOptions = self.base.get(key)?.unwrap_or_default();
        patch_series(&mut s, a);
        self.put(key, s);
        Ok(())
    }

    pub fn sir_options(
        &mut self,
        a: &SeriesArgs,
        method: Option<&str>,
        r0_nodes: Option<usize>,
    ) -> Result<()> {
        let mut o: SirOptions = self.base.get("options")?.unwrap_or_default();
        patch_series(&mut o.series, a);
        if let Some(m) = method {
            o.method = parse_method(m)?;
        }
        if let Some(n) = r0_nodes {
            o.r0_nodes = n;
        }
        self.put("options", o);
        Ok(())
    }

    pub fn method(&mut self, method: Option<&str>) -> Result<()> {
        if let Some(m) = method {
            self.put("method", parse_method(m)?);
        }
        Ok(())
    }

    pub fn pathloss(&mut self, a: &PathLossArgs, default: PathLossModel) -> Result<()> {
        let mut p: PathLossModel = self.base.get("pathloss")?.unwrap_or(default);
        if let Some(k) = &a.pathloss {
            p.kind =
                serde_json::from_value(Value::String(k.to_ascii_lowercase().replace('-', "_")))
                    .map_err(|_| {
                        Error::Config(format!(
                            "unknown path loss '{k}' (pure_power | bounded_power)"
                        ))
                    })?;
        }
        if let Some(b) = a.beta {
            p.beta = b;
        }
        self.put("pathloss", p);
        Ok(())
    }

    /// Window and replication overrides for simulations.
    pub fn sim(&mut self, m: &ModelArgs, a: &SimArgs) -> Result<()> {
        if let Some(w) = a.window {
            self.put("window", Window::rect(w, w)?);
        } else if let Some(p) = &m.preset {
            self.put("window", preset_window(p)?);
        } else if !self.map.contains_key("window") {
            self.put("window", Window::rect(DEFAULT_WINDOW, DEFAULT_WINDOW)?);
        }
        self.set("replications", a.reps);
        if a.eta.is_some() {
            if !self.map.contains_key("hex_eta") {
                return Err(Error::Config("--eta applies to --model hex only".into()));
            }
            self.set("hex_eta", a.eta);
        }
        Ok(())
    }

    pub fn build<T: DeserializeOwned>(self) -> Result<T> {
        if !self.map.contains_key("kernel") {
            return Err(Error::Config(
                "no model given: use --preset or --model".into(),
            ));
        }
        serde_json::from_value(Value::Object(self.map)).map_err(cfg_err)
    }
}

fn patch_series(s: &mut SeriesOptions, a: &SeriesArgs) {
    if let Some(q) = a.qmc {
        s.qmc_points = q;
    }
    if let Some(n) = a.n_max {
        s.n_max = n;
    }
    if let Some(t) = a.tail_tol {
        s.tail_tol = t;
    }
}

fn parse_method(m: &str) -> Result<SirMethod> {
    serde_json::from_value(Value::String(m.to_ascii_lowercase()))
        .map_err(|_| Error::Config(format!("unknown method '{m}' (fredholm | series)")))
}

/// Parses `start:step:stop`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("grid '{s}' is not start:step:stop")))?;
    match nums[..] {
        [a, st, b] => db_grid(a, st, b),
        [a] => Ok(vec![a]),
        _ => Err(Error::Config(format!("grid '{s}' is not start:step:stop"))),
    }
}

fn d_rmax() -> f64 {
    2.0
}
fn d_rstep() -> f64 {
    0.05
}
fn d_tgrid() -> String {
    "-10:1:20".into()
}
fn d_power() -> f64 {
    1.0
}
fn d_one() -> usize {
    1
}
fn d_reps() -> usize {
    1000
}
fn d_env_reps() -> usize {
    199
}
fn d_statistic() -> String {
    "k".into()
}
fn d_r0_grid() -> String {
    "0.1:0.1:3".into()
}
fn d_sgrid() -> String {
    "0:0.5:10".into()
}
fn d_r0() -> f64 {
    0.5
}
fn d_assoc() -> String {
    "nearest_bs".into()
}
fn d_env_rmax() -> f64 {
    3.0
}
fn d_env_rstep() -> f64 {
    0.1
}

pub fn pure_power_4() -> PathLossModel {
    PathLossModel {
        kind: PathLossKind::PurePower,
        beta: 4.0,
    }
}

pub fn bounded_4() -> PathLossModel {
    PathLossModel {
        kind: PathLossKind::BoundedPower,
        beta: 4.0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub kernel: KernelSpec,
    #[serde(default = "d_rmax")]
    pub rmax: f64,
    #[serde(default = "d_rstep")]
    pub rstep: f64,
    #[serde(default)]
    pub series: SeriesOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanInterferenceConfig {
    pub kernel: KernelSpec,
    pub pathloss: PathLossModel,
    #[serde(default = "d_power")]
    pub power: f64,
    #[serde(default = "d_r0_grid")]
    pub r0: String,
    #[serde(default = "d_assoc")]
    pub association: String,
    #[serde(default)]
    pub method: SirMethod,
    #[serde(default)]
    pub series: SeriesOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceConfig {
    pub kernel: KernelSpec,
    pub pathloss: PathLossModel,
    #[serde(default = "d_power")]
    pub power: f64,
    #[serde(default = "d_r0")]
    pub r0: f64,
    #[serde(default = "d_sgrid")]
    pub sgrid: String,
    #[serde(default)]
    pub method: SirMethod,
    #[serde(default)]
    pub series: SeriesOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirConfig {
    pub kernel: KernelSpec,
    pub pathloss: PathLossModel,
    #[serde(default = "d_tgrid")]
    pub tgrid: String,
    #[serde(default)]
    pub options: SirOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirApproxConfig {
    pub kernel: KernelSpec,
    pub pathloss: PathLossModel,
    #[serde(default = "d_tgrid")]
    pub tgrid: String,
}

/// Pattern source shared by the simulation subcommands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub kernel: KernelSpec,
    /// Perturbed hex lattice with the kernel's intensity instead of the kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hex_eta: Option<f64>,
    pub window: Window,
    #[serde(default = "d_one")]
    pub replications: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hex_eta: Option<f64>,
    pub window: Window,
    #[serde(default = "d_reps")]
    pub replications: usize,
    pub pathloss: PathLossModel,
    #[serde(default = "d_tgrid")]
    pub tgrid: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub pattern: PathBuf,
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hex_eta: Option<f64>,
    /// Simulation window; defaults to the observed pattern's window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default = "d_env_reps")]
    pub replications: usize,
    #[serde(default = "d_statistic")]
    pub statistic: String,
    #[serde(default = "d_env_rmax")]
    pub rmax: f64,
    #[serde(default = "d_env_rstep")]
    pub rstep: f64,
    pub pathloss: PathLossModel,
    #[serde(default = "d_tgrid")]
    pub tgrid: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_grid("-10:5:10").unwrap(),
            vec![-10.0, -5.0, 0.0, 5.0, 10.0]
        );
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn preset_then_lambda_override() {
        let base = Base::default();
        let mut b = Builder::new(&base);
        let m = ModelArgs {
            preset: Some("houston-gauss".into()),
            lambda: Some(0.3),
            ..Default::default()
        };
        let spec = b.kernel(&m, false).unwrap().unwrap();
        assert_eq!(spec.lambda, 0.3);
        assert_eq!(spec.alpha, Some(0.8417));
    }

    #[test]
    fn model_requires_lambda() {
        let base = Base::default();
        let m = ModelArgs {
            model: Some("gauss".into()),
            alpha: Some(1.0),
            ..Default::default()
        };
        assert!(Builder::new(&base).kernel(&m, false).is_err());
    }
}
