use crate::kernel::{Family, KernelSpec};
use crate::sim::Window;
use crate::{Error, KernelModel, Result};

/// Names of the built-in fitted models.
pub const PRESET_NAMES: [&str; 6] = [
    "houston-gauss",
    "houston-cauchy",
    "houston-gengamma",
    "la-gauss",
    "la-cauchy",
    "la-gengamma",
];

fn spec(family: Family, lambda: f64, alpha: f64, nu: Option<f64>) -> KernelSpec {
    KernelSpec {
        family,
        lambda,
        alpha: Some(alpha),
        nu,
    }
}

/// Parameters of a built-in model.
pub fn preset_spec(name: &str) -> Result<KernelSpec> {
    Ok(match name {
        "houston-gauss" => spec(Family::Gauss, 0.4492, 0.8417, None),
        "houston-cauchy" => spec(Family::Cauchy, 0.4492, 1.558, Some(3.424)),
        "houston-gengamma" => spec(Family::GenGamma, 0.4492, 2.539, Some(2.63)),
        "la-gauss" => spec(Family::Gauss, 0.2347, 1.165, None),
        "la-cauchy" => spec(Family::Cauchy, 0.2347, 2.13, Some(3.344)),
        "la-gengamma" => spec(Family::GenGamma, 0.2347, 3.446, Some(2.505)),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    })
}

/// A built-in model, validated.
pub fn preset(name: &str) -> Result<KernelModel> {
    KernelModel::from_spec(&preset_spec(name)?)
}

/// Observation window of the data set a preset was fitted to
/// (16 × 16 km for Houston, 28 × 28 km for LA).
pub fn preset_window(name: &str) -> Result<Window> {
    preset_spec(name)?;
    if name.starts_with("houston") {
        Window::rect(16.0, 16.0)
    } else {
        Window::rect(28.0, 28.0)
    }
}
