use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    hex_cell_radius, hex_intensity, sample_hex_perturbed, sample_poisson, DppSampler, PointPattern,
    Window,
};
use crate::kernel::{Family, KernelSpec};
use crate::{Error, KernelModel, Result};

/// Give up after this many consecutive empty draws for one replication.
const MAX_RESAMPLE: usize = 1000;

/// What generates the base-station patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SimSource {
    /// A stationary DPP (or Poisson) kernel model.
    Model { kernel: KernelSpec },
    /// Hexagonal-cell lattice with cell circumradius `cell_radius`, each
    /// point displaced by U(0, η·cell_radius).
    Hex { eta: f64, cell_radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub source: SimSource,
    pub window: Window,
    pub replications: usize,
    pub rng_seed: u64,
    /// Torus margin for DPP simulation; defaults to 3α.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl SimConfig {
    pub fn model(kernel: KernelSpec, window: Window, replications: usize, rng_seed: u64) -> Self {
        Self {
            source: SimSource::Model { kernel },
            window,
            replications,
            rng_seed,
            margin: None,
        }
    }

    /// Perturbed hexagonal lattice whose intensity matches `lambda`.
    pub fn hex(lambda: f64, eta: f64, window: Window, replications: usize, rng_seed: u64) -> Self {
        Self {
            source: SimSource::Hex {
                eta,
                cell_radius: hex_cell_radius(lambda),
            },
            window,
            replications,
            rng_seed,
            margin: None,
        }
    }

    pub fn intensity(&self) -> f64 {
        match &self.source {
            SimSource::Model { kernel } => kernel.lambda,
            SimSource::Hex { cell_radius, .. } => hex_intensity(*cell_radius),
        }
    }
}

#[derive(Clone, Debug)]
enum Sampler {
    Dpp(DppSampler),
    Poisson(f64),
    Hex { lambda: f64, eta: f64 },
}

/// A validated simulation setup; replication `i` always uses the ChaCha8
/// stream `i` of the configured seed, so results do not depend on threading.
#[derive(Clone, Debug)]
pub struct Simulator {
    config: SimConfig,
    sampler: Sampler,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.window.validate()?;
        if config.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        let sampler = match &config.source {
            SimSource::Model { kernel } => {
                let model = KernelModel::from_spec(kernel)?;
                if model.family() == Family::Poisson {
                    Sampler::Poisson(model.lambda())
                } else {
                    let margin = config.margin.unwrap_or(3.0 * model.alpha());
                    Sampler::Dpp(DppSampler::new(&model, config.window, margin)?)
                }
            }
            SimSource::Hex { eta, cell_radius } => {
                if !(*cell_radius > 0.0 && cell_radius.is_finite() && (0.0..=1.0).contains(eta)) {
                    return Err(Error::invalid(
                        "hex source needs cell_radius > 0 and eta in [0, 1]",
                    ));
                }
                Sampler::Hex {
                    lambda: hex_intensity(*cell_radius),
                    eta: *eta,
                }
            }
        };
        Ok(Self { config, sampler })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn window(&self) -> Window {
        self.config.window
    }

    /// The random stream of replication `rep`.
    pub fn rng(&self, rep: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        rng.set_stream(rep as u64);
        rng
    }

    pub fn sample_with(&self, rng: &mut ChaCha8Rng) -> Result<PointPattern> {
        let w = self.config.window;
        match &self.sampler {
            Sampler::Dpp(s) => Ok(s.sample(rng)),
            Sampler::Poisson(lambda) => sample_poisson(w, *lambda, rng),
            Sampler::Hex { lambda, eta } => sample_hex_perturbed(w, *lambda, *eta, rng),
        }
    }

    pub fn sample(&self, rep: usize) -> Result<PointPattern> {
        self.sample_with(&mut self.rng(rep))
    }

    /// Draws replication `rep`, redrawing from the same stream while the
    /// pattern is empty. Returns the pattern, the stream positioned after it,
    /// and the number of redraws.
    pub fn sample_nonempty(&self, rep: usize) -> Result<(PointPattern, ChaCha8Rng, usize)> {
        let mut rng = self.rng(rep);
        for redraws in 0..MAX_RESAMPLE {
            let p = self.sample_with(&mut rng)?;
            if !p.is_empty() {
                if redraws > 0 {
                    log::warn!("replication {rep}: empty pattern, resampled {redraws} time(s)");
                }
                return Ok((p, rng, redraws));
            }
        }
        Err(Error::Numeric(format!(
            "replication {rep}: {MAX_RESAMPLE} consecutive empty patterns"
        )))
    }

    /// All configured replications (may contain empty patterns).
    pub fn patterns(&self) -> Result<Vec<PointPattern>> {
        (0..self.config.replications)
            .into_par_iter()
            .map(|rep| self.sample(rep))
            .collect()
    }
}

/// One replication of a model-based configuration.
pub fn sample_dpp(config: &SimConfig, rep: usize) -> Result<PointPattern> {
    Simulator::new(config.clone())?.sample(rep)
}
