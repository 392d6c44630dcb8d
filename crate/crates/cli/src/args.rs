use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const DEFAULT_SEED: u64 = 20_150_401;

#[derive(Parser, Debug)]
#[command(
    name = "dppcell",
    version,
    about = "DPP models of cellular base-station layouts: analytic metrics and simulation",
    after_help = "Presets: houston-gauss, houston-cauchy, houston-gengamma, la-gauss, la-cauchy, la-gengamma.\n\
                  Grids are start:step:stop (inclusive); SIR thresholds are in dB."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Configuration file (TOML or JSON), or a run manifest to replay.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Kernel selection shared by all model-based subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Built-in parameter set.
    #[arg(long)]
    pub preset: Option<String>,
    /// Kernel family: gauss, cauchy, gengamma or poisson (simulations also accept hex).
    #[arg(long)]
    pub model: Option<String>,
    /// Intensity (BS per km²).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Scale parameter α (km).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shape parameter ν.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SeriesArgs {
    /// QMC points per series order (power of two).
    #[arg(long)]
    pub qmc: Option<usize>,
    /// Maximum series order.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Tail-bound tolerance for truncating the series.
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PathLossArgs {
    /// Path-loss exponent β (> 2).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Path-loss form: pure_power (r^-β) or bounded_power (min(1, r^-β)).
    #[arg(long)]
    pub pathloss: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimArgs {
    /// Square window side in km (default: preset window, else 16).
    #[arg(long)]
    pub window: Option<f64>,
    /// Number of replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Hex-lattice perturbation η in [0, 1] (with --model hex).
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Empty-space function F(r).
    Esf(RadialArgs),
    /// Nearest-neighbour distance CDF D(r).
    Nnf(RadialArgs),
    /// Ripley's K function.
    Kfn(RadialArgs),
    /// Mean interference against the serving-BS distance r0.
    MeanInterference(MeanInterferenceArgs),
    /// Laplace transform of the interference given the nearest BS at r0.
    Laplace(LaplaceArgs),
    /// Exact coverage probability P(SIR > T).
    Sir(SirArgs),
    /// Diagonal approximation of the coverage probability.
    SirApprox(SirApproxArgs),
    /// Simulate base-station patterns.
    Simulate(SimulateArgs),
    /// Monte-Carlo coverage probability with a 95 % envelope.
    Coverage(CoverageArgs),
    /// Test a point pattern against simulation envelopes of a model.
    EnvelopeTest(EnvelopeArgs),
    /// Repulsiveness coefficient μ.
    Mu(ModelOnlyArgs),
    /// List the built-in presets.
    Presets,
    /// Check the existence condition of a kernel.
    CheckExistence(ModelOnlyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Esf(_) => "esf",
            Self::Nnf(_) => "nnf",
            Self::Kfn(_) => "kfn",
            Self::MeanInterference(_) => "mean-interference",
            Self::Laplace(_) => "laplace",
            Self::Sir(_) => "sir",
            Self::SirApprox(_) => "sir-approx",
            Self::Simulate(_) => "simulate",
            Self::Coverage(_) => "coverage",
            Self::EnvelopeTest(_) => "envelope-test",
            Self::Mu(_) => "mu",
            Self::Presets => "presets",
            Self::CheckExistence(_) => "check-existence",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelOnlyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RadialArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Largest radius (km).
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Radius step (km).
    #[arg(long)]
    pub rstep: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MeanInterferenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Serving-BS distances r0 as start:step:stop (km).
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<String>,
    /// fixed_bs (a point of the process at r0) or nearest_bs.
    #[arg(long)]
    pub association: Option<String>,
    /// Evaluation: fredholm (exact, default) or series (QMC).
    #[arg(long)]
    pub method: Option<String>,
    /// Transmit power.
    #[arg(long)]
    pub power: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct LaplaceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Distance to the nearest BS (km).
    #[arg(long)]
    pub r0: Option<f64>,
    /// Transform variable s as start:step:stop.
    #[arg(long, allow_hyphen_values = true)]
    pub sgrid: Option<String>,
    /// Evaluation: fredholm (exact, default) or series (QMC).
    #[arg(long)]
    pub method: Option<String>,
    /// Transmit power.
    #[arg(long)]
    pub power: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SirArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Thresholds in dB as start:step:stop.
    #[arg(long, allow_hyphen_values = true)]
    pub tgrid: Option<String>,
    /// Numerator evaluation: fredholm or series.
    #[arg(long)]
    pub method: Option<String>,
    /// Gauss–Legendre nodes for the r0 integral.
    #[arg(long)]
    pub r0_nodes: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SirApproxArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Thresholds in dB as start:step:stop.
    #[arg(long, allow_hyphen_values = true)]
    pub tgrid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Thresholds in dB as start:step:stop.
    #[arg(long, allow_hyphen_values = true)]
    pub tgrid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub pathloss: PathLossArgs,
    /// Observed pattern (CSV with x_km, y_km columns).
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Summary statistic: k or coverage.
    #[arg(long)]
    pub statistic: Option<String>,
    /// Largest radius for the K statistic (km).
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Radius step for the K statistic (km).
    #[arg(long)]
    pub rstep: Option<f64>,
    /// Thresholds in dB for the coverage statistic.
    #[arg(long, allow_hyphen_values = true)]
    pub tgrid: Option<String>,
}
