//! Command-line surface of `autores`.

use std::path::PathBuf;

use autores_core::model::{OscillatorParams, ReducedParams};
use autores_core::Result as ModelResult;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Parser)]
#[command(name = "autores", version, about = "Autoresonant capture experiments", args_override_self = true)]
pub struct Cli {
    /// Directory receiving every output file and the run manifest.
    #[arg(long, global = true, env = "AUTORES_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Size of the worker pool for parallel sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Relative and absolute integrator tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// JSON object whose keys are flag names; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate one of the three models from a single initial state.
    Simulate(SimulateArgs),
    /// Build a truncated series solution and tabulate its residual.
    Asymptotics(AsymptoticsArgs),
    /// Stability verdicts for the slow flow or the oscillator.
    Classify(ClassifyArgs),
    /// Sample the Lyapunov bounds on a domain, or search for a passing one.
    Lyapunov(LyapunovArgs),
    /// Capture map over a grid of initial conditions.
    Basin(BasinArgs),
    /// Compare the oscillator envelope with the slow-flow prediction.
    Crosscheck(CrosscheckArgs),
    /// Run a named figure preset.
    Preset(PresetArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Asymptotics(_) => "asymptotics",
            Command::Classify(_) => "classify",
            Command::Lyapunov(_) => "lyapunov",
            Command::Basin(_) => "basin",
            Command::Crosscheck(_) => "crosscheck",
            Command::Preset(_) => "preset",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ReducedArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long = "f", default_value_t = 1.0, allow_hyphen_values = true)]
    pub f: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m: f64,
}

impl ReducedArgs {
    pub fn params(&self) -> ModelResult<ReducedParams> {
        ReducedParams::new(self.lambda, self.f, self.m)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OscillatorArgs {
    #[arg(long, default_value_t = 0.02, allow_hyphen_values = true)]
    pub eps: f64,
    /// Chirp rate; defaults to eps^(4/3) / 2, which makes lambda = 1.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0 / 6.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub f0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub h0: f64,
}

impl OscillatorArgs {
    pub fn params(&self) -> ModelResult<OscillatorParams> {
        let alpha = self.alpha.unwrap_or_else(|| unit_lambda_alpha(self.eps));
        OscillatorParams::new(self.eps, alpha, self.gamma, self.f0, self.h0)
    }
}

/// Chirp rate giving `lambda = 2 alpha eps^(-4/3) = 1`.
pub fn unit_lambda_alpha(eps: f64) -> f64 {
    0.5 * eps.powf(4.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    /// Slow flow with external pumping only.
    Reduced0,
    /// Slow flow with external and decaying parametric pumping.
    Reduced,
    Oscillator,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = System::Reduced)]
    pub system: System,
    #[command(flatten)]
    pub reduced: ReducedArgs,
    #[command(flatten)]
    pub oscillator: OscillatorArgs,
    /// Initial state: `rho,psi` for the slow flows, `u,v` for the oscillator.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub y0: Vec<f64>,
    /// Integration interval `start,end` in the system's own time.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub span: Vec<f64>,
    /// Output sample spacing.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Stop the oscillator once its energy exceeds this fraction of the potential barrier.
    #[arg(long)]
    pub energy_guard: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub reduced: ReducedArgs,
    #[arg(long, default_value_t = 1)]
    pub branch: u8,
    /// Truncation order K.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Log-spaced residual grid `first,last,count`.
    #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e4, 9.0])]
    pub tau_grid: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub reduced: ReducedArgs,
    /// Classify each `m = ratio * m_*` instead of the single `--m`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m_ratios: Vec<f64>,
    /// Classify the oscillator parameters given by `--eps`, `--alpha`, ... instead.
    #[arg(long)]
    pub oscillator: bool,
    #[command(flatten)]
    pub osc: OscillatorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub reduced: ReducedArgs,
    #[arg(long, default_value_t = 1)]
    pub branch: u8,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, default_value_t = 0.05)]
    pub d_star: f64,
    #[arg(long, default_value_t = 1e4)]
    pub eta_star: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps2: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Use the stored domain for this branch and parameter set.
    #[arg(long, conflicts_with = "search")]
    pub fixture: bool,
    /// Grid-search a passing domain and store it in the fixtures file.
    #[arg(long)]
    pub search: bool,
    /// Largest `eta_star` tried by `--search`, as a power of ten.
    #[arg(long, default_value_t = 8)]
    pub search_max_exponent: i32,
    #[arg(long, default_value = default_fixtures())]
    pub fixtures: PathBuf,
}

pub fn default_fixtures() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/lyapunov_domains.json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlowSystem {
    Reduced0,
    Reduced,
}

#[derive(Debug, Clone, Args)]
pub struct BasinArgs {
    #[command(flatten)]
    pub reduced: ReducedArgs,
    #[arg(long, value_enum, default_value_t = SlowSystem::Reduced)]
    pub system: SlowSystem,
    /// Explicit initial amplitudes.
    #[arg(long, value_delimiter = ',', conflicts_with = "rho_range")]
    pub rho: Vec<f64>,
    /// Explicit initial phases.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "psi_range")]
    pub psi: Vec<f64>,
    /// Uniform amplitude grid `first,last,count`.
    #[arg(long, value_delimiter = ',')]
    pub rho_range: Vec<f64>,
    /// Uniform phase grid `first,last,count`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub psi_range: Vec<f64>,
    /// Pair amplitudes and phases element-wise instead of forming their product.
    #[arg(long)]
    pub zip: bool,
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0.8)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    pub osc: OscillatorArgs,
    /// Slow time at which both models start.
    #[arg(long, default_value_t = 1.0)]
    pub tau0: f64,
    /// Initial slow amplitude; defaults to sqrt(lambda tau0).
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub psi0: f64,
    #[arg(long, default_value_t = 40.0)]
    pub tau_end: f64,
    /// Energy guard as a fraction of the potential barrier.
    #[arg(long, default_value_t = 0.9)]
    pub guard: f64,
    /// Fraction of the window ignored when comparing phases.
    #[arg(long, default_value_t = 0.2)]
    pub transient: f64,
    /// Fast-time sample spacing used to locate envelope maxima.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig2a,
    Fig2b,
    Fig2c,
}

#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    #[arg(value_enum)]
    pub name: PresetName,
    /// Oscillator presets only: rescale eps keeping lambda, f and m fixed.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Oscillator presets only: last slow time of the run.
    #[arg(long)]
    pub tau_end: Option<f64>,
    /// Output sample spacing in the system's own time.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
