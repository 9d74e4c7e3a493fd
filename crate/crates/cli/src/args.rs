use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use triplet_core::spectra::GridSpec;

#[derive(Debug, Parser)]
#[command(
    name = "triplet",
    version,
    about = "Quantum-noise spectra, oracle checks and force budgets for a three-mode optomechanical sensor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep R = S_qu/S_SQL over frequency and write one CSV per scenario.
    Sweep(SweepArgs),
    /// Run the stochastic oracle and compare it with the analytic spectrum.
    Oracle(OracleArgs),
    /// Print the regime checks for a parameter set.
    Regime(RegimeArgs),
    /// Print the minimum detectable force budget.
    Minforce(MinforceArgs),
    /// List the named scenarios.
    Presets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table1,
}

/// Where parameters come from. Keys missing from the config fall back to
/// the preset when one is given.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Flat TOML parameter file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Scenario or group name (repeatable). Without one the parameters are
    /// swept as given.
    #[arg(long = "scenario")]
    pub scenarios: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// `{log|linear}:N:lo:hi` in units of Ωτ/2π.
    #[arg(long, default_value_t = GridSpec::default())]
    pub grid: GridSpec,
    /// Also run the simplex search at every point and report its gap.
    #[arg(long)]
    pub check_optimizer: bool,
    /// Repeat the run recorded in a manifest.
    #[arg(long, conflicts_with_all = ["config", "preset", "scenarios", "grid"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long = "scenario")]
    pub scenarios: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Record length, s. Defaults to `segments` × 65536 output samples.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Integration step bound, s; the output interval is 100 steps.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub segments: Option<usize>,
    /// Also write the outputs of trajectory 0 as text.
    #[arg(long)]
    pub dump_timeseries: bool,
    /// Repeat the run recorded in a manifest.
    #[arg(
        long,
        conflicts_with_all = ["config", "preset", "scenarios", "seed", "trajectories", "duration", "dt", "segments"]
    )]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RegimeArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Clone, Args)]
pub struct MinforceArgs {
    #[command(flatten)]
    pub source: Source,
    /// Pulse duration, s. Defaults to the configured τ.
    #[arg(long)]
    pub tau: Option<f64>,
}
