use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "su11",
    version,
    about = "Gaussian-state simulations of a pulse-pumped SU(1,1) interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a state and write its covariance blocks as JSON.
    Build(StateArgs),
    /// Photon-number covariance, optionally with the variance of a weighted sum.
    PhotonStats(PhotonArgs),
    /// Scan L_mu over a gain grid and classify each bipartition.
    PptScan(ScanArgs),
    /// Run the built-in consistency suites and write a report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every state-producing command. Anything given here
/// overrides the same field in `--config`.
#[derive(Debug, Default, Args)]
pub struct StateArgs {
    /// TOML file with any of the fields below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// su11, su11-sub, bs, bs-sub, or balanced (two modes through both amplifiers).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Pump phase of the second amplifier, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Beam-splitter phase, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhotonArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Comma-separated weights, one per mode, or `alternating` for +1, -1, ...
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// `start:stop:steps` for both gains, or `r1-axis,r2-axis`.
    #[arg(long)]
    pub grid: Option<String>,
    /// `all`, `cover-all`, or a `;`-separated list such as `A={1}|B={2};1,3|2,4`.
    #[arg(long)]
    pub bipartitions: Option<String>,
    /// Verdict summary file. Defaults to `<out>.verdicts.csv` next to a CSV `--out`.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random parameter draws per family and mode count.
    #[arg(long, default_value_t = 5)]
    pub draws: usize,
    /// Largest mode count checked against the Fock-space simulator.
    #[arg(long, default_value_t = 4)]
    pub fock_max_modes: usize,
    /// Perturb the closed-form states before comparing them (exercises the failure path).
    #[arg(long, hide = true)]
    pub corrupt_analytic: bool,
}
