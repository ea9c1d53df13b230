use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, Family, Method};
use crate::units::{ClampPolicy, Unit};

#[derive(Debug, Parser)]
#[command(name = "barista", version, about = "Fit and simulate bid-arrival processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw bid times from a model and write them as CSV.
    Simulate(SimulateArgs),
    /// Fit one model family to a bid file.
    Fit(FitArgs),
    /// Fit all three families and choose one by likelihood-ratio tests.
    Select(SelectArgs),
    /// Write QQ, zoom-window ECDF and KS data for a bid file.
    Diagnose(DiagnoseArgs),
    /// Validate a bid file and summarize it per auction.
    IngestCheck(IngestCheckArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat TOML configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `diagnose`); stdout if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Unit of bid times and durations.
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    /// Auction length in the working unit.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Leave the generation time out of the output.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Bid CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Handling of bid times outside [0, horizon).
    #[arg(long, value_enum)]
    pub clamp_policy: Option<ClampPolicy>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bids per auction.
    #[arg(long)]
    pub n: Option<usize>,
    /// Draw a Poisson number of bids per auction from the intensity instead.
    #[arg(long)]
    pub poisson: bool,
    #[arg(long)]
    pub auctions: Option<usize>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub alpha3: Option<f64>,
    #[arg(long)]
    pub d1: Option<f64>,
    #[arg(long)]
    pub d2: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Bootstrap replicates for standard errors; 0 skips them.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: Input,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: Input,
    /// Comma-separated final windows, e.g. `7d,1d,3h,5min`.
    #[arg(long)]
    pub windows: Option<String>,
    /// A `fit` or `select` report whose model is checked against the data.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// A second bid file to compare against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestCheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: Input,
}

impl Common {
    /// Keys set by these flags, as a config to overlay.
    pub fn as_config(&self) -> Config {
        Config {
            seed: self.seed,
            unit: self.unit,
            horizon: self.horizon,
            ..Config::default()
        }
    }
}

impl Input {
    pub fn as_config(&self) -> Config {
        Config {
            clamp_policy: self.clamp_policy,
            ..Config::default()
        }
    }
}
