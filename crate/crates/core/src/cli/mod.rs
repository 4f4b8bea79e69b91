//! Command-line front end. [`run`] executes a parsed [`Cli`] and returns the
//! report bytes; the binary only handles process I/O and exit codes.

mod commands;
pub mod rows;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::estimation::EstimationError;
use crate::io::{IngestError, ReportFormat};
use crate::model::ModelError;
use crate::multipath::{MultipathError, Window};

pub use commands::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Input,
    Domain,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Input => 3,
            ErrorClass::Domain => 4,
        }
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Usage, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Input, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Domain, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Model(_) | IngestError::Multipath(_) => CliError::domain(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<MultipathError> for CliError {
    fn from(e: MultipathError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        CliError::domain(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "invivo", version, about = "In-body wireless channel modeling and measurement analysis")]
pub struct Cli {
    /// Run configuration (TOML); flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter file; defaults to the bundled parameter set
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Master seed, required by stochastic subcommands
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report format: json or csv
    #[arg(long, global = true)]
    pub format: Option<ReportFormat>,
    /// Write the report here instead of standard output
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// More diagnostics on standard error
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// Files the command reads.
    pub fn input_paths(&self) -> Vec<&PathBuf> {
        let mut paths: Vec<&PathBuf> = self.config.iter().chain(&self.params).collect();
        match &self.command {
            Command::Ingest { csv, s2p, .. } => paths.extend(csv.iter().chain(s2p)),
            Command::Fit { csv, .. } => paths.push(csv),
            Command::Pdp { s2p, .. } | Command::Stats { s2p, .. } => paths.push(s2p),
            Command::Classify { s2p, .. } => paths.extend(s2p),
            Command::Compare { csv, .. } => paths.extend(csv),
            _ => {}
        }
        paths
    }
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    /// 915MHz or 2.4GHz
    #[arg(long)]
    pub band: String,
    /// heart, stomach, kidneys, intestine or torso
    #[arg(long, default_value = "torso")]
    pub region: String,
    /// anterior, posterior, left or right (selects direction-keyed parameters)
    #[arg(long)]
    pub direction: Option<String>,
}

#[derive(Debug, Args)]
pub struct GroupingArgs {
    #[arg(long)]
    pub by_band: bool,
    #[arg(long)]
    pub by_region: bool,
    #[arg(long)]
    pub by_direction: bool,
    #[arg(long)]
    pub by_source: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// rectangular or hann
    #[arg(long)]
    pub window: Option<Window>,
    /// Zero-padding factor of the inverse DFT
    #[arg(long)]
    pub pad: Option<usize>,
    /// Noise-floor gate below the strongest tap, e.g. 30dB
    #[arg(long)]
    pub floor: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitTable {
    /// intercept and decay rate per group
    Fits,
    /// per-depth shadowing variance per group
    Shadowing,
    /// mean path loss per group and depth
    DepthMeans,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an input file and summarize it
    Ingest {
        #[arg(long, conflicts_with = "s2p", required_unless_present = "s2p")]
        csv: Option<PathBuf>,
        #[arg(long)]
        s2p: Option<PathBuf>,
        /// Skip invalid CSV rows instead of failing
        #[arg(long)]
        lenient: bool,
    },
    /// Fit intercept and decay rate from a CSV path-loss table
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        grouping: GroupingArgs,
        #[arg(long)]
        lenient: bool,
        #[arg(long, value_enum, default_value = "fits")]
        table: FitTable,
    },
    /// Mean path loss at one or more depths
    Predict {
        #[command(flatten)]
        context: ContextArgs,
        /// Depths, e.g. 50mm or 5cm
        #[arg(long, num_args = 1.., required_unless_present = "sweep")]
        depth: Vec<String>,
        /// Evaluate at 10, 20, ..., 100 mm
        #[arg(long)]
        sweep: bool,
    },
    /// Draw path-loss realizations including shadowing
    Sample {
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        depth: String,
        #[arg(long, short = 'n', default_value_t = 10)]
        trials: u64,
    },
    /// Closed-form probability that path loss exceeds a limit
    Outage {
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        depth: String,
        /// Maximum tolerable path loss, e.g. 60dB
        #[arg(long)]
        max_pl: String,
    },
    /// Monte Carlo summary of sampled path loss and outage
    Montecarlo {
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        depth: String,
        #[arg(long, short = 'n', default_value_t = 100_000)]
        trials: u64,
        /// Outage threshold; defaults to the model mean
        #[arg(long)]
        threshold: Option<String>,
        /// Worker threads (0 = all cores); does not affect results
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// In-body plus free-space link budget
    Linkbudget {
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        depth: String,
        /// Body surface to off-body node distance; 0 omits the segment
        #[arg(long, default_value = "0m")]
        distance: String,
        #[arg(long, default_value = "0dBm", allow_hyphen_values = true)]
        pt: String,
        #[arg(long, allow_hyphen_values = true)]
        sensitivity: String,
        /// Margin used for the required transmit power column
        #[arg(long, default_value = "0dB")]
        margin: String,
        /// Draw the in-body loss with shadowing instead of using the mean
        #[arg(long)]
        shadowing: bool,
        #[arg(long, default_value_t = 1.0)]
        tx_gain: f64,
        #[arg(long, default_value_t = 1.0)]
        rx_gain: f64,
        #[arg(long, default_value_t = 0.0)]
        s11: f64,
        #[arg(long, default_value_t = 0.0)]
        s22: f64,
    },
    /// Power delay profile of a Touchstone sweep
    Pdp {
        #[arg(long)]
        s2p: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Delay statistics, coherence bandwidth and band-average path loss
    Stats {
        #[arg(long)]
        s2p: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Signal bandwidth to classify against the coherence bandwidth
        #[arg(long)]
        signal_bw: Option<String>,
    },
    /// Flat versus frequency-selective for a signal bandwidth
    Classify {
        #[arg(long)]
        signal_bw: String,
        /// Coherence bandwidth, e.g. 7.25MHz
        #[arg(long, group = "coherence")]
        bc: Option<String>,
        /// RMS delay spread, e.g. 2.76ns
        #[arg(long, group = "coherence")]
        sigma_tau: Option<String>,
        /// Derive the coherence bandwidth from a sweep
        #[arg(long, group = "coherence")]
        s2p: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Compare two models: decay-rate ratio and per-depth deltas
    Compare {
        /// Selector, e.g. band=2.4GHz,region=torso
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Fit the models from this dataset instead of the parameter file
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        grouping: GroupingArgs,
    },
}
