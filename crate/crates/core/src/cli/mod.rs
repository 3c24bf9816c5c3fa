//! Command-line front end: `plan`, `transfer`, `compare` and `report`.

mod commands;
mod inputs;
mod output;
mod settings;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::robot::RobotError;
use crate::transfer::{Method, TransferError};

pub use inputs::{Inputs, PointSet};
pub use output::write_atomic;
pub use settings::{parse_overrides, FlatConfig, RunSettings, TrainerKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Outputs were written but at least one target ran out of budget.
    #[error("transfer budget exhausted for: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Transfer(TransferError::ExpertBelowThreshold { .. } | TransferError::Trainer { .. }) => {
                EXIT_BUDGET
            }
            _ => EXIT_INVALID,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "meta-evolve", version, about = "Plan evolution trees and transfer policies to many robots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the evolution tree for a source and its targets.
    Plan(RunArgs),
    /// Transfer the source expert to every target.
    Transfer {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "meta")]
        method: Method,
    },
    /// Run several methods on the same inputs and tabulate their cost.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "meta,herd,geom-median")]
        methods: Vec<Method>,
    },
    /// Turn report files into plot data.
    Report {
        /// `report.json` files.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Robot specs: the source first, then the targets.
    #[arg(long, num_args = 1.., conflicts_with = "points")]
    pub robots: Vec<PathBuf>,
    /// Normalized source and target coordinates instead of robot specs.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Flat `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub norm: Option<String>,
    #[arg(long)]
    pub trainer: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl RunArgs {
    /// Preset, then the config file, then flags.
    pub fn settings(&self) -> Result<RunSettings> {
        let mut cfg = FlatConfig::default();
        if let Some(path) = &self.config {
            cfg = FlatConfig::load(path)?;
        }
        let mut flags = parse_overrides(&self.set)?;
        let e = &mut flags.entries;
        if let Some(v) = &self.preset {
            e.insert("run.preset".into(), v.clone());
        }
        if let Some(v) = &self.norm {
            e.insert("run.norm".into(), v.clone());
        }
        if let Some(v) = &self.trainer {
            e.insert("run.trainer".into(), v.clone());
        }
        if let Some(v) = self.seed {
            e.insert("transfer.seed".into(), v.to_string());
        }
        cfg.merge(flags);
        // Aliases of the same field would otherwise apply in key order.
        if let Some(v) = cfg.entries.remove("run.norm") {
            cfg.entries.insert("transfer.p_norm".into(), v);
        }
        if let Some(v) = cfg.entries.remove("run.seed") {
            cfg.entries.entry("transfer.seed".into()).or_insert(v);
        }
        RunSettings::resolve(&cfg)
    }

    pub fn inputs(&self) -> Result<Inputs> {
        match (&self.points, self.robots.as_slice()) {
            (Some(p), []) => Inputs::from_points(p),
            (None, files) if files.len() >= 2 => Inputs::from_robots(files),
            (None, _) => Err(CliError::Input("need --robots SOURCE TARGET... or --points FILE".into())),
            (Some(_), _) => Err(CliError::Input("--robots and --points are exclusive".into())),
        }
    }
}

/// Runs a parsed command; the error carries the exit code.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan(args) => commands::plan(&args),
        Command::Transfer { run, method } => commands::transfer(&run, method),
        Command::Compare { run, methods } => commands::compare(&run, &methods),
        Command::Report { reports, out } => commands::report(&reports, &out),
    }
}

/// Parses `args`, runs, prints diagnostics and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
