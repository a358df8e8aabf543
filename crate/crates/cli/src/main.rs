//! `tipemit` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 compute failure (a sweep with some
//! failed points, or a single run that failed), 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tipemit::config::{Config, IacMode};
use tipemit::Error;

#[derive(Parser, Debug)]
#[command(name = "tipemit", version, about = "Optical field emission from metal tips")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for tables and manifests; overrides `output.dir`.
    #[arg(short, long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; overrides `output.workers`.
    #[arg(short = 'j', long, global = true)]
    pub workers: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    /// Validate the configuration and print the resolved plan without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Calibrate the well width and report the ground-state energy.
    GroundState,
    /// Single propagation at the `laser` operating point; writes the flux trace.
    Propagate,
    /// Interferometric autocorrelation trace at the `laser` operating point.
    Iac {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Largest delay; overrides `iac.max_delay_fs`.
        #[arg(long)]
        max_delay_fs: Option<f64>,
    },
    /// Parameter sweep described by the `sweep` section.
    Sweep,
    /// Fit the peak field to measured peak-to-baseline ratios.
    FnFit {
        /// CSV with columns `f_dc_GVm,ratio`.
        #[arg(long)]
        data: PathBuf,
        /// Fit the exponent constant too.
        #[arg(long)]
        fit_b: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Surrogate,
    Tdse,
}

impl From<Mode> for IacMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Surrogate => IacMode::Surrogate,
            Mode::Tdse => IacMode::Tdse,
        }
    }
}

/// Why the command stopped.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Compute(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) => Failure::Config(e.to_string()),
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) | Failure::Compute(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn load_config(opts: &GlobalOpts) -> Result<Config, Failure> {
    let mut cfg = match &opts.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(dir) = &opts.output_dir {
        cfg.output.dir = dir.display().to_string();
    }
    if let Some(w) = opts.workers {
        cfg.output.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_logging(opts: &GlobalOpts) {
    let level = if opts.quiet {
        log::LevelFilter::Error
    } else {
        match opts.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli.global);
    let result = load_config(&cli.global).and_then(|cfg| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.output.workers)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {} workers: {e}", cfg.output.workers)))?;
        commands::dispatch(&cli, cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
