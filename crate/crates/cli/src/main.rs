//! `crb`: experiment runner for the coupled regularised Boussinesq toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
//! 1 anything else.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use crb_core::scenario::{preset, PRESET_NAMES};
use crb_core::CrbError;

use crate::config::{ConfigError, Overrides, Resolved, RunConfig};

#[derive(Parser)]
#[command(
    name = "crb",
    version,
    about = "Direct and weakly-nonlinear solvers for coupled Boussinesq waves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Snapshot CSVs from the direct solver and the weakly-nonlinear solution.
    Simulate(RunArgs),
    /// Error sweep over eps with power-law fits.
    Sweep(RunArgs),
    /// Energy and momentum balance series.
    Conservation(RunArgs),
    /// List presets, or print one as a config file.
    Presets {
        /// Print this preset in config-file form.
        #[arg(long)]
        dump: Option<String>,
    },
    /// Parse, merge and validate a config; prints the resolved config.
    ValidateConfig(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Compiled-in preset (used when no config is given).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict output to one order: leading, sqrt-eps or eps.
    #[arg(long)]
    order: Option<String>,
    /// Asymptotic regime: close or distinct.
    #[arg(long)]
    case: Option<String>,
    /// Worker threads for the rayon pool.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_args(a: &RunArgs) -> Result<Resolved> {
    let cfg = match (&a.config, &a.preset) {
        (Some(_), Some(_)) => return Err(anyhow!(ConfigError("give --config or --preset, not both".into()))),
        (Some(path), None) => config::load(path)?,
        (None, Some(name)) => RunConfig {
            preset: Some(name.clone()),
            ..RunConfig::default()
        },
        (None, None) => return Err(anyhow!(ConfigError("one of --config or --preset is required".into()))),
    };
    if let Some(n) = a.threads {
        if n == 0 {
            return Err(anyhow!(ConfigError("--threads must be at least 1".into())));
        }
        if !crb_core::par::configure_threads(n) {
            log::warn!("--threads {n} ignored: thread pool unavailable in this build or already started");
        }
    }
    config::resolve(
        &cfg,
        &Overrides {
            order: a.order.clone(),
            case: a.case.clone(),
        },
    )
}

fn out_dir(a: &RunArgs, r: &Resolved) -> PathBuf {
    a.out
        .clone()
        .or_else(|| r.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&r.name))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let r = resolve_args(&a)?;
            commands::simulate(&r, &out_dir(&a, &r))
        }
        Command::Sweep(a) => {
            let r = resolve_args(&a)?;
            commands::sweep(&r, &out_dir(&a, &r))
        }
        Command::Conservation(a) => {
            let r = resolve_args(&a)?;
            commands::conservation(&r, &out_dir(&a, &r))
        }
        Command::Presets { dump } => {
            match dump {
                Some(name) => print!("{}", toml::to_string_pretty(&config::preset_config(&name)?)?),
                None => {
                    for name in PRESET_NAMES {
                        let p = preset(name)?;
                        println!("{name:<18} {}", p.description);
                    }
                }
            }
            Ok(())
        }
        Command::ValidateConfig(a) => {
            let r = resolve_args(&a)?;
            r.initial_condition()?;
            print!("{}", toml::to_string_pretty(&r.echo)?);
            Ok(())
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<CrbError>() {
        Some(CrbError::Divergence { .. }) => 3,
        Some(CrbError::Config(_)) | Some(CrbError::Precondition(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
