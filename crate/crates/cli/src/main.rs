//! `airsim` command-line tool.
//!
//! Exit status: 0 on success, 2 when a run completed with exclusions or
//! skipped outputs, 1 on fatal errors.

mod commands;
mod config;
mod data;
mod diag;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "airsim", version, about = "Delhi Similarity Index, PM 2.5 interpolation and seasonal diagnostics")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, env = "AIRSIM_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Similarity threshold V in (0, 1).
    #[arg(long = "v", global = true)]
    v: Option<f64>,
    #[arg(long, global = true)]
    min_coverage: Option<f64>,
    /// IDW power.
    #[arg(long, global = true)]
    power: Option<f64>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute per-gas and composite indices; writes report.json and dsi_table.csv.
    ComputeDsi,
    /// Check that observation limits bracket each reference standard.
    Validate,
    /// Interpolate annual PM 2.5 station means onto an ESRI ASCII grid.
    Interpolate {
        #[arg(long)]
        city: Option<String>,
        #[arg(long)]
        year: Option<i32>,
    },
    /// Emit long-format CSV series behind the concentration, index and daily plots.
    ReportFigures,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let overrides =
        Overrides { output_dir: cli.output_dir, v: cli.v, min_coverage: cli.min_coverage, power: cli.power };
    let config_path =
        cli.config.ok_or_else(|| CliError::Config("no configuration: pass --config or set AIRSIM_CONFIG".into()))?;
    let config = RunConfig::load(Some(&config_path), &overrides)?;
    match cli.command {
        Command::ComputeDsi => commands::compute_dsi(&config, cli.force),
        Command::Validate => commands::validate(&config),
        Command::Interpolate { city, year } => commands::interpolate(&config, city.as_deref(), year, cli.force),
        Command::ReportFigures => commands::report_figures(&config, cli.force),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            diag::error(e.code(), &e);
            ExitCode::from(1)
        }
    }
}
