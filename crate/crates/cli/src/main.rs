mod args;
mod artifacts;
mod commands;
mod error;

use std::path::Path;
use std::process::ExitCode;

use biphoton::io::config::{default_config, load_config};
use clap::Parser;

use crate::args::{Cli, Command};
use crate::artifacts::Artifacts;
use crate::commands::Outcome;
use crate::error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<Outcome> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    }
    let overrides = cli.overrides();
    let cfg = match &cli.common.config {
        Some(p) => load_config(p, &overrides)?,
        None => default_config(&overrides)?,
    };
    let mut inputs: Vec<&Path> = cli.common.config.iter().map(|p| p.as_path()).collect();
    match &cli.command {
        Command::Analyze { frames, .. } => inputs.push(frames),
        Command::Schmidt { grid: Some(g) } => inputs.push(g),
        _ => {}
    }
    let mut out = Artifacts::new(&cli.common.out_dir, &inputs)?;
    out.json("config.resolved.json", &cfg)?;
    let outcome = match &cli.command {
        Command::Model { no_grid, .. } => commands::model::run(&cfg, &mut out, !no_grid),
        Command::Ring { points, k_max, lambda } => commands::ring::run(&cfg, *points, *k_max, *lambda, &mut out),
        Command::Simulate { out: file, .. } => commands::simulate::run(&cfg, file, &mut out),
        Command::Analyze { frames, .. } => commands::analyze::run(&cfg, frames, &mut out),
        Command::Schmidt { grid } => commands::schmidt::run(&cfg, grid.as_deref(), &mut out),
        Command::Report { theory, experiment, .. } => commands::report::run(&cfg, theory, experiment, &mut out),
    };
    // Record whatever was written, even when the command failed part way.
    let manifest = out.finish();
    let outcome = outcome?;
    manifest?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(errors)) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            ExitCode::from(1)
        }
        Ok(Outcome::Rejected(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}
