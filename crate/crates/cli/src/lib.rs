//! Command-line front end for the radial string model: runs experiments,
//! writes CSV traces and a JSON manifest, and maps outcomes to exit codes.

mod commands;
pub mod init;
pub mod output;
pub mod settings;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::output::{OutputDir, Recorder};
use crate::settings::{Overrides, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("run failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Failed(_) => EXIT_CHECK_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "npeskin", version, about = "Radial elastic-string model in Stokes flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve initial data and record diagnostics and snapshots.
    Simulate(Overrides),
    /// Compare a small-data run with the exact linearized flow.
    Linear(Overrides),
    /// Vanishing-viscosity sweep over a descending epsilon list.
    Sweep(Overrides),
    /// Randomized and deterministic property suites.
    Verify(Overrides),
    /// Scalar model against the full vector contour solver on one curve.
    Oracle(Overrides),
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, overrides) = match &cli.command {
        Command::Simulate(o) => ("simulate", o),
        Command::Linear(o) => ("linear", o),
        Command::Sweep(o) => ("sweep", o),
        Command::Verify(o) => ("verify", o),
        Command::Oracle(o) => ("oracle", o),
    };
    match execute(name, overrides) {
        Ok(pass) => {
            if pass {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("npeskin {name}: {e}");
            e.exit_code()
        }
    }
}

fn execute(name: &str, overrides: &Overrides) -> Result<bool, CliError> {
    let settings = Settings::resolve(name, overrides)?;
    let mut out = OutputDir::create(&settings.out_dir)?;
    let mut rec = Recorder::default();
    let body = match name {
        "simulate" => commands::simulate_cmd,
        "linear" => commands::linear_cmd,
        "sweep" => commands::sweep_cmd,
        "verify" => commands::verify_cmd,
        _ => commands::oracle_cmd,
    };
    let outcome = body(&settings, &mut rec, &mut out);
    if let Err(CliError::Failed(msg)) = &outcome {
        rec.check(name, false, msg.clone());
    } else {
        outcome?;
    }
    let manifest = rec.finish(name, &settings, &mut out)?;
    for c in &manifest.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} files to {}", manifest.files.len(), out.root().display());
    Ok(manifest.status == "pass")
}
