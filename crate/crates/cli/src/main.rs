//! `subharm`: batch experiments for approximating subharmonic functions by `log|f|`.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::ToleranceFailure;
use crate::config::{Flags, RunConfig, UserError};

#[derive(Parser)]
#[command(name = "subharm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build the approximating zero set and report the L¹ disk error.
    Approximate,
    /// Split an even-mass measure into mass-2 rectangle pieces.
    Partition,
    /// Partition, then replace every piece by its moment-matched pair.
    Atomize,
    /// L¹ error and counting gaps of a candidate zero set against the input.
    Sharpness,
    /// Jensen residuals of the input potential on the radius grid.
    Jensen,
    /// Run the pipeline with every structural verifier.
    Verify,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let out = match cli.command {
        Command::Approximate => commands::approximate_cmd(&cfg)?,
        Command::Partition => commands::partition_cmd(&cfg)?,
        Command::Atomize => commands::atomize_cmd(&cfg)?,
        Command::Sharpness => commands::sharpness_cmd(&cfg)?,
        Command::Jensen => commands::jensen_cmd(&cfg)?,
        Command::Verify => commands::verify_cmd(&cfg)?,
    };
    println!("wrote {}", out.display());
    Ok(())
}

/// 2 for bad input, 1 for everything else (invariant or tolerance failures).
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UserError>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if cause.is::<ToleranceFailure>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<subharm_core::Error>() {
            return if e.is_user_error() { 2 } else { 1 };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
