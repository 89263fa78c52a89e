//! `crgen`: capacity sweeps, protocol Monte Carlo, typicality checks and the
//! perfect-correlation scheme.

mod commands;
mod error;
mod output;
mod spec;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::output::OutputDir;
use crate::spec::{ExperimentArgs, Kind, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "crgen", version, about = "Common randomness from correlated Gaussian sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the CR capacity over a (rho, cw) grid.
    Capacity(ExperimentArgs),
    /// Monte Carlo of the binned codebook protocol.
    Protocol(ExperimentArgs),
    /// Joint-typicality and independent-pairing checks.
    Lemmas(ExperimentArgs),
    /// Key generation for perfectly correlated sources.
    Perfect(ExperimentArgs),
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let (kind, args) = match &cli.command {
        Command::Capacity(a) => (Kind::CapacitySweep, a),
        Command::Protocol(a) => (Kind::ProtocolMc, a),
        Command::Lemmas(a) => (Kind::LemmaCheck, a),
        Command::Perfect(a) => (Kind::PerfectDemo, a),
    };
    let spec = args.resolve(kind, std::env::var(OUT_DIR_ENV).ok())?;
    let mut out = OutputDir::create(&spec.out)?;
    let summary = match kind {
        Kind::CapacitySweep => commands::capacity(&spec, &mut out)?,
        Kind::ProtocolMc => commands::protocol(&spec, &mut out)?,
        Kind::LemmaCheck => commands::lemmas(&spec, &mut out)?,
        Kind::PerfectDemo => commands::perfect(&spec, &mut out)?,
    };
    let files = out.finish(kind.stem(), argv)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} files to {}", files.len(), spec.out.display());
    match summary.failure {
        Some(msg) => Err(CliError::CheckFailed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
