//! `slowfast`: experiments on the slow-fast Darboux foliation driven by a
//! TOML config.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slowfast_core::export::SCHEMA_VERSION;

use crate::config::ExperimentConfig;
use crate::output::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "slowfast", version, about = "Dulac maps, isoclines and limit-cycle bounds for a slow-fast foliation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace C_{±0}, C_{±pi}, C_theta fans and the singular curve.
    Isoclines(Args),
    /// Dulac map tables on real and complex grids with residual report.
    Dulac(Args),
    /// Integrable and perturbed phase portraits.
    Portrait(Args),
    /// Displacement tables, real cycles and Melnikov comparison.
    Cycles(Args),
    /// Contour, winding report and cyclicity experiment table.
    Bound(Args),
    /// Rescaled-chart residuals and curves.
    Blowup(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let (args, f): (&Args, fn(&ExperimentConfig) -> CliResult<Vec<PathBuf>>) = match &cli.command {
        Command::Isoclines(a) => (a, commands::isoclines),
        Command::Dulac(a) => (a, commands::dulac),
        Command::Portrait(a) => (a, commands::portrait),
        Command::Cycles(a) => (a, commands::cycles),
        Command::Bound(a) => (a, commands::bound),
        Command::Blowup(a) => (a, commands::blowup),
    };
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| CliError::Config(e.0))?;
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    f(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let diag = serde_json::json!({
                "schema": SCHEMA_VERSION,
                "kind": "error",
                "category": e.category(),
                "message": e.message(),
            });
            eprintln!("{diag}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
