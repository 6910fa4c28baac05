//! Command-line front end for designing analog beamformers, factorizing
//! co-array weight matrices, and simulating scanned composite images.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod files;
mod plot;

use config::Preset;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "beamsynth",
    version,
    about = "Analog beamforming weight synthesis and imaging simulation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design transmit/receive phase vectors matching a desired PSF
    Design(DesignArgs),
    /// Factorize a co-array weight matrix (digital SVD baseline + closed-form analog)
    Factorize(FactorizeArgs),
    /// Scan a point-scatterer scene and form the composite image
    Scan(ScanArgs),
    /// Validate the analytic gradient against central finite differences
    CheckGrad(CheckGradArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Experiment preset
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Configuration file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FactorizeArgs {
    /// Co-array matrix file or a design solution file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Configuration file (may provide `input`, `rank_tol`, `out`)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rank cutoff relative to the largest singular value
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Output directory (default `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Solution file produced by `design`
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Scene file (`noise_std`, `scatterer.N = angle_rad,re,im`)
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Configuration file (may provide `solution`, `scene`, `pixels`, `seed`, `out`)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of image pixels (default 200)
    #[arg(long)]
    pixels: Option<usize>,
    /// Noise seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckGradArgs {
    /// Number of random instances (default 20)
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Central-difference step (default 1e-6)
    #[arg(long, default_value_t = 1e-6)]
    h: f64,
    /// Random seed (default 0)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Design(args) => commands::cmd_design(
            args.preset,
            args.config.as_ref(),
            args.seed,
            args.out.as_ref(),
        ),
        Command::Factorize(args) => commands::cmd_factorize(
            args.config.as_ref(),
            args.input.as_ref(),
            args.rank_tol,
            args.out.as_ref(),
        ),
        Command::Scan(args) => commands::cmd_scan(
            args.config.as_ref(),
            args.solution.as_ref(),
            args.scene.as_ref(),
            args.pixels,
            args.seed,
            args.out.as_ref(),
        ),
        Command::CheckGrad(args) => commands::cmd_check_grad(args.instances, args.h, args.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
