//! `mwtrap`: command-line interface to the surface-trap and microwave
//! near-field simulation toolkit.
//!
//! Exit codes: 0 success, 1 physics or convergence failure, 2 usage error,
//! 3 configuration error.

mod commands;
mod scene;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mwtrap",
    version,
    about = "Surface-trap and microwave near-field simulation toolkit"
)]
struct Cli {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for every stochastic routine; recorded in the outputs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Trap configuration JSON (defaults to the shipped reference).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Electrode layout JSON (defaults to the shipped five-wire layout).
    #[arg(long, global = true)]
    layout: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static trap solving: equilibrium, modes, depth, shims.
    #[command(subcommand)]
    Trap(commands::trap::TrapCmd),
    /// Hyperfine structure: levels, clock points, ac Zeeman coefficients.
    #[command(subcommand)]
    Spins(commands::spins::SpinsCmd),
    /// Microwave near-field: nulling, maps, fits, pseudopotential.
    #[command(subcommand)]
    Nf(commands::nf::NfCmd),
    /// Radial-mode rotation: sweeps and alignment.
    #[command(subcommand)]
    Modes(commands::modes::ModesCmd),
    /// Two-qubit gate propagation and scans.
    #[command(subcommand)]
    Gate(commands::gate::GateCmd),
    /// Virtual experiments: Ramsey, calibration loops, field tracking.
    #[command(subcommand)]
    Vexp(commands::vexp::VexpCmd),
    /// Figure-data recipes (plot-ready CSV).
    #[command(subcommand)]
    Fig(commands::fig::FigCmd),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context {
        out: cli.out,
        seed: cli.seed,
        config: cli.config,
        layout: cli.layout,
    };
    let result = match cli.command {
        Command::Trap(cmd) => commands::trap::run(&ctx, cmd),
        Command::Spins(cmd) => commands::spins::run(&ctx, cmd),
        Command::Nf(cmd) => commands::nf::run(&ctx, cmd),
        Command::Modes(cmd) => commands::modes::run(&ctx, cmd),
        Command::Gate(cmd) => commands::gate::run(&ctx, cmd),
        Command::Vexp(cmd) => commands::vexp::run(&ctx, cmd),
        Command::Fig(cmd) => commands::fig::run(&ctx, cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                mwtrap::Error::Config(_)
                | mwtrap::Error::UnknownElectrode(_)
                | mwtrap::Error::Layout(_)
                | mwtrap::Error::BadLevel { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
